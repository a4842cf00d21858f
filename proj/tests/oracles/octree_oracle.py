#!/usr/bin/env python3
# SPDX-FileCopyrightText: 2026 The cloudgauge Authors
# SPDX-License-Identifier: Apache-2.0
"""Independent reference for the octree golden streams.

Builds the occupancy bytes by recursive midpoint subdivision, range-codes
them with a straightforward order-0 adaptive coder and prints the serialized
streams as C++ initializers for tests/golden_streams.inc.
"""

import math
import struct


def cloud_two_corners():
    return [(0, 0, 0), (7, 7, 7)], 3


def cloud_grid_pattern():
    pts = [((i * 37) % 64, (i * 11 + 3) % 64, (i * i) % 64) for i in range(200)]
    return pts, 6


def cloud_off_grid():
    pts = [(1.5 + ((i * 7) % 23) * 0.125, -2.0 + ((i * 5) % 17) * 0.375, 0.25 * ((i * 3) % 11))
           for i in range(60)]
    return pts, None


def root_cube(pts, precision):
    if precision is not None:
        return (0.0, 0.0, 0.0), float(2 ** precision)
    lo = tuple(min(p[a] for p in pts) for a in range(3))
    hi = tuple(max(p[a] for p in pts) for a in range(3))
    extent = max(h - l for h, l in zip(hi, lo))
    if extent == 0:
        return lo, 1.0
    side = 1.0
    while side <= extent:
        side *= 2.0
    while side / 2.0 > extent:
        side /= 2.0
    return lo, side


def occupancy(pts, origin, side, depth):
    leaf = side / 2 ** depth
    cells = 2 ** depth
    voxels = set()
    for p in pts:
        voxels.add(tuple(min(max(math.floor((p[a] - origin[a]) / leaf), 0), cells - 1) for a in range(3)))
    out = []
    level = [((0, 0, 0), cells, sorted(voxels))]
    for _ in range(depth):
        nxt = []
        for corner, size, members in level:
            half = size // 2
            children = [[] for _ in range(8)]
            for v in members:
                k = 0
                for a in range(3):
                    if v[a] >= corner[a] + half:
                        k |= 1 << (2 - a)
                children[k].append(v)
            byte = 0
            for k in range(8):
                if children[k]:
                    byte |= 1 << k
                    c = tuple(corner[a] + (half if k >> (2 - a) & 1 else 0) for a in range(3))
                    nxt.append((c, half, children[k]))
            out.append(byte)
        level = nxt
    return out


def range_code(symbols):
    freq = [1] * 256
    low, rng, cache, cache_size = 0, 0xFFFFFFFF, 0, 1
    out = bytearray()

    def shift():
        nonlocal low, cache, cache_size
        if low < 0xFF000000 or low >= 1 << 32:
            carry = low >> 32
            pending = cache
            while True:
                out.append((pending + carry) & 0xFF)
                pending = 0xFF
                cache_size -= 1
                if cache_size == 0:
                    break
            cache = (low >> 24) & 0xFF
        cache_size += 1
        low = (low & 0x00FFFFFF) << 8

    for s in symbols:
        total = sum(freq)
        r = rng // total
        low += r * sum(freq[:s])
        rng = r * freq[s]
        while rng < 1 << 24:
            rng = (rng << 8) & 0xFFFFFFFF
            shift()
        freq[s] += 24
        if sum(freq) > 1 << 16:
            freq = [(f >> 1) | 1 for f in freq]
    for _ in range(5):
        shift()
    return bytes(out)


def serialize(origin, side, depth, mode, count, payload):
    head = b"OCQ1" + struct.pack("<4dBBQQ", *origin, side, depth, mode, count, len(payload))
    return head + payload


def main():
    print("// SPDX-FileCopyrightText: 2026 The cloudgauge Authors")
    print("// SPDX-License-Identifier: Apache-2.0")
    print("// Generated by tests/oracles/octree_oracle.py; do not edit.")
    cases = [("two_corners", cloud_two_corners(), 1), ("grid_pattern", cloud_grid_pattern(), 6),
             ("grid_pattern_d4", cloud_grid_pattern(), 4), ("off_grid", cloud_off_grid(), 5)]
    for name, (pts, precision), depth in cases:
        origin, side = root_cube(pts, precision)
        raw = bytes(occupancy(pts, origin, side, depth))
        for mode, payload in ((0, raw), (1, range_code(raw))):
            blob = serialize(origin, side, depth, mode, len(pts), payload)
            tag = "raw" if mode == 0 else "range"
            print(f"// {name} depth {depth} {tag}: {len(payload)} payload bytes")
            print(f"constexpr std::string_view k_{name}_{tag} = \"{blob.hex()}\";")


if __name__ == "__main__":
    main()
