// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLOUDGAUGE_OCTREE_CODEC_HPP
#define CLOUDGAUGE_OCTREE_CODEC_HPP

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cloudgauge/point_cloud.hpp"

namespace cloudgauge {

enum class EntropyMode : std::uint8_t { kRaw = 0, kRange = 1 };

inline constexpr int kMaxOctreeDepth = 21;

/// Serialized header size: magic "OCQ1", origin (3 x f64), side (f64),
/// depth (u8), entropy mode (u8), point count (u64), payload length (u64).
inline constexpr std::size_t kOctreeHeaderBytes = 54;

struct OctreeHeader {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  double side = 1.0;
  int depth = 1;
  EntropyMode entropy = EntropyMode::kRaw;
  std::uint64_t point_count = 0;

  /// Edge length of a leaf voxel, side / 2^depth.
  double leaf_size() const;

  /// Grid precision implied by the root cube: p when origin is zero and side
  /// is 2^p for an integer p in [1, 30].
  std::optional<int> grid_precision() const;

  friend bool operator==(const OctreeHeader&, const OctreeHeader&) = default;
};

/// Breadth-first occupancy bytes of a pruned octree. Child k of a node covers
/// the octant (x >= mid) << 2 | (y >= mid) << 1 | (z >= mid); bit k of the
/// node's byte (LSB = child 0) marks an occupied child. With EntropyMode::kRange
/// the payload holds the range-coded bytes instead.
struct OctreeStream {
  OctreeHeader header;
  std::vector<std::uint8_t> payload;

  std::vector<std::uint8_t> serialize() const;
  static OctreeStream parse(std::span<const std::uint8_t> bytes);

  friend bool operator==(const OctreeStream&, const OctreeStream&) = default;
};

/// Root cube used for a cloud: [0, 2^pr)^3 for voxelized clouds, otherwise
/// the bounding cube's origin with side the smallest power of two strictly
/// above the largest extent (1 for a single location).
struct RootCube {
  Eigen::Vector3d origin;
  double side;
};
RootCube octree_root_cube(const PointCloud& cloud);

OctreeStream octree_encode(const PointCloud& cloud, int depth, EntropyMode entropy = EntropyMode::kRaw);

/// One point per occupied leaf at the voxel centre, in breadth-first leaf
/// order. Throws DataError on truncated payloads, zero occupancy bytes,
/// trailing data, or range-decoder desync.
PointCloud octree_decode(const OctreeStream& stream);

/// The uncompressed occupancy bytes of a stream (decodes range mode).
std::vector<std::uint8_t> occupancy_bytes(const OctreeStream& stream);

struct Rate {
  std::uint64_t total_bits = 0;
  double bits_per_input_point = 0.0;
};

/// (header + payload) * 8 bits, and that divided by the header point count.
Rate rate_bits(const OctreeStream& stream);

}  // namespace cloudgauge

#endif  // CLOUDGAUGE_OCTREE_CODEC_HPP
