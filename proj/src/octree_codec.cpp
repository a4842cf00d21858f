// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

#include "cloudgauge/octree_codec.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include "cloudgauge/error.hpp"
#include "cloudgauge/range_coder.hpp"

namespace cloudgauge {

namespace {

constexpr char kMagic[4] = {'O', 'C', 'Q', '1'};

std::uint64_t spread3(std::uint64_t v) {
  v &= 0x1FFFFF;
  v = (v | v << 32) & 0x1F00000000FFFFull;
  v = (v | v << 16) & 0x1F0000FF0000FFull;
  v = (v | v << 8) & 0x100F00F00F00F00Full;
  v = (v | v << 4) & 0x10C30C30C30C30C3ull;
  v = (v | v << 2) & 0x1249249249249249ull;
  return v;
}

std::uint64_t compact3(std::uint64_t v) {
  v &= 0x1249249249249249ull;
  v = (v ^ (v >> 2)) & 0x10C30C30C30C30C3ull;
  v = (v ^ (v >> 4)) & 0x100F00F00F00F00Full;
  v = (v ^ (v >> 8)) & 0x1F0000FF0000FFull;
  v = (v ^ (v >> 16)) & 0x1F00000000FFFFull;
  v = (v ^ (v >> 32)) & 0x1FFFFF;
  return v;
}

// x occupies the most significant bit of every 3-bit group.
std::uint64_t morton(std::uint64_t x, std::uint64_t y, std::uint64_t z) {
  return spread3(x) << 2 | spread3(y) << 1 | spread3(z);
}

template <typename T>
void put(std::vector<std::uint8_t>& out, T v) {
  std::uint8_t buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

template <typename T>
T get(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  if (pos + sizeof(T) > bytes.size()) {
    throw DataError("octree stream truncated at byte " + std::to_string(pos));
  }
  std::uint8_t buf[sizeof(T)];
  std::memcpy(buf, bytes.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  pos += sizeof(T);
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

void check_depth(int depth) {
  if (depth < 1 || depth > kMaxOctreeDepth) {
    throw UsageError("octree depth must be in [1, " + std::to_string(kMaxOctreeDepth) + "], got " +
                     std::to_string(depth));
  }
}

// Pulls occupancy bytes either straight from the payload or through the
// range decoder.
class ByteSource {
 public:
  explicit ByteSource(const OctreeStream& stream)
      : stream_(stream), decoder_(stream.payload) {}

  std::uint8_t next() {
    if (stream_.header.entropy == EntropyMode::kRaw) {
      if (pos_ >= stream_.payload.size()) {
        throw DataError("octree payload truncated after " + std::to_string(pos_) + " bytes");
      }
      return stream_.payload[pos_++];
    }
    return decoder_.decode(model_);
  }

  void finish() const {
    if (stream_.header.entropy == EntropyMode::kRaw) {
      if (pos_ != stream_.payload.size()) {
        throw DataError("octree payload has " + std::to_string(stream_.payload.size() - pos_) +
                        " trailing bytes");
      }
    } else if (!decoder_.exhausted_cleanly()) {
      throw DataError("range decoder desync: payload length mismatch");
    }
  }

 private:
  const OctreeStream& stream_;
  std::size_t pos_ = 0;
  RangeDecoder decoder_;
  AdaptiveByteModel model_;
};

// Morton codes of occupied leaves in breadth-first (= ascending) order, and
// the occupancy bytes read on the way.
std::vector<std::uint64_t> walk(const OctreeStream& stream, std::vector<std::uint8_t>* bytes) {
  check_depth(stream.header.depth);
  ByteSource source(stream);
  std::vector<std::uint64_t> level{0};
  std::vector<std::uint64_t> next;
  for (int l = 0; l < stream.header.depth; ++l) {
    next.clear();
    for (const std::uint64_t node : level) {
      const std::uint8_t occupancy = source.next();
      if (occupancy == 0) throw DataError("zero occupancy byte at octree level " + std::to_string(l));
      if (bytes != nullptr) bytes->push_back(occupancy);
      for (unsigned k = 0; k < 8; ++k) {
        if (occupancy & (1u << k)) next.push_back(node << 3 | k);
      }
    }
    level.swap(next);
  }
  source.finish();
  return level;
}

}  // namespace

double OctreeHeader::leaf_size() const { return std::ldexp(side, -depth); }

std::optional<int> OctreeHeader::grid_precision() const {
  if (!origin.isZero(0.0)) return std::nullopt;
  int exponent = 0;
  const double mantissa = std::frexp(side, &exponent);
  if (mantissa != 0.5) return std::nullopt;
  const int p = exponent - 1;
  if (p < 1 || p > 30) return std::nullopt;
  return p;
}

std::vector<std::uint8_t> OctreeStream::serialize() const {
  std::vector<std::uint8_t> out;
  out.reserve(kOctreeHeaderBytes + payload.size());
  out.insert(out.end(), kMagic, kMagic + 4);
  for (int a = 0; a < 3; ++a) put<double>(out, header.origin[a]);
  put<double>(out, header.side);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(header.depth));
  put<std::uint8_t>(out, static_cast<std::uint8_t>(header.entropy));
  put<std::uint64_t>(out, header.point_count);
  put<std::uint64_t>(out, payload.size());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

OctreeStream OctreeStream::parse(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw DataError("not an octree stream (bad magic)");
  }
  std::size_t pos = 4;
  OctreeStream s;
  for (int a = 0; a < 3; ++a) s.header.origin[a] = get<double>(bytes, pos);
  s.header.side = get<double>(bytes, pos);
  s.header.depth = get<std::uint8_t>(bytes, pos);
  const auto mode = get<std::uint8_t>(bytes, pos);
  s.header.point_count = get<std::uint64_t>(bytes, pos);
  const auto length = get<std::uint64_t>(bytes, pos);

  if (!s.header.origin.allFinite() || !std::isfinite(s.header.side) || !(s.header.side > 0.0)) {
    throw DataError("octree header has a non-finite origin or non-positive side");
  }
  if (s.header.depth < 1 || s.header.depth > kMaxOctreeDepth) {
    throw DataError("octree header depth " + std::to_string(s.header.depth) + " out of range");
  }
  if (mode > 1) throw DataError("unknown entropy mode " + std::to_string(mode));
  s.header.entropy = static_cast<EntropyMode>(mode);
  if (length == 0) throw DataError("octree stream has an empty payload");
  if (bytes.size() - pos != length) {
    throw DataError("octree payload length " + std::to_string(length) + " but " +
                    std::to_string(bytes.size() - pos) + " bytes follow the header");
  }
  s.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
  return s;
}

RootCube octree_root_cube(const PointCloud& cloud) {
  if (cloud.voxelized()) {
    return RootCube{Eigen::Vector3d::Zero(), std::ldexp(1.0, *cloud.precision())};
  }
  const Eigen::Vector3d lo = cloud.points().rowwise().minCoeff();
  const Eigen::Vector3d hi = cloud.points().rowwise().maxCoeff();
  const double extent = (hi - lo).maxCoeff();
  if (extent == 0.0) return RootCube{lo, 1.0};
  int exponent = 0;
  std::frexp(extent, &exponent);
  return RootCube{lo, std::ldexp(1.0, exponent)};
}

OctreeStream octree_encode(const PointCloud& cloud, int depth, EntropyMode entropy) {
  check_depth(depth);
  if (cloud.empty()) throw UsageError("cannot encode an empty cloud");

  const RootCube cube = octree_root_cube(cloud);
  OctreeStream stream;
  stream.header.origin = cube.origin;
  stream.header.side = cube.side;
  stream.header.depth = depth;
  stream.header.entropy = entropy;
  stream.header.point_count = static_cast<std::uint64_t>(cloud.size());

  const double leaf = stream.header.leaf_size();
  const double cells = std::ldexp(1.0, depth);
  std::vector<std::uint64_t> codes(static_cast<std::size_t>(cloud.size()));
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    const Eigen::Array3d c =
        ((cloud.point(i) - cube.origin) / leaf).array().floor().max(0.0).min(cells - 1.0);
    codes[static_cast<std::size_t>(i)] =
        morton(static_cast<std::uint64_t>(c.x()), static_cast<std::uint64_t>(c.y()),
               static_cast<std::uint64_t>(c.z()));
  }
  std::sort(codes.begin(), codes.end());
  codes.erase(std::unique(codes.begin(), codes.end()), codes.end());

  // levels[l] holds the occupied node codes at depth l.
  std::vector<std::vector<std::uint64_t>> levels(static_cast<std::size_t>(depth) + 1);
  levels[static_cast<std::size_t>(depth)] = std::move(codes);
  for (int l = depth - 1; l >= 0; --l) {
    auto& parents = levels[static_cast<std::size_t>(l)];
    for (const std::uint64_t c : levels[static_cast<std::size_t>(l) + 1]) {
      const std::uint64_t p = c >> 3;
      if (parents.empty() || parents.back() != p) parents.push_back(p);
    }
  }

  std::vector<std::uint8_t> bytes;
  for (int l = 0; l < depth; ++l) {
    const auto& children = levels[static_cast<std::size_t>(l) + 1];
    std::size_t j = 0;
    for (const std::uint64_t parent : levels[static_cast<std::size_t>(l)]) {
      std::uint8_t occupancy = 0;
      while (j < children.size() && (children[j] >> 3) == parent) {
        occupancy |= static_cast<std::uint8_t>(1u << (children[j] & 7u));
        ++j;
      }
      bytes.push_back(occupancy);
    }
  }

  stream.payload = entropy == EntropyMode::kRaw ? std::move(bytes) : range_encode(bytes);
  return stream;
}

std::vector<std::uint8_t> occupancy_bytes(const OctreeStream& stream) {
  std::vector<std::uint8_t> bytes;
  walk(stream, &bytes);
  return bytes;
}

PointCloud octree_decode(const OctreeStream& stream) {
  const std::vector<std::uint64_t> leaves = walk(stream, nullptr);
  const double leaf = stream.header.leaf_size();
  Points points(3, static_cast<Eigen::Index>(leaves.size()));
  for (std::size_t i = 0; i < leaves.size(); ++i) {
    const std::uint64_t code = leaves[i];
    const Eigen::Vector3d cell(static_cast<double>(compact3(code >> 2)),
                               static_cast<double>(compact3(code >> 1)),
                               static_cast<double>(compact3(code)));
    points.col(static_cast<Eigen::Index>(i)) =
        stream.header.origin + (cell.array() + 0.5).matrix() * leaf;
  }
  return PointCloud(std::move(points), stream.header.grid_precision());
}

Rate rate_bits(const OctreeStream& stream) {
  if (stream.payload.empty()) throw DataError("octree stream has an empty payload");
  if (stream.header.point_count == 0) throw DataError("octree header has zero point count");
  Rate rate;
  rate.total_bits = (kOctreeHeaderBytes + stream.payload.size()) * 8;
  rate.bits_per_input_point =
      static_cast<double>(rate.total_bits) / static_cast<double>(stream.header.point_count);
  return rate;
}

}  // namespace cloudgauge
