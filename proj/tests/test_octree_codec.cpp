// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <string_view>

#include "cloudgauge/error.hpp"
#include "cloudgauge/octree_codec.hpp"
#include "cloudgauge/range_coder.hpp"
#include "cloudgauge/spatial_index.hpp"
#include "support.hpp"

using namespace cloudgauge;

namespace {

#include "golden_streams.inc"

std::vector<std::uint8_t> from_hex(std::string_view hex) {
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i + 1 < hex.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>(std::stoi(std::string(hex.substr(i, 2)), nullptr, 16)));
  }
  return out;
}

PointCloud two_corners() {
  Points p(3, 2);
  p << 0, 7, 0, 7, 0, 7;
  return PointCloud(p, 3);
}

PointCloud grid_pattern() {
  Points p(3, 200);
  for (int i = 0; i < 200; ++i) p.col(i) << (i * 37) % 64, (i * 11 + 3) % 64, (i * i) % 64;
  return PointCloud(p, 6);
}

PointCloud off_grid() {
  Points p(3, 60);
  for (int i = 0; i < 60; ++i) {
    p.col(i) << 1.5 + ((i * 7) % 23) * 0.125, -2.0 + ((i * 5) % 17) * 0.375, 0.25 * ((i * 3) % 11);
  }
  return PointCloud(p);
}

// Largest distance from any point of `a` to its nearest point in `b`.
double directed_hausdorff(const Points& a, const Points& b) {
  const SpatialIndex index(b);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    worst = std::max(worst, std::sqrt(index.nearest(a.col(i)).squared_distance));
  }
  return worst;
}

std::vector<std::uint8_t> range_decode_all(std::span<const std::uint8_t> coded, std::size_t n) {
  AdaptiveByteModel model;
  RangeDecoder decoder(coded);
  std::vector<std::uint8_t> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(decoder.decode(model));
  CHECK(decoder.exhausted_cleanly());
  return out;
}

}  // namespace

TEST_CASE("two opposite corners at depth 1") {
  const OctreeStream s = octree_encode(two_corners(), 1);
  REQUIRE(s.payload.size() == 1);
  CHECK(s.payload[0] == 0x81);
  const PointCloud decoded = octree_decode(s);
  Points expected(3, 2);
  expected << 2, 6, 2, 6, 2, 6;
  CHECK(decoded.points() == expected);
  CHECK(decoded.precision() == 3);
}

TEST_CASE("single point at depth 3 gives a one-bit byte per level") {
  Points p(3, 1);
  p << 5, 1, 6;
  const OctreeStream s = octree_encode(PointCloud(p, 3), 3);
  REQUIRE(s.payload.size() == 3);
  for (const auto b : s.payload) CHECK(std::has_single_bit(static_cast<unsigned>(b)));
  // Voxel (5,1,6) in binary is x=101 y=001 z=110: children 5, 1, 6 by level.
  CHECK(s.payload == std::vector<std::uint8_t>{1u << 5, 1u << 1, 1u << 6});
  CHECK(octree_decode(s).points() == Points(p.array() + 0.5));
}

TEST_CASE("leaf size is 2^(precision - depth) on voxelized clouds") {
  std::mt19937_64 rng(1);
  for (int pr = 2; pr <= 10; ++pr) {
    const PointCloud cloud(testsupport::random_grid_points(rng, 50, pr), pr);
    for (int depth = 1; depth <= pr; ++depth) {
      const OctreeStream s = octree_encode(cloud, depth);
      CHECK(s.header.leaf_size() == std::ldexp(1.0, pr - depth));
      CHECK(s.header.origin.isZero());
    }
  }
}

TEST_CASE("decoded points stay within half a leaf diagonal") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    const int pr = 3 + trial % 8;
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng() % 800);
    const PointCloud cloud =
        trial % 3 == 2 ? PointCloud(testsupport::random_real_points(rng, n, -3.0, 17.0))
                       : PointCloud(testsupport::random_grid_points(rng, n, pr), pr);
    const int max_depth = cloud.voxelized() ? pr : 9;
    for (int depth = 1; depth <= max_depth; ++depth) {
      const OctreeStream s = octree_encode(cloud, depth);
      const PointCloud decoded = octree_decode(s);
      const double bound = std::sqrt(3.0) / 2.0 * s.header.leaf_size() * (1.0 + 1e-12);
      CHECK(directed_hausdorff(cloud.points(), decoded.points()) <= bound);
      CHECK(directed_hausdorff(decoded.points(), cloud.points()) <= bound);
      CHECK(decoded.size() <= cloud.size());
    }
  }
}

TEST_CASE("full depth on a voxelized cloud keeps every distinct voxel") {
  std::mt19937_64 rng(3);
  const Points p = testsupport::random_distinct_grid_points(rng, 300, 5);
  const PointCloud decoded = octree_decode(octree_encode(PointCloud(p, 5), 5));
  REQUIRE(decoded.size() == 300);
  // Every decoded centre is half a unit off an input point.
  CHECK(directed_hausdorff(decoded.points(), p) == doctest::Approx(std::sqrt(0.75)));
}

TEST_CASE("raw and range modes decode to the same cloud") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const PointCloud cloud(testsupport::random_grid_points(rng, 2000, 8), 8);
    const int depth = 1 + trial % 8;
    const OctreeStream raw = octree_encode(cloud, depth, EntropyMode::kRaw);
    const OctreeStream coded = octree_encode(cloud, depth, EntropyMode::kRange);
    CHECK(octree_decode(raw) == octree_decode(coded));
    CHECK(occupancy_bytes(coded) == raw.payload);
  }
}

TEST_CASE("range coder") {
  SUBCASE("skewed single-path stream compresses") {
    const std::vector<std::uint8_t> path(2000, 0x01);
    const auto coded = range_encode(path);
    CHECK(coded.size() <= path.size() + 16);
    CHECK(coded.size() < path.size() / 10);
    CHECK(range_decode_all(coded, path.size()) == path);
  }
  SUBCASE("uniform random bytes roundtrip with bounded expansion") {
    std::mt19937_64 rng(5);
    std::vector<std::uint8_t> bytes(5000);
    for (auto& b : bytes) b = static_cast<std::uint8_t>(rng());
    const auto coded = range_encode(bytes);
    // The adaptive model chases noise on incompressible input; expansion stays small.
    CHECK(coded.size() <= bytes.size() * 105 / 100);
    CHECK(range_decode_all(coded, bytes.size()) == bytes);
  }
  SUBCASE("long stream exercises count halving") {
    std::mt19937_64 rng(6);
    std::geometric_distribution<int> g(0.3);
    std::vector<std::uint8_t> bytes(100000);
    for (auto& b : bytes) b = static_cast<std::uint8_t>(std::min(g(rng), 255));
    CHECK(range_decode_all(range_encode(bytes), bytes.size()) == bytes);
  }
  SUBCASE("carry propagation through 0xFF runs") {
    std::vector<std::uint8_t> bytes;
    for (int i = 0; i < 3000; ++i) bytes.push_back(static_cast<std::uint8_t>(i % 7 == 0 ? 255 : 254));
    CHECK(range_decode_all(range_encode(bytes), bytes.size()) == bytes);
  }
}

TEST_CASE("serialize and parse roundtrip") {
  std::mt19937_64 rng(7);
  const PointCloud cloud(testsupport::random_real_points(rng, 500, -1, 1));
  for (const auto mode : {EntropyMode::kRaw, EntropyMode::kRange}) {
    const OctreeStream s = octree_encode(cloud, 6, mode);
    const auto bytes = s.serialize();
    CHECK(bytes.size() == kOctreeHeaderBytes + s.payload.size());
    CHECK(OctreeStream::parse(bytes) == s);
  }
}

TEST_CASE("stream errors") {
  const OctreeStream good = octree_encode(grid_pattern(), 6);
  const auto bytes = good.serialize();

  SUBCASE("bad magic") {
    auto b = bytes;
    b[0] = 'X';
    CHECK_THROWS_AS(OctreeStream::parse(b), DataError);
  }
  SUBCASE("truncated header") {
    CHECK_THROWS_AS(OctreeStream::parse(std::span(bytes).first(30)), DataError);
  }
  SUBCASE("declared length disagrees with the data") {
    CHECK_THROWS_AS(OctreeStream::parse(std::span(bytes).first(bytes.size() - 1)), DataError);
    auto longer = bytes;
    longer.push_back(0);
    CHECK_THROWS_AS(OctreeStream::parse(longer), DataError);
  }
  SUBCASE("empty payload") {
    OctreeStream s = good;
    s.payload.clear();
    CHECK_THROWS_AS(OctreeStream::parse(s.serialize()), DataError);
    CHECK_THROWS_AS(rate_bits(s), DataError);
  }
  SUBCASE("truncated payload") {
    OctreeStream s = good;
    s.payload.pop_back();
    CHECK_THROWS_AS(octree_decode(s), DataError);
  }
  SUBCASE("trailing payload") {
    OctreeStream s = good;
    s.payload.push_back(0x01);
    CHECK_THROWS_AS(octree_decode(s), DataError);
  }
  SUBCASE("zero occupancy byte") {
    OctreeStream s = good;
    s.payload[3] = 0;
    CHECK_THROWS_AS(octree_decode(s), DataError);
  }
  SUBCASE("range desync") {
    OctreeStream s = octree_encode(grid_pattern(), 6, EntropyMode::kRange);
    s.payload.resize(s.payload.size() / 2);
    CHECK_THROWS_AS(octree_decode(s), DataError);
  }
  SUBCASE("depth out of range") {
    CHECK_THROWS_AS(octree_encode(grid_pattern(), 0), UsageError);
    CHECK_THROWS_AS(octree_encode(grid_pattern(), kMaxOctreeDepth + 1), UsageError);
    auto b = bytes;
    b[4 + 32] = 0;
    CHECK_THROWS_AS(OctreeStream::parse(b), DataError);
  }
  SUBCASE("unknown entropy mode") {
    auto b = bytes;
    b[4 + 33] = 7;
    CHECK_THROWS_AS(OctreeStream::parse(b), DataError);
  }
  SUBCASE("empty cloud") { CHECK_THROWS_AS(octree_encode(PointCloud(Points(3, 0)), 3), UsageError); }
}

TEST_CASE("rate counts header and payload bits") {
  const OctreeStream s = octree_encode(two_corners(), 1);
  const Rate r = rate_bits(s);
  CHECK(r.total_bits == (kOctreeHeaderBytes + 1) * 8);
  CHECK(r.bits_per_input_point == doctest::Approx(220.0));
}

TEST_CASE("non-voxelized root cube") {
  SUBCASE("power-of-two side strictly above the extent") {
    const RootCube c = octree_root_cube(off_grid());
    CHECK(c.origin == Eigen::Vector3d(1.5, -2.0, 0.0));
    CHECK(c.side == 8.0);
  }
  SUBCASE("single location") {
    const PointCloud cloud(Points::Constant(3, 4, 0.3));
    const RootCube c = octree_root_cube(cloud);
    CHECK(c.side == 1.0);
    const PointCloud decoded = octree_decode(octree_encode(cloud, 4));
    CHECK(decoded.size() == 1);
    CHECK(decoded.points().col(0).isApprox(Eigen::Vector3d::Constant(0.3 + 1.0 / 32.0)));
    CHECK_FALSE(decoded.precision().has_value());
  }
}

TEST_CASE("golden streams match the independent reference encoder") {
  const struct {
    PointCloud cloud;
    int depth;
    std::string_view raw;
    std::string_view range;
  } cases[] = {
      {two_corners(), 1, k_two_corners_raw, k_two_corners_range},
      {grid_pattern(), 6, k_grid_pattern_raw, k_grid_pattern_range},
      {grid_pattern(), 4, k_grid_pattern_d4_raw, k_grid_pattern_d4_range},
      {off_grid(), 5, k_off_grid_raw, k_off_grid_range},
  };
  for (const auto& c : cases) {
    CHECK(octree_encode(c.cloud, c.depth, EntropyMode::kRaw).serialize() == from_hex(c.raw));
    CHECK(octree_encode(c.cloud, c.depth, EntropyMode::kRange).serialize() == from_hex(c.range));
    // Decoding the frozen bytes gives the same cloud in both modes.
    CHECK(octree_decode(OctreeStream::parse(from_hex(c.raw))) ==
          octree_decode(OctreeStream::parse(from_hex(c.range))));
  }
}

TEST_CASE("encoding is deterministic and order independent") {
  std::mt19937_64 rng(8);
  Points p = testsupport::random_grid_points(rng, 1000, 7);
  const auto a = octree_encode(PointCloud(p, 7), 5, EntropyMode::kRange).serialize();
  std::vector<Eigen::Index> perm(1000);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Points shuffled(3, 1000);
  for (Eigen::Index i = 0; i < 1000; ++i) shuffled.col(i) = p.col(perm[static_cast<std::size_t>(i)]);
  CHECK(octree_encode(PointCloud(shuffled, 7), 5, EntropyMode::kRange).serialize() == a);
  CHECK(octree_encode(PointCloud(p, 7), 5, EntropyMode::kRange).serialize() == a);
}
