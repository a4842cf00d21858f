// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

#include "cloudgauge/point_cloud.hpp"

#include <cmath>
#include <string>
#include <unordered_set>
#include <vector>

#include "cloudgauge/error.hpp"

namespace cloudgauge {

namespace {

constexpr int kMaxPrecision = 30;
constexpr int kMaxVoxelDepth = 21;

bool on_grid(const Points& points, int precision) {
  const double peak = peak_value(precision);
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    for (int a = 0; a < 3; ++a) {
      const double v = points(a, i);
      if (v < 0.0 || v > peak || v != std::floor(v)) return false;
    }
  }
  return true;
}

}  // namespace

PointCloud::PointCloud(Points points, std::optional<int> precision)
    : points_(std::move(points)), precision_(precision) {
  validate();
}

PointCloud::PointCloud(Points points, std::optional<Colors> colors,
                       std::optional<Normals> normals, std::optional<int> precision)
    : points_(std::move(points)),
      colors_(std::move(colors)),
      normals_(std::move(normals)),
      precision_(precision) {
  validate();
}

void PointCloud::validate() {
  if (!points_.allFinite()) throw DataError("point coordinates must be finite");
  if (colors_ && colors_->cols() != points_.cols()) {
    throw DataError("color count " + std::to_string(colors_->cols()) +
                    " does not match point count " + std::to_string(points_.cols()));
  }
  if (normals_) {
    if (normals_->cols() != points_.cols()) {
      throw DataError("normal count " + std::to_string(normals_->cols()) +
                      " does not match point count " + std::to_string(points_.cols()));
    }
    for (Eigen::Index i = 0; i < normals_->cols(); ++i) {
      const double len = normals_->col(i).norm();
      if (len != 0.0 && std::abs(len - 1.0) > kUnitNormalTolerance) {
        throw DataError("normal " + std::to_string(i) + " is not unit length (|n| = " +
                        std::to_string(len) + ")");
      }
    }
  }
  if (precision_ && (*precision_ < 1 || *precision_ > kMaxPrecision)) {
    throw UsageError("precision must be in [1, " + std::to_string(kMaxPrecision) + "], got " +
                     std::to_string(*precision_));
  }
  voxelized_ = precision_.has_value() && on_grid(points_, *precision_);
}

const Colors& PointCloud::colors() const {
  if (!colors_) throw UsageError("point cloud has no colors");
  return *colors_;
}

const Normals& PointCloud::normals() const {
  if (!normals_) throw UsageError("point cloud has no normals");
  return *normals_;
}

PointCloud PointCloud::with_colors(Colors colors) const {
  return PointCloud(points_, std::move(colors), normals_, precision_);
}

PointCloud PointCloud::with_normals(Normals normals) const {
  return PointCloud(points_, colors_, std::move(normals), precision_);
}

PointCloud PointCloud::with_precision(std::optional<int> precision) const {
  return PointCloud(points_, colors_, normals_, precision);
}

PointCloud PointCloud::without_attributes() const { return PointCloud(points_, precision_); }

PointCloud PointCloud::as_continuous() const {
  PointCloud out = *this;
  out.voxelized_ = false;
  return out;
}

bool operator==(const PointCloud& a, const PointCloud& b) {
  if (a.size() != b.size() || a.precision_ != b.precision_) return false;
  if (a.points_ != b.points_) return false;
  if (a.colors_.has_value() != b.colors_.has_value()) return false;
  if (a.colors_ && *a.colors_ != *b.colors_) return false;
  if (a.normals_.has_value() != b.normals_.has_value()) return false;
  if (a.normals_ && *a.normals_ != *b.normals_) return false;
  return true;
}

std::optional<int> infer_precision(const Points& points) {
  if (points.cols() == 0) return std::nullopt;
  double max_coord = 0.0;
  for (Eigen::Index i = 0; i < points.cols(); ++i) {
    for (int a = 0; a < 3; ++a) {
      const double v = points(a, i);
      if (v < 0.0 || v != std::floor(v)) return std::nullopt;
      max_coord = std::max(max_coord, v);
    }
  }
  int pr = 1;
  while (pr <= kMaxPrecision && peak_value(pr) < max_coord) ++pr;
  if (pr > kMaxPrecision) return std::nullopt;
  return pr;
}

BoundingCube bounding_cube(const PointCloud& cloud) {
  if (cloud.empty()) throw UsageError("bounding cube of an empty cloud");
  const Eigen::Vector3d lo = cloud.points().rowwise().minCoeff();
  const Eigen::Vector3d hi = cloud.points().rowwise().maxCoeff();
  const double extent = (hi - lo).maxCoeff();
  return BoundingCube{lo, extent > 0.0 ? extent : 1.0};
}

PointCloud voxelize(const PointCloud& cloud, int depth) {
  if (depth < 1 || depth > kMaxVoxelDepth) {
    throw UsageError("voxel depth must be in [1, " + std::to_string(kMaxVoxelDepth) + "]");
  }
  if (cloud.empty()) throw UsageError("cannot voxelize an empty cloud");

  const BoundingCube cube = bounding_cube(cloud);
  const double peak = peak_value(depth);
  const double scale = peak / cube.side;

  std::vector<Eigen::Index> kept;
  kept.reserve(static_cast<std::size_t>(cloud.size()));
  Points grid(3, cloud.size());
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(static_cast<std::size_t>(cloud.size()));

  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    Eigen::Vector3d q = ((cloud.point(i) - cube.origin) * scale).array().round();
    q = q.cwiseMax(0.0).cwiseMin(peak);
    const auto x = static_cast<std::uint64_t>(q.x());
    const auto y = static_cast<std::uint64_t>(q.y());
    const auto z = static_cast<std::uint64_t>(q.z());
    const std::uint64_t key = (x << 42) | (y << 21) | z;
    if (seen.insert(key).second) {
      grid.col(static_cast<Eigen::Index>(kept.size())) = q;
      kept.push_back(i);
    }
  }

  const auto n = static_cast<Eigen::Index>(kept.size());
  Points points = grid.leftCols(n);
  std::optional<Colors> colors;
  std::optional<Normals> normals;
  if (cloud.has_colors()) {
    colors = Colors(3, n);
    for (Eigen::Index j = 0; j < n; ++j) colors->col(j) = cloud.colors().col(kept[j]);
  }
  if (cloud.has_normals()) {
    normals = Normals(3, n);
    for (Eigen::Index j = 0; j < n; ++j) normals->col(j) = cloud.normals().col(kept[j]);
  }
  return PointCloud(std::move(points), std::move(colors), std::move(normals), depth);
}

PointCloud normalize_unit(const PointCloud& cloud) {
  if (!cloud.precision()) throw UsageError("normalize_unit requires a coordinate precision");
  const double peak = peak_value(*cloud.precision());
  std::optional<Colors> colors;
  std::optional<Normals> normals;
  if (cloud.has_colors()) colors = cloud.colors();
  if (cloud.has_normals()) normals = cloud.normals();
  return PointCloud(cloud.points() / peak, std::move(colors), std::move(normals),
                    cloud.precision())
      .as_continuous();
}

double point_count_ratio(const PointCloud& reference, const PointCloud& degraded) {
  if (reference.empty() || degraded.empty()) {
    throw UsageError("point_count_ratio requires non-empty clouds");
  }
  return static_cast<double>(degraded.size()) / static_cast<double>(reference.size());
}

}  // namespace cloudgauge
