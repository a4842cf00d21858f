// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLOUDGAUGE_POINT_CLOUD_HPP
#define CLOUDGAUGE_POINT_CLOUD_HPP

#include <Eigen/Core>
#include <cstdint>
#include <optional>

namespace cloudgauge {

using Points = Eigen::Matrix3Xd;
using Normals = Eigen::Matrix3Xd;
using Colors = Eigen::Matrix<std::uint8_t, 3, Eigen::Dynamic>;

/// Tolerance on the Euclidean length of a stored unit normal.
inline constexpr double kUnitNormalTolerance = 1e-6;

/// Peak grid value P = 2^pr - 1 for a coordinate precision pr.
inline double peak_value(int precision) {
  return static_cast<double>((std::uint64_t{1} << precision) - 1);
}

/// An immutable set of 3D points with optional per-point colors and normals.
///
/// Points are stored column-wise. A normal column is either unit length or
/// exactly zero; a zero column marks a point without a usable normal.
/// `precision()` is the bit depth pr of the coordinate grid [0, 2^pr - 1];
/// `voxelized()` is true when precision is set and every coordinate is an
/// integer inside that grid.
class PointCloud {
 public:
  PointCloud() = default;
  explicit PointCloud(Points points, std::optional<int> precision = std::nullopt);
  PointCloud(Points points, std::optional<Colors> colors, std::optional<Normals> normals,
             std::optional<int> precision);

  Eigen::Index size() const noexcept { return points_.cols(); }
  bool empty() const noexcept { return points_.cols() == 0; }

  const Points& points() const noexcept { return points_; }
  Eigen::Vector3d point(Eigen::Index i) const { return points_.col(i); }

  bool has_colors() const noexcept { return colors_.has_value(); }
  const Colors& colors() const;

  bool has_normals() const noexcept { return normals_.has_value(); }
  const Normals& normals() const;

  std::optional<int> precision() const noexcept { return precision_; }
  bool voxelized() const noexcept { return voxelized_; }

  PointCloud with_colors(Colors colors) const;
  PointCloud with_normals(Normals normals) const;
  PointCloud with_precision(std::optional<int> precision) const;
  PointCloud without_attributes() const;

  /// Same cloud with the voxelized flag cleared, as produced by normalize_unit.
  PointCloud as_continuous() const;

  friend bool operator==(const PointCloud& a, const PointCloud& b);

 private:
  void validate();

  Points points_;
  std::optional<Colors> colors_;
  std::optional<Normals> normals_;
  std::optional<int> precision_;
  bool voxelized_ = false;
};

/// Axis-aligned cube with minimum corner `origin`.
struct BoundingCube {
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  double side = 1.0;
};

/// Smallest pr with 2^pr - 1 >= max coordinate, for clouds whose coordinates
/// are all non-negative integers; nullopt otherwise.
std::optional<int> infer_precision(const Points& points);

/// Per-axis minimum corner and the largest per-axis extent. A cloud whose
/// points all coincide gets a side of one grid unit.
BoundingCube bounding_cube(const PointCloud& cloud);

/// Maps the bounding cube affinely onto the integer grid [0, 2^depth - 1]^3,
/// rounds, and merges duplicates keeping the first occurrence's attributes.
PointCloud voxelize(const PointCloud& cloud, int depth);

/// Divides every coordinate by P = 2^pr - 1.
PointCloud normalize_unit(const PointCloud& cloud);

/// |degraded| / |reference|.
double point_count_ratio(const PointCloud& reference, const PointCloud& degraded);

}  // namespace cloudgauge

#endif  // CLOUDGAUGE_POINT_CLOUD_HPP
