// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLOUDGAUGE_GEOMETRY_METRICS_HPP
#define CLOUDGAUGE_GEOMETRY_METRICS_HPP

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cloudgauge/error.hpp"
#include "cloudgauge/normal_estimation.hpp"
#include "cloudgauge/point_cloud.hpp"
#include "cloudgauge/spatial_index.hpp"

namespace cloudgauge {

enum class Direction { kReferenceToDegraded, kDegradedToReference };

std::string_view to_string(Direction d);

/// Per-point values of one metric family in one direction, in source point
/// order. For point-to-point and point-to-plane these are squared distances;
/// for plane-to-plane they are angular similarities in [0, 1]. Points without
/// a usable normal are left out and counted in `skipped_count`.
struct DirectionalErrors {
  Direction direction = Direction::kReferenceToDegraded;
  std::vector<double> values;
  Eigen::Index skipped_count = 0;

  Eigen::Index valid_count() const noexcept { return static_cast<Eigen::Index>(values.size()); }
};

/// Which normal the point-to-plane error is projected on.
enum class ProjectionNormal {
  /// Reference->degraded uses the reference point's own normal;
  /// degraded->reference averages the normals of the k_avg nearest reference
  /// points.
  kSourceSide,
  /// Both directions use the normal of the matched point in the other cloud
  /// (needs normals on the degraded cloud).
  kMatchedPoint,
};

// -- pooling ---------------------------------------------------------------

double pool_mse(const DirectionalErrors& errors);
double pool_haus(const DirectionalErrors& errors);

struct AngularPooling {
  double mad = 0.0;
  double msad = 0.0;
  double rmsad = 0.0;
};
AngularPooling pool_angular(const DirectionalErrors& errors);

/// 10 log10(3 P^2 / mse) with P = 2^pr - 1, for an mse in grid units.
/// Identical clouds (mse == 0) give +infinity.
template <typename Scalar>
Scalar psnr_db(Scalar mse_grid_units, int precision) {
  if (mse_grid_units < Scalar(0) || std::isnan(mse_grid_units)) {
    throw NumericError("psnr_db: negative or NaN mse");
  }
  if (mse_grid_units == Scalar(0)) return std::numeric_limits<Scalar>::infinity();
  const Scalar peak = static_cast<Scalar>(peak_value(precision));
  return Scalar(10) * std::log10(Scalar(3) * peak * peak / mse_grid_units);
}

/// 1 - 2 acos(|cos theta|) / pi for two (not necessarily unit) normals.
double plane_similarity(const Eigen::Vector3d& a, const Eigen::Vector3d& b);

// -- per-direction errors --------------------------------------------------

/// Squared distance from every source point to its nearest neighbour in the
/// other cloud. Coordinates are used as given.
DirectionalErrors po2point_errors(const PointCloud& reference, const PointCloud& degraded,
                                  Direction direction);

/// Squared projection of the nearest-neighbour error vector on a normal.
/// Throws when no source point has a usable projection normal.
DirectionalErrors po2plane_errors(const PointCloud& reference, const PointCloud& degraded,
                                  const NormalField& reference_normals, Direction direction,
                                  Eigen::Index k_avg = 3,
                                  ProjectionNormal projection = ProjectionNormal::kSourceSide,
                                  const NormalField* degraded_normals = nullptr);

/// Angular similarity of the normals of each correspondence.
DirectionalErrors pl2plane_errors(const PointCloud& reference, const PointCloud& degraded,
                                  const NormalField& reference_normals,
                                  const NormalField& degraded_normals, Direction direction);

// -- full comparison -------------------------------------------------------

struct PointMetrics {
  double mse = 0.0;
  double haus = 0.0;
  /// +infinity when the grid-scale mse is zero.
  double psnr_db = 0.0;
};

template <typename Pooled>
struct FamilyMetrics {
  Pooled reference_to_degraded;
  Pooled degraded_to_reference;
  Pooled symmetric;
  Eigen::Index skipped_reference_to_degraded = 0;
  Eigen::Index skipped_degraded_to_reference = 0;
};

struct MetricReport {
  std::optional<FamilyMetrics<PointMetrics>> po2point;
  std::optional<FamilyMetrics<PointMetrics>> po2plane;
  std::optional<FamilyMetrics<AngularPooling>> pl2plane;
  double num_points_ratio = 1.0;
  Eigen::Index reference_points = 0;
  Eigen::Index degraded_points = 0;
  int precision = 0;
  double peak = 0.0;
  bool normalized = true;
};

struct CompareOptions {
  bool po2point = true;
  bool po2plane = true;
  bool pl2plane = true;
  /// Reference precision override; otherwise the reference cloud's own.
  std::optional<int> precision;
  /// Divide both clouds by P before MSE/HAUS/plane-to-plane (PSNR always
  /// uses grid units).
  bool normalize = true;
  Eigen::Index k_avg = 3;
  ProjectionNormal projection = ProjectionNormal::kSourceSide;
  /// A direction whose share of skipped points exceeds this is an error.
  double max_skipped_fraction = 0.10;
  NormalEstimationOptions normals;
};

/// Both directions of every selected family plus symmetric pooling: max for
/// MSE/HAUS, min for PSNR and the plane-to-plane similarities. Normals are
/// estimated when needed and not supplied.
MetricReport compare(const PointCloud& reference, const PointCloud& degraded,
                     const CompareOptions& options = {},
                     const NormalField* reference_normals = nullptr,
                     const NormalField* degraded_normals = nullptr);

// -- histograms ------------------------------------------------------------

struct Histogram {
  std::vector<double> edges;  // bins + 1 edges
  std::vector<std::uint64_t> counts;
};

/// Equal-width histogram of sqrt(value) over [0, max].
Histogram error_histogram(const DirectionalErrors& errors, int bins);

}  // namespace cloudgauge

#endif  // CLOUDGAUGE_GEOMETRY_METRICS_HPP
