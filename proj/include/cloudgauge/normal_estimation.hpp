// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLOUDGAUGE_NORMAL_ESTIMATION_HPP
#define CLOUDGAUGE_NORMAL_ESTIMATION_HPP

#include <Eigen/Core>
#include <vector>

#include "cloudgauge/point_cloud.hpp"
#include "cloudgauge/spatial_index.hpp"

namespace cloudgauge {

struct NormalEstimationOptions {
  /// Neighbourhood radius = multiplier * mean nearest-distinct-neighbour distance.
  double radius_multiplier = 4.0;
  /// Number of points sampled (by fixed stride) for the mean distance.
  Eigen::Index radius_sample_limit = 10'000;
  /// Neighbour count used when the radius ball holds fewer than 3 points.
  Eigen::Index fallback_k = 8;
  /// Neighbour count of the orientation graph.
  Eigen::Index orientation_k = 8;
  bool orient = true;
};

/// Per-point normals. Invalid entries hold a zero vector and are false in
/// `valid`.
struct NormalField {
  Normals normals;
  std::vector<bool> valid;
  double radius = 0.0;
  /// One seed per connected component of the orientation graph (empty when
  /// the field has not been oriented).
  std::vector<Eigen::Index> seeds;

  Eigen::Index size() const noexcept { return normals.cols(); }
  Eigen::Index valid_count() const;
  bool is_valid(Eigen::Index i) const { return valid[static_cast<std::size_t>(i)]; }

  /// Builds a field from stored normals; zero columns become invalid entries.
  static NormalField from_normals(const Normals& normals);
};

double auto_radius(const PointCloud& cloud, const SpatialIndex& index,
                   double multiplier = 4.0, Eigen::Index sample_limit = 10'000);
double auto_radius(const PointCloud& cloud, double multiplier = 4.0,
                   Eigen::Index sample_limit = 10'000);

/// Unoriented normals from the smallest-eigenvalue eigenvector of the
/// neighbourhood covariance (point included). Falls back to k nearest
/// neighbours when the ball holds fewer than 3 points; points whose
/// neighbourhood is collinear are marked invalid.
NormalField estimate_normals(const PointCloud& cloud, const SpatialIndex& index, double radius,
                             Eigen::Index fallback_k = 8);
NormalField estimate_normals(const PointCloud& cloud, double radius, Eigen::Index fallback_k = 8);

/// Consistent orientation by propagation along a minimum spanning tree of the
/// symmetrised k-NN graph over valid points, weighted 1 - |n_i . n_j|. Each
/// component is seeded at its highest-z point (lowest index on ties) whose
/// normal is turned towards +z.
NormalField orient_normals(const PointCloud& cloud, const NormalField& field,
                           Eigen::Index k = 8);

/// auto_radius + estimate_normals (+ orient_normals).
NormalField compute_normals(const PointCloud& cloud, const NormalEstimationOptions& options = {});

}  // namespace cloudgauge

#endif  // CLOUDGAUGE_NORMAL_ESTIMATION_HPP
