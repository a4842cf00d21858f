// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

// Shared generators and exhaustive-search oracles for the test programs.

#ifndef CLOUDGAUGE_TESTS_SUPPORT_HPP
#define CLOUDGAUGE_TESTS_SUPPORT_HPP

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "cloudgauge/geometry_metrics.hpp"
#include "cloudgauge/normal_estimation.hpp"
#include "cloudgauge/point_cloud.hpp"

namespace testsupport {

using cloudgauge::Normals;
using cloudgauge::PointCloud;
using cloudgauge::Points;

/// Uniform integer grid points in [0, 2^precision - 1], duplicates allowed.
inline Points random_grid_points(std::mt19937_64& rng, Eigen::Index n, int precision) {
  std::uniform_int_distribution<int> coord(0, (1 << precision) - 1);
  Points p(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int a = 0; a < 3; ++a) p(a, i) = coord(rng);
  }
  return p;
}

/// Distinct integer grid points, optionally concentrated in a sub-box to mix
/// densities.
inline Points random_distinct_grid_points(std::mt19937_64& rng, Eigen::Index n, int precision,
                                          int box = 0) {
  const int extent = box > 0 ? box : (1 << precision);
  std::uniform_int_distribution<int> coord(0, extent - 1);
  std::set<std::tuple<int, int, int>> seen;
  Points p(3, n);
  Eigen::Index i = 0;
  while (i < n) {
    const auto key = std::tuple{coord(rng), coord(rng), coord(rng)};
    if (!seen.insert(key).second) continue;
    p.col(i++) << std::get<0>(key), std::get<1>(key), std::get<2>(key);
  }
  return p;
}

inline Points random_real_points(std::mt19937_64& rng, Eigen::Index n, double lo, double hi) {
  std::uniform_real_distribution<double> coord(lo, hi);
  Points p(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int a = 0; a < 3; ++a) p(a, i) = coord(rng);
  }
  return p;
}

inline Normals random_unit_normals(std::mt19937_64& rng, Eigen::Index n) {
  std::normal_distribution<double> g;
  Normals out(3, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Vector3d v;
    do {
      v = Eigen::Vector3d(g(rng), g(rng), g(rng));
    } while (v.norm() < 1e-3);
    out.col(i) = v.normalized();
  }
  return out;
}

/// Exhaustive nearest neighbour with lowest-index tie-break.
inline Eigen::Index brute_nearest(const Points& target, const Eigen::Vector3d& q) {
  Eigen::Index best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < target.cols(); ++j) {
    const double d = (target.col(j) - q).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

/// Exhaustive k-NN: indices sorted by (distance, index).
inline std::vector<Eigen::Index> brute_k_nearest(const Points& target, const Eigen::Vector3d& q,
                                                 Eigen::Index k) {
  std::vector<std::pair<double, Eigen::Index>> all;
  for (Eigen::Index j = 0; j < target.cols(); ++j) all.emplace_back((target.col(j) - q).squaredNorm(), j);
  std::sort(all.begin(), all.end());
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(k, target.cols()); ++i) {
    out.push_back(all[static_cast<std::size_t>(i)].second);
  }
  return out;
}

inline double relative_difference(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

/// Direct evaluation of every metric with exhaustive search, long double
/// accumulation and a plain acos. Normals are given (all valid).
struct OracleDirection {
  long double mse = 0;
  long double haus = 0;
  long double mse_grid = 0;
  long double plane_mse = 0;
  long double plane_haus = 0;
  long double plane_mse_grid = 0;
  long double mad = 0;
  long double msad = 0;
};

inline OracleDirection oracle_direction(const Points& source, const Points& target,
                                        const Normals& source_normals, const Normals& target_normals,
                                        const Points& reference, const Normals& reference_normals,
                                        bool forward, Eigen::Index k_avg, double peak) {
  OracleDirection o;
  const auto n = source.cols();
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index j = brute_nearest(target, source.col(i));
    const Eigen::Vector3d e = target.col(j) - source.col(i);
    const Eigen::Vector3d e_scaled = target.col(j) / peak - source.col(i) / peak;
    const long double d2 = e.squaredNorm();
    const long double d2s = e_scaled.squaredNorm();
    o.mse += d2s;
    o.mse_grid += d2;
    o.haus = std::max(o.haus, d2s);

    Eigen::Vector3d normal;
    if (forward) {
      normal = reference_normals.col(i);
    } else {
      Eigen::Vector3d sum = Eigen::Vector3d::Zero();
      for (Eigen::Index r : brute_k_nearest(reference, source.col(i), k_avg)) sum += reference_normals.col(r);
      normal = sum.normalized();
    }
    const long double p = e.dot(normal);
    const long double ps = e_scaled.dot(normal);
    o.plane_mse += ps * ps;
    o.plane_mse_grid += p * p;
    o.plane_haus = std::max(o.plane_haus, ps * ps);

    const Eigen::Vector3d a = source_normals.col(i);
    const Eigen::Vector3d b = target_normals.col(j);
    const long double cs = std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0);
    const long double sim = 1.0L - 2.0L * std::acos(std::abs(static_cast<double>(cs))) /
                                       std::numbers::pi_v<long double>;
    o.mad += sim;
    o.msad += sim * sim;
  }
  o.mse /= n;
  o.mse_grid /= n;
  o.plane_mse /= n;
  o.plane_mse_grid /= n;
  o.mad /= n;
  o.msad /= n;
  return o;
}

inline double oracle_psnr(long double mse_grid, int precision) {
  const long double peak = static_cast<long double>((std::uint64_t{1} << precision) - 1);
  if (mse_grid == 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(10.0L * std::log10(3.0L * peak * peak / mse_grid));
}

}  // namespace testsupport

#endif  // CLOUDGAUGE_TESTS_SUPPORT_HPP
