// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

#include "cloudgauge/geometry_metrics.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <numbers>
#include <string>

#include "cloudgauge/parallel.hpp"

namespace cloudgauge {

namespace {

using Match = std::vector<Eigen::Index>;

Match match_all(const Points& source, const SpatialIndex& target) {
  Match match(static_cast<std::size_t>(source.cols()));
  parallel_for(match.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      match[s] = target.nearest(source.col(static_cast<Eigen::Index>(s))).target_index;
    }
  });
  return match;
}

DirectionalErrors po2point_from(const Points& source, const Points& target, const Match& match,
                                Direction direction) {
  DirectionalErrors out;
  out.direction = direction;
  out.values.resize(match.size());
  parallel_for(match.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      const auto i = static_cast<Eigen::Index>(s);
      out.values[s] = (target.col(match[s]) - source.col(i)).squaredNorm();
    }
  });
  return out;
}

// Projection normal per source point; zero columns mark points to skip.
Normals projection_normals(const Points& source, const Match& match, Direction direction,
                           ProjectionNormal projection, const NormalField& reference_normals,
                           const NormalField* degraded_normals, const SpatialIndex& reference_index,
                           Eigen::Index k_avg) {
  const auto n = static_cast<Eigen::Index>(match.size());
  Normals normals = Normals::Zero(3, n);
  const bool forward = direction == Direction::kReferenceToDegraded;

  if (projection == ProjectionNormal::kMatchedPoint) {
    const NormalField* field = forward ? degraded_normals : &reference_normals;
    if (field == nullptr) {
      throw UsageError("matched-point projection needs normals on the degraded cloud");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      const Eigen::Index j = match[static_cast<std::size_t>(i)];
      if (field->is_valid(j)) normals.col(i) = field->normals.col(j);
    }
    return normals;
  }

  if (forward) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (reference_normals.is_valid(i)) normals.col(i) = reference_normals.normals.col(i);
    }
    return normals;
  }

  if (k_avg < 1) throw UsageError("k_avg must be >= 1");
  parallel_for(match.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      const auto i = static_cast<Eigen::Index>(s);
      Eigen::Vector3d sum = Eigen::Vector3d::Zero();
      for (const auto& c : reference_index.k_nearest(source.col(i), k_avg)) {
        if (reference_normals.is_valid(c.target_index)) {
          sum += reference_normals.normals.col(c.target_index);
        }
      }
      const double len = sum.norm();
      if (len > 0.0) normals.col(i) = sum / len;
    }
  });
  return normals;
}

DirectionalErrors po2plane_from(const Points& source, const Points& target, const Match& match,
                                const Normals& normals, Direction direction) {
  DirectionalErrors out;
  out.direction = direction;
  out.values.reserve(match.size());
  for (std::size_t s = 0; s < match.size(); ++s) {
    const auto i = static_cast<Eigen::Index>(s);
    const auto n = normals.col(i);
    if (n.squaredNorm() == 0.0) {
      ++out.skipped_count;
      continue;
    }
    const double projected = (target.col(match[s]) - source.col(i)).dot(n);
    out.values.push_back(projected * projected);
  }
  return out;
}

DirectionalErrors pl2plane_from(const NormalField& source_normals,
                                const NormalField& target_normals, const Match& match,
                                Direction direction) {
  DirectionalErrors out;
  out.direction = direction;
  out.values.reserve(match.size());
  for (std::size_t s = 0; s < match.size(); ++s) {
    const auto i = static_cast<Eigen::Index>(s);
    const Eigen::Index j = match[s];
    if (!source_normals.is_valid(i) || !target_normals.is_valid(j)) {
      ++out.skipped_count;
      continue;
    }
    out.values.push_back(plane_similarity(source_normals.normals.col(i), target_normals.normals.col(j)));
  }
  return out;
}

void check_skipped(const DirectionalErrors& e, double max_fraction, std::string_view family) {
  const double total = static_cast<double>(e.valid_count() + e.skipped_count);
  if (e.valid_count() == 0) {
    throw DataError(std::string(family) + " " + std::string(to_string(e.direction)) +
                    ": no point has a usable normal");
  }
  if (static_cast<double>(e.skipped_count) > max_fraction * total) {
    throw DataError(std::string(family) + " " + std::string(to_string(e.direction)) + ": " +
                    std::to_string(e.skipped_count) + " of " +
                    std::to_string(static_cast<long long>(total)) +
                    " points lack a usable normal");
  }
}

void require_nonempty(const PointCloud& reference, const PointCloud& degraded) {
  if (reference.empty() || degraded.empty()) throw UsageError("metrics need non-empty clouds");
}

const Points& source_of(const PointCloud& r, const PointCloud& t, Direction d) {
  return d == Direction::kReferenceToDegraded ? r.points() : t.points();
}
const Points& target_of(const PointCloud& r, const PointCloud& t, Direction d) {
  return d == Direction::kReferenceToDegraded ? t.points() : r.points();
}

PointMetrics pool_points(const DirectionalErrors& scaled, const DirectionalErrors& grid,
                         int precision) {
  return PointMetrics{pool_mse(scaled), pool_haus(scaled), psnr_db(pool_mse(grid), precision)};
}

PointMetrics symmetric_points(const PointMetrics& a, const PointMetrics& b) {
  return PointMetrics{std::max(a.mse, b.mse), std::max(a.haus, b.haus),
                      std::min(a.psnr_db, b.psnr_db)};
}

AngularPooling symmetric_angular(const AngularPooling& a, const AngularPooling& b) {
  return AngularPooling{std::min(a.mad, b.mad), std::min(a.msad, b.msad),
                        std::min(a.rmsad, b.rmsad)};
}

}  // namespace

std::string_view to_string(Direction d) {
  return d == Direction::kReferenceToDegraded ? "reference_to_degraded" : "degraded_to_reference";
}

double pool_mse(const DirectionalErrors& errors) {
  if (errors.values.empty()) throw NumericError("pool_mse: no valid entries");
  return pairwise_sum(errors.values) / static_cast<double>(errors.values.size());
}

double pool_haus(const DirectionalErrors& errors) {
  if (errors.values.empty()) throw NumericError("pool_haus: no valid entries");
  return *std::max_element(errors.values.begin(), errors.values.end());
}

AngularPooling pool_angular(const DirectionalErrors& errors) {
  if (errors.values.empty()) throw NumericError("pool_angular: no valid entries");
  std::vector<double> squares(errors.values.size());
  std::transform(errors.values.begin(), errors.values.end(), squares.begin(),
                 [](double v) { return v * v; });
  const auto n = static_cast<double>(errors.values.size());
  AngularPooling p;
  p.mad = pairwise_sum(errors.values) / n;
  p.msad = pairwise_sum(squares) / n;
  p.rmsad = std::sqrt(p.msad);
  return p;
}

// atan2 of |a x b| and |a . b| is acos(|cs|) without the loss of accuracy of
// acos near 1; parallel normals give exactly 1.
double plane_similarity(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double angle = std::atan2(a.cross(b).norm(), std::abs(a.dot(b)));
  return 1.0 - 2.0 * angle / std::numbers::pi;
}

DirectionalErrors po2point_errors(const PointCloud& reference, const PointCloud& degraded,
                                  Direction direction) {
  require_nonempty(reference, degraded);
  const Points& source = source_of(reference, degraded, direction);
  const Points& target = target_of(reference, degraded, direction);
  const Match match = match_all(source, SpatialIndex(target));
  return po2point_from(source, target, match, direction);
}

DirectionalErrors po2plane_errors(const PointCloud& reference, const PointCloud& degraded,
                                  const NormalField& reference_normals, Direction direction,
                                  Eigen::Index k_avg, ProjectionNormal projection,
                                  const NormalField* degraded_normals) {
  require_nonempty(reference, degraded);
  if (reference_normals.size() != reference.size()) {
    throw UsageError("reference normals do not match the reference cloud");
  }
  const Points& source = source_of(reference, degraded, direction);
  const Points& target = target_of(reference, degraded, direction);
  const SpatialIndex reference_index(reference);
  const SpatialIndex degraded_index(degraded);
  const SpatialIndex& target_index =
      direction == Direction::kReferenceToDegraded ? degraded_index : reference_index;
  const Match match = match_all(source, target_index);
  const Normals normals = projection_normals(source, match, direction, projection,
                                             reference_normals, degraded_normals,
                                             reference_index, k_avg);
  DirectionalErrors out = po2plane_from(source, target, match, normals, direction);
  if (out.values.empty()) throw DataError("po2plane: no point has a usable normal");
  return out;
}

DirectionalErrors pl2plane_errors(const PointCloud& reference, const PointCloud& degraded,
                                  const NormalField& reference_normals,
                                  const NormalField& degraded_normals, Direction direction) {
  require_nonempty(reference, degraded);
  if (reference_normals.size() != reference.size() || degraded_normals.size() != degraded.size()) {
    throw UsageError("normal fields do not match the clouds");
  }
  const bool forward = direction == Direction::kReferenceToDegraded;
  const Points& source = source_of(reference, degraded, direction);
  const Points& target = target_of(reference, degraded, direction);
  const Match match = match_all(source, SpatialIndex(target));
  DirectionalErrors out = forward ? pl2plane_from(reference_normals, degraded_normals, match, direction)
                                  : pl2plane_from(degraded_normals, reference_normals, match, direction);
  if (out.values.empty()) {
    throw DataError("pl2plane " + std::string(to_string(direction)) +
                    ": no correspondence has two usable normals");
  }
  return out;
}

MetricReport compare(const PointCloud& reference, const PointCloud& degraded,
                     const CompareOptions& options, const NormalField* reference_normals,
                     const NormalField* degraded_normals) {
  require_nonempty(reference, degraded);
  const std::optional<int> precision = options.precision ? options.precision : reference.precision();
  if (!precision) {
    throw UsageError("reference precision is unknown; supply it explicitly");
  }

  MetricReport report;
  report.precision = *precision;
  report.peak = peak_value(*precision);
  report.normalized = options.normalize;
  report.reference_points = reference.size();
  report.degraded_points = degraded.size();
  report.num_points_ratio = point_count_ratio(reference, degraded);

  const double scale = options.normalize ? 1.0 / report.peak : 1.0;
  const Points ref_scaled = reference.points() * scale;
  const Points deg_scaled = degraded.points() * scale;

  const SpatialIndex reference_index(reference);
  const SpatialIndex degraded_index(degraded);
  const Match forward = match_all(reference.points(), degraded_index);
  const Match backward = match_all(degraded.points(), reference_index);

  constexpr Direction kRT = Direction::kReferenceToDegraded;
  constexpr Direction kTR = Direction::kDegradedToReference;

  if (options.po2point) {
    FamilyMetrics<PointMetrics> f;
    f.reference_to_degraded =
        pool_points(po2point_from(ref_scaled, deg_scaled, forward, kRT),
                    po2point_from(reference.points(), degraded.points(), forward, kRT), report.precision);
    f.degraded_to_reference =
        pool_points(po2point_from(deg_scaled, ref_scaled, backward, kTR),
                    po2point_from(degraded.points(), reference.points(), backward, kTR), report.precision);
    f.symmetric = symmetric_points(f.reference_to_degraded, f.degraded_to_reference);
    report.po2point = f;
  }

  const bool need_reference_normals = options.po2plane || options.pl2plane;
  const bool need_degraded_normals =
      options.pl2plane || (options.po2plane && options.projection == ProjectionNormal::kMatchedPoint);
  NormalField own_reference;
  NormalField own_degraded;
  if (need_reference_normals && reference_normals == nullptr) {
    own_reference = compute_normals(reference, options.normals);
    reference_normals = &own_reference;
  }
  if (need_degraded_normals && degraded_normals == nullptr) {
    own_degraded = compute_normals(degraded, options.normals);
    degraded_normals = &own_degraded;
  }
  if (reference_normals != nullptr && reference_normals->size() != reference.size()) {
    throw UsageError("reference normals do not match the reference cloud");
  }
  if (degraded_normals != nullptr && degraded_normals->size() != degraded.size()) {
    throw UsageError("degraded normals do not match the degraded cloud");
  }

  if (options.po2plane) {
    const Normals n_rt = projection_normals(reference.points(), forward, kRT, options.projection,
                                            *reference_normals, degraded_normals, reference_index,
                                            options.k_avg);
    const Normals n_tr = projection_normals(degraded.points(), backward, kTR, options.projection,
                                            *reference_normals, degraded_normals, reference_index,
                                            options.k_avg);
    const DirectionalErrors rt = po2plane_from(ref_scaled, deg_scaled, forward, n_rt, kRT);
    const DirectionalErrors tr = po2plane_from(deg_scaled, ref_scaled, backward, n_tr, kTR);
    check_skipped(rt, options.max_skipped_fraction, "po2plane");
    check_skipped(tr, options.max_skipped_fraction, "po2plane");

    FamilyMetrics<PointMetrics> f;
    f.reference_to_degraded = pool_points(
        rt, po2plane_from(reference.points(), degraded.points(), forward, n_rt, kRT), report.precision);
    f.degraded_to_reference = pool_points(
        tr, po2plane_from(degraded.points(), reference.points(), backward, n_tr, kTR), report.precision);
    f.symmetric = symmetric_points(f.reference_to_degraded, f.degraded_to_reference);
    f.skipped_reference_to_degraded = rt.skipped_count;
    f.skipped_degraded_to_reference = tr.skipped_count;
    report.po2plane = f;
  }

  if (options.pl2plane) {
    const DirectionalErrors rt = pl2plane_from(*reference_normals, *degraded_normals, forward, kRT);
    const DirectionalErrors tr = pl2plane_from(*degraded_normals, *reference_normals, backward, kTR);
    check_skipped(rt, options.max_skipped_fraction, "pl2plane");
    check_skipped(tr, options.max_skipped_fraction, "pl2plane");

    FamilyMetrics<AngularPooling> f;
    f.reference_to_degraded = pool_angular(rt);
    f.degraded_to_reference = pool_angular(tr);
    f.symmetric = symmetric_angular(f.reference_to_degraded, f.degraded_to_reference);
    f.skipped_reference_to_degraded = rt.skipped_count;
    f.skipped_degraded_to_reference = tr.skipped_count;
    report.pl2plane = f;
  }
  return report;
}

Histogram error_histogram(const DirectionalErrors& errors, int bins) {
  if (bins < 1) throw UsageError("histogram needs at least one bin");
  if (errors.values.empty()) throw UsageError("histogram of an empty error list");
  std::vector<double> rmse(errors.values.size());
  std::transform(errors.values.begin(), errors.values.end(), rmse.begin(),
                 [](double v) { return std::sqrt(v); });
  const double top = *std::max_element(rmse.begin(), rmse.end());
  const double width = top / bins;

  Histogram h;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b) h.edges[static_cast<std::size_t>(b)] = width * b;
  h.edges.back() = top;
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  for (const double v : rmse) {
    std::size_t b = 0;
    if (width > 0.0) b = std::min(static_cast<std::size_t>(v / width), static_cast<std::size_t>(bins) - 1);
    ++h.counts[b];
  }
  return h;
}

}  // namespace cloudgauge
