// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

#include "cloudgauge/attribute_transfer.hpp"

#include <cmath>

#include "cloudgauge/error.hpp"
#include "cloudgauge/parallel.hpp"

namespace cloudgauge {

PointCloud recolor(const PointCloud& reference, const PointCloud& degraded,
                   const RecolorOptions& options) {
  if (reference.empty()) throw UsageError("recolor: empty reference cloud");
  return recolor(reference, SpatialIndex(reference), degraded, options);
}

PointCloud recolor(const PointCloud& reference, const SpatialIndex& reference_index,
                   const PointCloud& degraded, const RecolorOptions& options) {
  if (!reference.has_colors()) throw UsageError("recolor: reference cloud has no colors");
  if (reference.empty() || degraded.empty()) throw UsageError("recolor: empty cloud");
  if (options.neighbours < 1) throw UsageError("recolor: neighbours must be >= 1");

  const Colors& source = reference.colors();
  Colors colors(3, degraded.size());
  parallel_for(static_cast<std::size_t>(degraded.size()), [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      const auto i = static_cast<Eigen::Index>(s);
      if (options.neighbours == 1) {
        colors.col(i) = source.col(reference_index.nearest(degraded.point(i)).target_index);
        continue;
      }
      const auto hits = reference_index.k_nearest(degraded.point(i), options.neighbours);
      Eigen::Vector3d sum = Eigen::Vector3d::Zero();
      for (const auto& c : hits) sum += source.col(c.target_index).cast<double>();
      sum /= static_cast<double>(hits.size());
      colors.col(i) = sum.array().round().cwiseMin(255.0).cast<std::uint8_t>().matrix();
    }
  });
  return degraded.with_colors(std::move(colors));
}

}  // namespace cloudgauge
