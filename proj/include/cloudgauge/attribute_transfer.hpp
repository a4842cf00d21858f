// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLOUDGAUGE_ATTRIBUTE_TRANSFER_HPP
#define CLOUDGAUGE_ATTRIBUTE_TRANSFER_HPP

#include <Eigen/Core>

#include "cloudgauge/point_cloud.hpp"
#include "cloudgauge/spatial_index.hpp"

namespace cloudgauge {

struct RecolorOptions {
  /// 1 copies the nearest reference colour; larger values average the k
  /// nearest colours (rounded per channel).
  Eigen::Index neighbours = 1;
};

/// Gives every degraded point the colour of its nearest reference point
/// (lowest index on ties). Geometry and normals of `degraded` are unchanged.
PointCloud recolor(const PointCloud& reference, const PointCloud& degraded,
                   const RecolorOptions& options = {});
PointCloud recolor(const PointCloud& reference, const SpatialIndex& reference_index,
                   const PointCloud& degraded, const RecolorOptions& options = {});

}  // namespace cloudgauge

#endif  // CLOUDGAUGE_ATTRIBUTE_TRANSFER_HPP
