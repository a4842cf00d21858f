// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLOUDGAUGE_SPATIAL_INDEX_HPP
#define CLOUDGAUGE_SPATIAL_INDEX_HPP

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "cloudgauge/point_cloud.hpp"

namespace cloudgauge {

/// Pairing of a query point with a point of the indexed cloud.
///
/// `error_vector` is (matched point - query point) and `squared_distance` its
/// squared norm. `source_index` is the caller-supplied index of the query
/// (-1 when the query is not a cloud point).
struct Correspondence {
  Eigen::Index source_index = -1;
  Eigen::Index target_index = -1;
  Eigen::Vector3d error_vector = Eigen::Vector3d::Zero();
  double squared_distance = 0.0;
};

/// Exact nearest-neighbour structure (kd-tree) over an immutable copy of a
/// cloud's positions. Results equal an exhaustive scan: distances are
/// compared as (squared distance, point index), so ties go to the lowest
/// index. Const queries are safe from any number of threads.
class SpatialIndex {
 public:
  explicit SpatialIndex(const PointCloud& cloud);
  explicit SpatialIndex(const Points& points);

  Eigen::Index source_size() const noexcept { return points_.cols(); }
  const Points& points() const noexcept { return source_; }

  Correspondence nearest(const Eigen::Vector3d& query, Eigen::Index source_index = -1) const;

  /// min(k, source_size()) neighbours in ascending (distance, index) order.
  std::vector<Correspondence> k_nearest(const Eigen::Vector3d& query, Eigen::Index k,
                                        Eigen::Index source_index = -1) const;

  /// Every point with distance <= radius, ascending (distance, index).
  std::vector<Correspondence> radius_search(const Eigen::Vector3d& query, double radius,
                                            Eigen::Index source_index = -1) const;

 private:
  struct Node {
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = -1;
    double split = 0.0;
  };

  struct Candidate {
    double distance;
    Eigen::Index index;
    friend bool operator<(const Candidate& a, const Candidate& b) {
      return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
    }
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search_nearest(std::int32_t node, const Eigen::Vector3d& q, Candidate& best) const;
  void search_k(std::int32_t node, const Eigen::Vector3d& q, std::size_t k,
                std::vector<Candidate>& heap) const;
  void search_radius(std::int32_t node, const Eigen::Vector3d& q, double r2,
                     std::vector<Candidate>& out) const;
  Correspondence make(const Eigen::Vector3d& q, const Candidate& c, Eigen::Index source) const;

  Points source_;                     // original order
  Points points_;                     // tree order
  std::vector<Eigen::Index> order_;   // tree slot -> original index
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;
};

}  // namespace cloudgauge

#endif  // CLOUDGAUGE_SPATIAL_INDEX_HPP
