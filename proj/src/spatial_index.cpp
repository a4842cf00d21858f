// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

#include "cloudgauge/spatial_index.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "cloudgauge/error.hpp"

namespace cloudgauge {

namespace {
constexpr std::uint32_t kLeafSize = 12;
}

SpatialIndex::SpatialIndex(const PointCloud& cloud) : SpatialIndex(cloud.points()) {}

SpatialIndex::SpatialIndex(const Points& points) : source_(points) {
  if (points.cols() == 0) throw UsageError("cannot index an empty cloud");
  if (points.cols() >= std::numeric_limits<std::int32_t>::max()) {
    throw UsageError("cloud too large to index");
  }
  order_.resize(static_cast<std::size_t>(points.cols()));
  std::iota(order_.begin(), order_.end(), Eigen::Index{0});
  nodes_.reserve(2 * order_.size() / kLeafSize + 1);
  root_ = build(0, static_cast<std::uint32_t>(order_.size()));

  points_.resize(3, points.cols());
  for (std::size_t s = 0; s < order_.size(); ++s) {
    points_.col(static_cast<Eigen::Index>(s)) = source_.col(order_[s]);
  }
}

std::int32_t SpatialIndex::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end, -1, -1, -1, 0.0});
  if (end - begin <= kLeafSize) return id;

  Eigen::Vector3d lo = source_.col(order_[begin]);
  Eigen::Vector3d hi = lo;
  for (std::uint32_t s = begin + 1; s < end; ++s) {
    lo = lo.cwiseMin(source_.col(order_[s]));
    hi = hi.cwiseMax(source_.col(order_[s]));
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all coincident

  const std::uint32_t mid = begin + (end - begin) / 2;
  auto first = order_.begin() + begin;
  std::nth_element(first, order_.begin() + mid, order_.begin() + end,
                   [&](Eigen::Index a, Eigen::Index b) {
                     const double va = source_(axis, a);
                     const double vb = source_(axis, b);
                     return va < vb || (va == vb && a < b);
                   });
  const double split = source_(axis, order_[mid]);

  nodes_[id].axis = axis;
  nodes_[id].split = split;
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

// Points left of a split have coordinate <= split, right >= split, so the
// squared axis gap is a lower bound on every distance in the far subtree.
void SpatialIndex::search_nearest(std::int32_t id, const Eigen::Vector3d& q,
                                  Candidate& best) const {
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  if (node.axis < 0) {
    for (std::uint32_t s = node.begin; s < node.end; ++s) {
      const Candidate c{(points_.col(s) - q).squaredNorm(), order_[s]};
      if (c < best) best = c;
    }
    return;
  }
  const double gap = q[node.axis] - node.split;
  const std::int32_t near = gap < 0.0 ? node.left : node.right;
  const std::int32_t far = gap < 0.0 ? node.right : node.left;
  search_nearest(near, q, best);
  if (gap * gap <= best.distance) search_nearest(far, q, best);
}

void SpatialIndex::search_k(std::int32_t id, const Eigen::Vector3d& q, std::size_t k,
                            std::vector<Candidate>& heap) const {
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  if (node.axis < 0) {
    for (std::uint32_t s = node.begin; s < node.end; ++s) {
      const Candidate c{(points_.col(s) - q).squaredNorm(), order_[s]};
      if (heap.size() < k) {
        heap.push_back(c);
        std::push_heap(heap.begin(), heap.end());
      } else if (c < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = c;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    return;
  }
  const double gap = q[node.axis] - node.split;
  const std::int32_t near = gap < 0.0 ? node.left : node.right;
  const std::int32_t far = gap < 0.0 ? node.right : node.left;
  search_k(near, q, k, heap);
  if (heap.size() < k || gap * gap <= heap.front().distance) search_k(far, q, k, heap);
}

void SpatialIndex::search_radius(std::int32_t id, const Eigen::Vector3d& q, double r2,
                                 std::vector<Candidate>& out) const {
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  if (node.axis < 0) {
    for (std::uint32_t s = node.begin; s < node.end; ++s) {
      const double d = (points_.col(s) - q).squaredNorm();
      if (d <= r2) out.push_back(Candidate{d, order_[s]});
    }
    return;
  }
  const double gap = q[node.axis] - node.split;
  const std::int32_t near = gap < 0.0 ? node.left : node.right;
  const std::int32_t far = gap < 0.0 ? node.right : node.left;
  search_radius(near, q, r2, out);
  if (gap * gap <= r2) search_radius(far, q, r2, out);
}

Correspondence SpatialIndex::make(const Eigen::Vector3d& q, const Candidate& c,
                                  Eigen::Index source) const {
  return Correspondence{source, c.index, source_.col(c.index) - q, c.distance};
}

Correspondence SpatialIndex::nearest(const Eigen::Vector3d& query,
                                     Eigen::Index source_index) const {
  Candidate best{std::numeric_limits<double>::infinity(), std::numeric_limits<Eigen::Index>::max()};
  search_nearest(root_, query, best);
  return make(query, best, source_index);
}

std::vector<Correspondence> SpatialIndex::k_nearest(const Eigen::Vector3d& query, Eigen::Index k,
                                                    Eigen::Index source_index) const {
  if (k < 1) throw UsageError("k_nearest requires k >= 1");
  const auto kk = static_cast<std::size_t>(std::min(k, source_size()));
  std::vector<Candidate> heap;
  heap.reserve(kk);
  search_k(root_, query, kk, heap);
  std::sort_heap(heap.begin(), heap.end());
  std::vector<Correspondence> out;
  out.reserve(heap.size());
  for (const auto& c : heap) out.push_back(make(query, c, source_index));
  return out;
}

std::vector<Correspondence> SpatialIndex::radius_search(const Eigen::Vector3d& query,
                                                        double radius,
                                                        Eigen::Index source_index) const {
  if (!(radius > 0.0)) throw UsageError("radius_search requires radius > 0");
  std::vector<Candidate> hits;
  search_radius(root_, query, radius * radius, hits);
  std::sort(hits.begin(), hits.end());
  std::vector<Correspondence> out;
  out.reserve(hits.size());
  for (const auto& c : hits) out.push_back(make(query, c, source_index));
  return out;
}

}  // namespace cloudgauge
