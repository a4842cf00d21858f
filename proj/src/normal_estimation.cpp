// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

#include "cloudgauge/normal_estimation.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>

#include "cloudgauge/error.hpp"
#include "cloudgauge/parallel.hpp"

namespace cloudgauge {

namespace {

// Middle-to-largest eigenvalue ratio below which a neighbourhood is a line.
constexpr double kCollinearRatio = 1e-12;

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::uint32_t{0});
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
  }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint8_t> rank_;
};

}  // namespace

Eigen::Index NormalField::valid_count() const {
  return static_cast<Eigen::Index>(std::count(valid.begin(), valid.end(), true));
}

NormalField NormalField::from_normals(const Normals& normals) {
  NormalField field;
  field.normals = normals;
  field.valid.resize(static_cast<std::size_t>(normals.cols()));
  for (Eigen::Index i = 0; i < normals.cols(); ++i) {
    field.valid[static_cast<std::size_t>(i)] = normals.col(i).squaredNorm() > 0.0;
  }
  return field;
}

double auto_radius(const PointCloud& cloud, const SpatialIndex& index, double multiplier,
                   Eigen::Index sample_limit) {
  if (cloud.size() < 2) throw UsageError("auto_radius needs at least 2 points");
  if (!(multiplier > 0.0)) throw UsageError("radius multiplier must be positive");
  const Eigen::Index n = cloud.size();
  const Eigen::Index m = std::min(n, std::max<Eigen::Index>(1, sample_limit));

  std::vector<double> nn(static_cast<std::size_t>(m), 0.0);
  std::vector<char> found(static_cast<std::size_t>(m), 0);
  parallel_for(static_cast<std::size_t>(m), [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      const Eigen::Index i = static_cast<Eigen::Index>(s) * n / m;
      const Eigen::Vector3d p = cloud.point(i);
      for (Eigen::Index k = 2;; k = std::min(n, 2 * k)) {
        const auto hits = index.k_nearest(p, k);
        const auto it = std::find_if(hits.begin(), hits.end(),
                                     [](const Correspondence& c) { return c.squared_distance > 0.0; });
        if (it != hits.end()) {
          nn[s] = std::sqrt(it->squared_distance);
          found[s] = 1;
          break;
        }
        if (k == n) break;
      }
    }
  });

  std::vector<double> distances;
  distances.reserve(nn.size());
  for (std::size_t s = 0; s < nn.size(); ++s) {
    if (found[s]) distances.push_back(nn[s]);
  }
  if (distances.empty()) throw DataError("auto_radius: all points coincide");
  return multiplier * pairwise_sum(distances) / static_cast<double>(distances.size());
}

double auto_radius(const PointCloud& cloud, double multiplier, Eigen::Index sample_limit) {
  return auto_radius(cloud, SpatialIndex(cloud), multiplier, sample_limit);
}

NormalField estimate_normals(const PointCloud& cloud, const SpatialIndex& index, double radius,
                             Eigen::Index fallback_k) {
  if (!(radius > 0.0)) throw UsageError("estimate_normals requires radius > 0");
  const Eigen::Index n = cloud.size();
  NormalField field;
  field.normals = Normals::Zero(3, n);
  field.radius = radius;
  std::vector<char> valid(static_cast<std::size_t>(n), 0);

  parallel_for(static_cast<std::size_t>(n), [&](std::size_t begin, std::size_t end) {
    for (std::size_t s = begin; s < end; ++s) {
      const auto i = static_cast<Eigen::Index>(s);
      const Eigen::Vector3d p = cloud.point(i);
      auto hood = index.radius_search(p, radius);
      if (hood.size() < 3) hood = index.k_nearest(p, fallback_k);
      if (hood.size() < 3) continue;

      Eigen::Vector3d mean = Eigen::Vector3d::Zero();
      for (const auto& c : hood) mean += index.points().col(c.target_index);
      mean /= static_cast<double>(hood.size());
      Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
      for (const auto& c : hood) {
        const Eigen::Vector3d d = index.points().col(c.target_index) - mean;
        cov.noalias() += d * d.transpose();
      }

      const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
      const Eigen::Vector3d& lambda = solver.eigenvalues();
      if (!(lambda[2] > 0.0) || lambda[1] <= kCollinearRatio * lambda[2]) continue;
      field.normals.col(i) = solver.eigenvectors().col(0).normalized();
      valid[s] = 1;
    }
  });
  field.valid.assign(valid.begin(), valid.end());
  return field;
}

NormalField estimate_normals(const PointCloud& cloud, double radius, Eigen::Index fallback_k) {
  return estimate_normals(cloud, SpatialIndex(cloud), radius, fallback_k);
}

NormalField orient_normals(const PointCloud& cloud, const NormalField& field, Eigen::Index k) {
  if (field.size() != cloud.size()) throw UsageError("normal field does not match the cloud");
  if (k < 1) throw UsageError("orientation graph needs k >= 1");

  NormalField out = field;
  out.seeds.clear();

  std::vector<Eigen::Index> members;  // graph vertex -> cloud index
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    if (field.is_valid(i)) members.push_back(i);
  }
  if (members.empty()) return out;
  const auto m = members.size();

  Points positions(3, static_cast<Eigen::Index>(m));
  for (std::size_t v = 0; v < m; ++v) positions.col(static_cast<Eigen::Index>(v)) = cloud.point(members[v]);
  const SpatialIndex index(positions);

  struct Edge {
    double weight;
    std::uint32_t a;
    std::uint32_t b;
  };
  const Eigen::Index kk = std::min<Eigen::Index>(k + 1, static_cast<Eigen::Index>(m));
  std::vector<std::vector<std::uint32_t>> neighbours(m);
  parallel_for(m, [&](std::size_t begin, std::size_t end) {
    for (std::size_t v = begin; v < end; ++v) {
      const auto hits = index.k_nearest(positions.col(static_cast<Eigen::Index>(v)), kk);
      auto& list = neighbours[v];
      for (const auto& c : hits) {
        if (static_cast<std::size_t>(c.target_index) == v) continue;
        if (static_cast<Eigen::Index>(list.size()) == k) break;
        list.push_back(static_cast<std::uint32_t>(c.target_index));
      }
    }
  });

  std::vector<Edge> edges;
  edges.reserve(m * static_cast<std::size_t>(k));
  for (std::size_t v = 0; v < m; ++v) {
    for (const std::uint32_t u : neighbours[v]) {
      const auto a = std::min(static_cast<std::uint32_t>(v), u);
      const auto b = std::max(static_cast<std::uint32_t>(v), u);
      const double dot = field.normals.col(members[a]).dot(field.normals.col(members[b]));
      edges.push_back(Edge{1.0 - std::abs(dot), a, b});
    }
  }
  neighbours.clear();
  neighbours.shrink_to_fit();
  std::sort(edges.begin(), edges.end(), [](const Edge& x, const Edge& y) {
    if (x.weight != y.weight) return x.weight < y.weight;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  edges.erase(std::unique(edges.begin(), edges.end(),
                          [](const Edge& x, const Edge& y) { return x.a == y.a && x.b == y.b; }),
              edges.end());

  // Kruskal; the tree is stored as an adjacency list.
  DisjointSets sets(m);
  std::vector<std::vector<std::uint32_t>> tree(m);
  for (const Edge& e : edges) {
    if (sets.unite(e.a, e.b)) {
      tree[e.a].push_back(e.b);
      tree[e.b].push_back(e.a);
    }
  }
  edges.clear();
  edges.shrink_to_fit();

  // Seed of each component: highest z, lowest index on ties.
  std::vector<std::int64_t> seed_of_root(m, -1);
  for (std::size_t v = 0; v < m; ++v) {
    const std::uint32_t r = sets.find(static_cast<std::uint32_t>(v));
    const std::int64_t cur = seed_of_root[r];
    if (cur < 0 || cloud.point(members[v]).z() > cloud.point(members[static_cast<std::size_t>(cur)]).z()) {
      seed_of_root[r] = static_cast<std::int64_t>(v);
    }
  }

  std::vector<char> visited(m, 0);
  std::queue<std::uint32_t> frontier;
  for (std::size_t v = 0; v < m; ++v) {
    if (seed_of_root[v] < 0) continue;
    const auto seed = static_cast<std::uint32_t>(seed_of_root[v]);
    out.seeds.push_back(members[seed]);
    if (out.normals(2, members[seed]) < 0.0) out.normals.col(members[seed]) *= -1.0;
    visited[seed] = 1;
    frontier.push(seed);
    while (!frontier.empty()) {
      const std::uint32_t parent = frontier.front();
      frontier.pop();
      const auto np = out.normals.col(members[parent]);
      for (const std::uint32_t child : tree[parent]) {
        if (visited[child]) continue;
        visited[child] = 1;
        if (np.dot(out.normals.col(members[child])) < 0.0) out.normals.col(members[child]) *= -1.0;
        frontier.push(child);
      }
    }
  }
  std::sort(out.seeds.begin(), out.seeds.end());
  return out;
}

NormalField compute_normals(const PointCloud& cloud, const NormalEstimationOptions& options) {
  if (cloud.empty()) throw UsageError("cannot estimate normals of an empty cloud");
  const SpatialIndex index(cloud);
  const double radius =
      auto_radius(cloud, index, options.radius_multiplier, options.radius_sample_limit);
  NormalField field = estimate_normals(cloud, index, radius, options.fallback_k);
  if (options.orient) field = orient_normals(cloud, field, options.orientation_k);
  return field;
}

}  // namespace cloudgauge
