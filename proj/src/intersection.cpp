#include "raylign/intersection.hpp"

#include <algorithm>
#include <cmath>

#include "raylign/errors.hpp"

namespace raylign {

IntersectionParams default_params(const PointCloud& cloud) {
  IntersectionParams params;
  params.k = 2;
  const double d_nei = knn_stats(cloud, params.k);
  if (d_nei <= 0.0)
    throw DegenerateCloudError("default_params: degenerate cloud (d_nei = 0)");
  params.delta = 0.5 * std::sqrt(3.0) * d_nei;
  return params;
}

std::vector<int> candidate_points(const Chord& chord, const PointCloud& cloud,
                                  const KdTree& index, double delta) {
  if (delta <= 0.0) throw Error("candidate_points: delta must be positive");
  std::vector<int> out;
  index.segment_cylinder(chord.a, chord.b, delta, out);
  (void)cloud;
  return out;
}

std::vector<std::vector<int>> build_knn_table(const PointCloud& cloud,
                                              const KdTree& index, int k) {
  const int n = static_cast<int>(cloud.size());
  std::vector<std::vector<int>> table(n);
  std::vector<int> idx;
  std::vector<double> dist;
  for (int i = 0; i < n; ++i) {
    index.knn(cloud.points[i], k + 1, idx, dist);
    auto& row = table[i];
    row.reserve(k);
    for (std::size_t j = 0; j < idx.size() && static_cast<int>(row.size()) < k;
         ++j) {
      if (idx[j] == i) continue;
      row.push_back(idx[j]);
    }
  }
  return table;
}

IntersectionSet intersect(const Chord& chord, const PointCloud& cloud,
                          const KdTree& index, const IntersectionParams& params,
                          const std::vector<std::vector<int>>* knn_table) {
  IntersectionSet set;
  const std::vector<int> candidates =
      candidate_points(chord, cloud, index, params.delta);
  if (candidates.empty()) return set;

  const Eigen::Vector3d dir = chord.direction();
  auto line_distance = [&](const Eigen::Vector3d& p) {
    const Eigen::Vector3d rel = p - chord.a;
    const double t = rel.dot(dir);
    return std::sqrt(std::max(0.0, rel.squaredNorm() - t * t));
  };

  std::vector<std::pair<double, std::size_t>> ordering;  // (projection, slot)

  if (params.mode == IntersectionMode::AllCandidates) {
    for (int idx : candidates) {
      const Eigen::Vector3d& p = cloud.points[idx];
      ordering.emplace_back((p - chord.a).dot(dir), set.points.size());
      set.points.push_back(p);
      set.source_indices.push_back({idx});
    }
  } else {
    std::vector<std::vector<int>> local_table;
    const std::vector<std::vector<int>>* table = knn_table;
    if (table == nullptr) {
      local_table = build_knn_table(cloud, index, params.k);
      table = &local_table;
    }

    std::vector<int> neighborhood;
    for (int idx : candidates) {
      const auto& neighbors = (*table)[idx];
      const bool all_candidates = std::all_of(
          neighbors.begin(), neighbors.end(), [&](int nb) {
            return std::binary_search(candidates.begin(), candidates.end(), nb);
          });
      if (!all_candidates) continue;

      neighborhood.clear();
      neighborhood.push_back(idx);
      neighborhood.insert(neighborhood.end(), neighbors.begin(),
                          neighbors.end());

      double weight_sum = 0.0;
      Eigen::Vector3d combined = Eigen::Vector3d::Zero();
      for (int member : neighborhood) {
        double w = line_distance(cloud.points[member]);
        if (params.inverse_distance_weights) w = 1.0 / std::max(w, 1e-12);
        weight_sum += w;
        combined += w * cloud.points[member];
      }
      if (weight_sum > 0.0) {
        combined /= weight_sum;
      } else {
        // All members exactly on the line: centroid.
        combined.setZero();
        for (int member : neighborhood) combined += cloud.points[member];
        combined /= static_cast<double>(neighborhood.size());
      }

      ordering.emplace_back((combined - chord.a).dot(dir), set.points.size());
      set.points.push_back(combined);
      set.source_indices.push_back(neighborhood);
    }
  }

  std::stable_sort(ordering.begin(), ordering.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  IntersectionSet sorted;
  sorted.points.reserve(set.points.size());
  sorted.source_indices.reserve(set.source_indices.size());
  for (const auto& [proj, slot] : ordering) {
    sorted.points.push_back(set.points[slot]);
    sorted.source_indices.push_back(std::move(set.source_indices[slot]));
  }
  return sorted;
}

}  // namespace raylign
