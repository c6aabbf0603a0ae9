#pragma once

#include <vector>

#include <Eigen/Core>

#include "raylign/geometry.hpp"
#include "raylign/kdtree.hpp"
#include "raylign/sampling.hpp"

namespace raylign {

enum class IntersectionMode {
  ConvexCombination,  // soften each qualifying candidate over its neighborhood
  AllCandidates,      // emit every candidate unmodified (Insec1 ablation)
};

struct IntersectionParams {
  double delta = 0.0;  // cylinder radius; 0 lets callers derive it per cloud
  int k = 2;
  IntersectionMode mode = IntersectionMode::ConvexCombination;
  // Experiment flag (off by default): weight neighbors by inverse distance
  // to the line instead of the distance itself.
  bool inverse_distance_weights = false;
};

/// delta = (sqrt(3)/2) * d_nei with k = 2.
/// Throws DegenerateCloudError when d_nei is zero (all points coincident).
IntersectionParams default_params(const PointCloud& cloud);

/// Indices whose perpendicular distance to the chord's line is <= delta and
/// whose projection parameter lies within the chord segment. Equals a
/// brute-force scan; ascending index order.
std::vector<int> candidate_points(const Chord& chord, const PointCloud& cloud,
                                  const KdTree& index, double delta);

/// Soft intersection points of one chord with one cloud, sorted by scalar
/// projection onto the chord direction.
struct IntersectionSet {
  std::vector<Eigen::Vector3d> points;
  /// For each emitted point, the cloud indices it combines (the candidate
  /// followed by its k nearest neighbors); a single index in AllCandidates
  /// mode.
  std::vector<std::vector<int>> source_indices;

  bool empty() const { return points.empty(); }
  std::size_t size() const { return points.size(); }
};

/// Per-point k-nearest-neighbor table (self excluded, ties toward smaller
/// index); row i holds the neighbor indices of point i.
std::vector<std::vector<int>> build_knn_table(const PointCloud& cloud,
                                              const KdTree& index, int k);

/// ConvexCombination: for each candidate whose k nearest neighbors are all
/// candidates, emit the distance-weighted combination of the candidate and
/// its neighbors (weights are the distances to the line; all-zero weights
/// fall back to the centroid). AllCandidates: emit every candidate as-is.
/// knn_table may be null (computed on the fly).
IntersectionSet intersect(const Chord& chord, const PointCloud& cloud,
                          const KdTree& index, const IntersectionParams& params,
                          const std::vector<std::vector<int>>* knn_table = nullptr);

}  // namespace raylign
