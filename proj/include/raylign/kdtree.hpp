#pragma once

#include <vector>

#include <Eigen/Core>

namespace raylign {

/// Static 3-d kd-tree over a point array. Queries reproduce exhaustive
/// search exactly, with distance ties broken toward the smaller index.
/// Read-only after construction; safe for concurrent queries.
class KdTree {
 public:
  KdTree() = default;
  explicit KdTree(const std::vector<Eigen::Vector3d>& points);

  std::size_t size() const { return points_.size(); }

  /// min(k, n) indices sorted by non-decreasing distance (index on ties).
  void knn(const Eigen::Vector3d& query, int k, std::vector<int>& indices,
           std::vector<double>& distances) const;

  /// Index of the single nearest point; -1 on an empty tree.
  int nearest(const Eigen::Vector3d& query, double* distance = nullptr) const;

  /// All indices with ||p - query|| <= radius, ascending index order.
  void radius_search(const Eigen::Vector3d& query, double radius,
                     std::vector<int>& out) const;

  /// All indices within perpendicular distance delta of the segment's line
  /// whose projection parameter falls inside [0, |b-a|]. Ascending index
  /// order. Closed conditions on both bounds.
  void segment_cylinder(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                        double delta, std::vector<int>& out) const;

 private:
  struct Node {
    Eigen::Vector3d lo, hi;  // exact bounds of the points below
    int left = -1, right = -1;
    int begin = 0, end = 0;  // leaf range in order_
  };

  int build(int begin, int end);
  void knn_recurse(int node, const Eigen::Vector3d& q, int k,
                   std::vector<std::pair<double, int>>& heap) const;

  std::vector<Eigen::Vector3d> points_;
  std::vector<int> order_;  // permutation of point indices, leaf-contiguous
  std::vector<Node> nodes_;
  int root_ = -1;

  static constexpr int kLeafSize = 16;
};

}  // namespace raylign
