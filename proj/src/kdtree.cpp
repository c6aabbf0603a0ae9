#include "raylign/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace raylign {

namespace {

// Heap entry comparator: larger distance first, larger index first on ties,
// so the heap top is always the entry a better candidate should replace.
inline bool heap_less(const std::pair<double, int>& a,
                      const std::pair<double, int>& b) {
  if (a.first != b.first) return a.first < b.first;
  return a.second < b.second;
}

}  // namespace

KdTree::KdTree(const std::vector<Eigen::Vector3d>& points) : points_(points) {
  const int n = static_cast<int>(points_.size());
  order_.resize(n);
  for (int i = 0; i < n; ++i) order_[i] = i;
  if (n > 0) {
    nodes_.reserve(2 * n / kLeafSize + 2);
    root_ = build(0, n);
  }
}

int KdTree::build(int begin, int end) {
  Node node;
  node.begin = begin;
  node.end = end;
  node.lo = points_[order_[begin]];
  node.hi = node.lo;
  for (int i = begin + 1; i < end; ++i) {
    node.lo = node.lo.cwiseMin(points_[order_[i]]);
    node.hi = node.hi.cwiseMax(points_[order_[i]]);
  }

  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= kLeafSize) return id;

  int axis;
  (nodes_[id].hi - nodes_[id].lo).maxCoeff(&axis);
  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end, [&](int a, int b) {
                     const double ca = points_[a][axis], cb = points_[b][axis];
                     if (ca != cb) return ca < cb;
                     return a < b;  // deterministic split
                   });
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void KdTree::knn_recurse(int node_id, const Eigen::Vector3d& q, int k,
                         std::vector<std::pair<double, int>>& heap) const {
  const Node& node = nodes_[node_id];

  // Squared distance from q to the node box.
  double box_d2 = 0.0;
  for (int ax = 0; ax < 3; ++ax) {
    double d = std::max({node.lo[ax] - q[ax], q[ax] - node.hi[ax], 0.0});
    box_d2 += d * d;
  }
  if (static_cast<int>(heap.size()) == k && box_d2 > heap.front().first) return;

  if (node.left < 0) {
    for (int i = node.begin; i < node.end; ++i) {
      const int idx = order_[i];
      const double d2 = (points_[idx] - q).squaredNorm();
      const std::pair<double, int> cand(d2, idx);
      if (static_cast<int>(heap.size()) < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end(), heap_less);
      } else if (heap_less(cand, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), heap_less);
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end(), heap_less);
      }
    }
    return;
  }

  // Visit the child whose box is closer to q first.
  auto child_d2 = [&](int cid) {
    const Node& c = nodes_[cid];
    double d2 = 0.0;
    for (int ax = 0; ax < 3; ++ax) {
      double d = std::max({c.lo[ax] - q[ax], q[ax] - c.hi[ax], 0.0});
      d2 += d * d;
    }
    return d2;
  };
  int first = node.left, second = node.right;
  if (child_d2(second) < child_d2(first)) std::swap(first, second);
  knn_recurse(first, q, k, heap);
  knn_recurse(second, q, k, heap);
}

void KdTree::knn(const Eigen::Vector3d& query, int k, std::vector<int>& indices,
                 std::vector<double>& distances) const {
  indices.clear();
  distances.clear();
  if (root_ < 0 || k < 1) return;

  std::vector<std::pair<double, int>> heap;
  heap.reserve(k);
  knn_recurse(root_, query, k, heap);
  std::sort(heap.begin(), heap.end());  // (distance, index) ascending
  indices.reserve(heap.size());
  distances.reserve(heap.size());
  for (const auto& [d2, idx] : heap) {
    indices.push_back(idx);
    distances.push_back(std::sqrt(d2));
  }
}

int KdTree::nearest(const Eigen::Vector3d& query, double* distance) const {
  std::vector<int> idx;
  std::vector<double> dist;
  knn(query, 1, idx, dist);
  if (idx.empty()) return -1;
  if (distance) *distance = dist[0];
  return idx[0];
}

void KdTree::radius_search(const Eigen::Vector3d& query, double radius,
                           std::vector<int>& out) const {
  out.clear();
  if (root_ < 0) return;
  const double r2 = radius * radius;
  std::vector<int> stack{root_};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    double box_d2 = 0.0;
    for (int ax = 0; ax < 3; ++ax) {
      double d = std::max({node.lo[ax] - query[ax], query[ax] - node.hi[ax], 0.0});
      box_d2 += d * d;
    }
    if (box_d2 > r2) continue;
    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int idx = order_[i];
        if ((points_[idx] - query).squaredNorm() <= r2) out.push_back(idx);
      }
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  std::sort(out.begin(), out.end());
}

void KdTree::segment_cylinder(const Eigen::Vector3d& a,
                              const Eigen::Vector3d& b, double delta,
                              std::vector<int>& out) const {
  out.clear();
  if (root_ < 0) return;
  const Eigen::Vector3d ab = b - a;
  const double len = ab.norm();
  if (len <= 0.0) return;
  const Eigen::Vector3d dir = ab / len;
  const double d2 = delta * delta;

  std::vector<int> stack{root_};
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();

    // Segment vs node box inflated by delta (conservative superset of the
    // true cylinder overlap); slab clipping of the segment parameter range.
    double t0 = 0.0, t1 = len;
    bool reject = false;
    for (int ax = 0; ax < 3 && !reject; ++ax) {
      const double lo = node.lo[ax] - delta, hi = node.hi[ax] + delta;
      const double o = a[ax], d = dir[ax];
      if (std::abs(d) < 1e-300) {
        if (o < lo || o > hi) reject = true;
      } else {
        double ta = (lo - o) / d, tb = (hi - o) / d;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 > t1) reject = true;
      }
    }
    if (reject) continue;

    if (node.left < 0) {
      for (int i = node.begin; i < node.end; ++i) {
        const int idx = order_[i];
        const Eigen::Vector3d rel = points_[idx] - a;
        const double t = rel.dot(dir);
        if (t < 0.0 || t > len) continue;
        const double perp2 = std::max(0.0, rel.squaredNorm() - t * t);
        if (perp2 <= d2) out.push_back(idx);
      }
    } else {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  std::sort(out.begin(), out.end());
}

}  // namespace raylign
