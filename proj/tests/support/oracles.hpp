#pragma once

// Independent brute-force reference implementations used to pin expected
// values. Deliberately free of KdTree / intersect() / loss internals: plain
// loops over raw point vectors only.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace oracle {

inline std::vector<std::pair<double, int>> knn(
    const std::vector<Eigen::Vector3d>& points, const Eigen::Vector3d& query,
    int k) {
  std::vector<std::pair<double, int>> all;
  all.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    all.emplace_back((points[i] - query).norm(), static_cast<int>(i));
  std::sort(all.begin(), all.end());
  if (static_cast<int>(all.size()) > k) all.resize(k);
  return all;
}

inline double point_line_distance(const Eigen::Vector3d& p,
                                  const Eigen::Vector3d& a,
                                  const Eigen::Vector3d& b) {
  const Eigen::Vector3d dir = (b - a).normalized();
  const Eigen::Vector3d rel = p - a;
  return (rel - rel.dot(dir) * dir).norm();
}

inline std::vector<int> cylinder_candidates(
    const std::vector<Eigen::Vector3d>& points, const Eigen::Vector3d& a,
    const Eigen::Vector3d& b, double delta) {
  const Eigen::Vector3d ab = b - a;
  const double len = ab.norm();
  const Eigen::Vector3d dir = ab / len;
  std::vector<int> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Eigen::Vector3d rel = points[i] - a;
    const double t = rel.dot(dir);
    if (t < 0.0 || t > len) continue;
    if ((rel - t * dir).norm() <= delta) out.push_back(static_cast<int>(i));
  }
  return out;
}

// Eq-style soft intersections: for each candidate whose k nearest neighbors
// (self excluded, ties by index) are all candidates, the distance-weighted
// combination of candidate + neighbors; all-zero weights -> centroid.
inline std::vector<Eigen::Vector3d> intersect_convex(
    const std::vector<Eigen::Vector3d>& points, const Eigen::Vector3d& a,
    const Eigen::Vector3d& b, double delta, int k) {
  const std::vector<int> cands = cylinder_candidates(points, a, b, delta);
  std::vector<Eigen::Vector3d> out;
  for (int c : cands) {
    auto nearest = knn(points, points[c], k + 1);
    std::vector<int> nbrs;
    for (const auto& [d, idx] : nearest) {
      if (idx == c) continue;
      if (static_cast<int>(nbrs.size()) < k) nbrs.push_back(idx);
    }
    const bool ok = std::all_of(nbrs.begin(), nbrs.end(), [&](int nb) {
      return std::find(cands.begin(), cands.end(), nb) != cands.end();
    });
    if (!ok) continue;

    std::vector<int> members{c};
    members.insert(members.end(), nbrs.begin(), nbrs.end());
    double sum = 0.0;
    Eigen::Vector3d combined = Eigen::Vector3d::Zero();
    for (int m : members) {
      const double w = point_line_distance(points[m], a, b);
      sum += w;
      combined += w * points[m];
    }
    if (sum > 0.0) {
      combined /= sum;
    } else {
      combined.setZero();
      for (int m : members) combined += points[m];
      combined /= static_cast<double>(members.size());
    }
    out.push_back(combined);
  }
  return out;
}

inline std::vector<Eigen::Vector3d> intersect_all(
    const std::vector<Eigen::Vector3d>& points, const Eigen::Vector3d& a,
    const Eigen::Vector3d& b, double delta) {
  std::vector<Eigen::Vector3d> out;
  for (int c : cylinder_candidates(points, a, b, delta))
    out.push_back(points[c]);
  return out;
}

inline double welsch(double x, double nu) {
  return 1.0 - std::exp(-x * x / (2.0 * nu * nu));
}

// Full naive pipeline for the line metric: transform the source points
// directly, intersect both clouds per chord, match nearest in both
// directions, weight by the count gap, take nu = nu0 * median distance and
// average the per-chord sums over the surviving chords.
inline double line_loss_value(const Eigen::Matrix3d& rotation,
                              const Eigen::Vector3d& translation,
                              const std::vector<Eigen::Vector3d>& source,
                              const std::vector<Eigen::Vector3d>& target,
                              const std::vector<std::pair<Eigen::Vector3d,
                                                          Eigen::Vector3d>>&
                                  chords,
                              double nu0, double delta, int k) {
  std::vector<Eigen::Vector3d> moved;
  moved.reserve(source.size());
  for (const auto& p : source) moved.push_back(rotation * p + translation);

  struct ChordData {
    double weight;
    std::vector<double> dists;
  };
  std::vector<ChordData> survivors;
  std::vector<double> all_dists;

  for (const auto& [a, b] : chords) {
    const auto s_l = intersect_convex(moved, a, b, delta, k);
    if (s_l.empty()) continue;
    const auto t_l = intersect_convex(target, a, b, delta, k);
    if (t_l.empty()) continue;

    ChordData data;
    data.weight = std::exp(
        -std::abs((static_cast<double>(s_l.size()) -
                   static_cast<double>(t_l.size())) / 2.0));
    auto closest = [](const Eigen::Vector3d& p,
                      const std::vector<Eigen::Vector3d>& set) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : set) best = std::min(best, (p - q).norm());
      return best;
    };
    for (const auto& x : s_l) data.dists.push_back(closest(x, t_l));
    for (const auto& y : t_l) data.dists.push_back(closest(y, s_l));
    for (double d : data.dists) all_dists.push_back(d);
    survivors.push_back(std::move(data));
  }
  if (survivors.empty()) return -1.0;  // caller treats as "all skipped"

  std::sort(all_dists.begin(), all_dists.end());
  const std::size_t n = all_dists.size();
  const double d_med = n % 2 == 1
                           ? all_dists[n / 2]
                           : 0.5 * (all_dists[n / 2 - 1] + all_dists[n / 2]);
  const double nu = std::max(nu0 * d_med, 1e-12);

  double total = 0.0;
  for (const auto& chord : survivors) {
    double f_l = 0.0;
    for (double d : chord.dists) f_l += welsch(d, nu);
    total += chord.weight * f_l;
  }
  return total / static_cast<double>(survivors.size());
}

inline double chamfer_value(const Eigen::Matrix3d& rotation,
                            const Eigen::Vector3d& translation,
                            const std::vector<Eigen::Vector3d>& source,
                            const std::vector<Eigen::Vector3d>& target,
                            bool use_welsch, double nu0) {
  std::vector<Eigen::Vector3d> moved;
  for (const auto& p : source) moved.push_back(rotation * p + translation);

  std::vector<double> dists;
  auto closest = [](const Eigen::Vector3d& p,
                    const std::vector<Eigen::Vector3d>& set) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : set) best = std::min(best, (p - q).norm());
    return best;
  };
  for (const auto& x : moved) dists.push_back(closest(x, target));
  for (const auto& y : target) dists.push_back(closest(y, moved));

  double value = 0.0;
  if (use_welsch) {
    std::vector<double> sorted = dists;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double d_med = n % 2 == 1
                             ? sorted[n / 2]
                             : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    const double nu = std::max(nu0 * d_med, 1e-12);
    for (double d : dists) value += welsch(d, nu);
  } else {
    for (double d : dists) value += d * d;
  }
  return value / static_cast<double>(moved.size() + target.size());
}

}  // namespace oracle
