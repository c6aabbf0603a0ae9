#include "raylign/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "raylign/errors.hpp"
#include "raylign/kdtree.hpp"
#include "raylign/rng.hpp"

namespace raylign {

void PointCloud::validate() const {
  if (normals.empty()) return;
  if (normals.size() != points.size())
    throw Error("normals length does not match point count");
  for (const auto& n : normals) {
    if (std::abs(n.norm() - 1.0) > 1e-6)
      throw Error("normal is not unit length");
  }
}

PointCloud RigidTransform::apply(const PointCloud& c) const {
  PointCloud out;
  out.points.reserve(c.points.size());
  for (const auto& p : c.points) out.points.push_back(apply(p));
  out.normals.reserve(c.normals.size());
  for (const auto& n : c.normals) out.normals.push_back(rotation * n);
  return out;
}

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.block<3, 3>(0, 0) = rotation;
  m.block<3, 1>(0, 3) = translation;
  return m;
}

RigidTransform RigidTransform::from_matrix(const Eigen::Matrix4d& m) {
  if ((m.row(3) - Eigen::RowVector4d(0, 0, 0, 1)).norm() > 1e-9)
    throw Error("transform matrix last row is not 0 0 0 1");
  RigidTransform t;
  t.rotation = m.block<3, 3>(0, 0);
  t.translation = m.block<3, 1>(0, 3);
  if (!t.is_valid(1e-6)) throw Error("matrix rotation block is not a rotation");
  return t;
}

bool RigidTransform::is_valid(double tol) const {
  Eigen::Matrix3d err = rotation.transpose() * rotation -
                        Eigen::Matrix3d::Identity();
  if (err.cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(rotation.determinant() - 1.0) <= tol;
}

RigidTransform compose(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform c;
  c.rotation = a.rotation * b.rotation;
  c.translation = a.rotation * b.translation + a.translation;
  return c;
}

Eigen::Matrix3d skew(const Eigen::Vector3d& w) {
  Eigen::Matrix3d s;
  s << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
  return s;
}

RigidTransform exp_se3(const Se3Params& xi) {
  const double theta = xi.omega.norm();
  const Eigen::Matrix3d w = skew(xi.omega);
  const Eigen::Matrix3d w2 = w * w;

  // sin(t)/t, (1-cos(t))/t^2, (t-sin(t))/t^3 with small-angle series.
  double a, b, c;
  if (theta < 1e-6) {
    const double t2 = theta * theta;
    a = 1.0 - t2 / 6.0;
    b = 0.5 - t2 / 24.0;
    c = 1.0 / 6.0 - t2 / 120.0;
  } else {
    a = std::sin(theta) / theta;
    b = (1.0 - std::cos(theta)) / (theta * theta);
    c = (theta - std::sin(theta)) / (theta * theta * theta);
  }

  RigidTransform t;
  t.rotation = Eigen::Matrix3d::Identity() + a * w + b * w2;
  const Eigen::Matrix3d left_jacobian =
      Eigen::Matrix3d::Identity() + b * w + c * w2;
  t.translation = left_jacobian * xi.v;
  return t;
}

Se3Params log_se3(const RigidTransform& t) {
  const double trace = t.rotation.trace();
  const double cos_theta = std::clamp((trace - 1.0) * 0.5, -1.0, 1.0);
  const double theta = std::acos(cos_theta);
  if (theta >= M_PI - 1e-6)
    throw DegenerateRotationError("log_se3: rotation angle too close to pi");

  Eigen::Vector3d omega;
  const Eigen::Matrix3d diff = t.rotation - t.rotation.transpose();
  const Eigen::Vector3d vee(diff(2, 1), diff(0, 2), diff(1, 0));
  if (theta < 1e-6) {
    // theta/(2 sin theta) ~ 1/2 + theta^2/12
    omega = (0.5 + theta * theta / 12.0) * vee;
  } else {
    omega = theta / (2.0 * std::sin(theta)) * vee;
  }

  const Eigen::Matrix3d w = skew(omega);
  const Eigen::Matrix3d w2 = w * w;
  double coeff;
  if (theta < 1e-6) {
    coeff = 1.0 / 12.0 + theta * theta / 720.0;
  } else {
    coeff = 1.0 / (theta * theta) -
            (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  }
  const Eigen::Matrix3d inv_left_jacobian =
      Eigen::Matrix3d::Identity() - 0.5 * w + coeff * w2;

  Se3Params xi;
  xi.omega = omega;
  xi.v = inv_left_jacobian * t.translation;
  return xi;
}

BoundingSphere bounding_sphere(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty())
    throw DegenerateCloudError("bounding_sphere: empty cloud");
  Eigen::Vector3d lo = a.points.front(), hi = a.points.front();
  auto grow = [&](const PointCloud& c) {
    for (const auto& p : c.points) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
  };
  grow(a);
  grow(b);

  BoundingSphere s;
  s.center = 0.5 * (lo + hi);
  double max_d2 = 0.0;
  auto visit = [&](const PointCloud& c) {
    for (const auto& p : c.points)
      max_d2 = std::max(max_d2, (p - s.center).squaredNorm());
  };
  visit(a);
  visit(b);
  s.radius = std::max(1.05 * std::sqrt(max_d2), 1e-12);
  return s;
}

PointCloud farthest_point_sample(const PointCloud& c, int count,
                                 std::uint64_t seed) {
  if (c.empty()) throw DegenerateCloudError("farthest_point_sample: empty");
  if (count < 1) throw Error("farthest_point_sample: count must be >= 1");
  const int n = static_cast<int>(c.size());
  const int m = std::min(count, n);

  Pcg32 rng(seed, 0x9d5);
  std::vector<double> min_d2(n, std::numeric_limits<double>::infinity());
  std::vector<int> picked;
  picked.reserve(m);
  int current = static_cast<int>(rng.next_below(static_cast<std::uint32_t>(n)));
  picked.push_back(current);

  for (int step = 1; step < m; ++step) {
    int best = -1;
    double best_d2 = -1.0;
    for (int i = 0; i < n; ++i) {
      const double d2 = (c.points[i] - c.points[current]).squaredNorm();
      if (d2 < min_d2[i]) min_d2[i] = d2;
      if (min_d2[i] > best_d2) {  // strict: ties keep the smaller index
        best_d2 = min_d2[i];
        best = i;
      }
    }
    current = best;
    picked.push_back(current);
  }

  PointCloud out;
  out.points.reserve(picked.size());
  for (int idx : picked) out.points.push_back(c.points[idx]);
  if (c.has_normals()) {
    out.normals.reserve(picked.size());
    for (int idx : picked) out.normals.push_back(c.normals[idx]);
  }
  return out;
}

double knn_stats(const PointCloud& c, int k) {
  const int n = static_cast<int>(c.size());
  if (k < 1) throw Error("knn_stats: k must be >= 1");
  if (n <= k)
    throw DegenerateCloudError("knn_stats: cloud must have more than k points");

  KdTree tree(c.points);
  std::vector<int> idx;
  std::vector<double> dist;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    tree.knn(c.points[i], k + 1, idx, dist);
    double sum = 0.0;
    int used = 0;
    for (std::size_t j = 0; j < idx.size() && used < k; ++j) {
      if (idx[j] == i) continue;  // exclude self by index
      sum += dist[j];
      ++used;
    }
    total += sum / k;
  }
  return total / n;
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error("median: empty list");
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  double upper = values[mid];
  if (n % 2 == 1) return upper;
  double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

double median_pair_distance(
    const std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>>& pairs) {
  if (pairs.empty()) throw Error("median_pair_distance: empty list");
  std::vector<double> d;
  d.reserve(pairs.size());
  for (const auto& [a, b] : pairs) d.push_back((a - b).norm());
  return median(std::move(d));
}

void estimate_normals(PointCloud& c, int k) {
  const int n = static_cast<int>(c.size());
  if (n <= k)
    throw DegenerateCloudError("estimate_normals: cloud must have > k points");
  KdTree tree(c.points);
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : c.points) centroid += p;
  centroid /= n;

  c.normals.assign(n, Eigen::Vector3d::UnitZ());
  std::vector<int> idx;
  std::vector<double> dist;
  for (int i = 0; i < n; ++i) {
    tree.knn(c.points[i], k + 1, idx, dist);
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    for (int j : idx) mean += c.points[j];
    mean /= static_cast<double>(idx.size());
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (int j : idx) {
      const Eigen::Vector3d d = c.points[j] - mean;
      cov += d * d.transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    Eigen::Vector3d normal = eig.eigenvectors().col(0);  // smallest eigenvalue
    if (normal.dot(c.points[i] - centroid) < 0.0) normal = -normal;
    c.normals[i] = normal.normalized();
  }
}

}  // namespace raylign
