#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace raylign {

using Vector6d = Eigen::Matrix<double, 6, 1>;

/// A point cloud: positions plus optional unit normals of the same length.
struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  std::vector<Eigen::Vector3d> normals;  // empty, or one unit vector per point

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_normals() const { return !normals.empty(); }

  /// Throws Error if the normals array is present but inconsistent
  /// (wrong length or non-unit within 1e-6).
  void validate() const;
};

/// Rigid motion: p -> rotation * p + translation.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const {
    return rotation * p + translation;
  }
  PointCloud apply(const PointCloud& c) const;

  RigidTransform inverse() const {
    RigidTransform inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(inv.rotation * translation);
    return inv;
  }

  Eigen::Matrix4d matrix() const;
  /// Validates the last row and orthonormality (1e-6) of the rotation block.
  static RigidTransform from_matrix(const Eigen::Matrix4d& m);

  /// Orthonormality and det(+1) within tol.
  bool is_valid(double tol = 1e-9) const;
};

/// result.apply(p) == a.apply(b.apply(p))
RigidTransform compose(const RigidTransform& a, const RigidTransform& b);

/// se(3) coordinates: axis-angle rotation part first, then translation part.
struct Se3Params {
  Eigen::Vector3d omega = Eigen::Vector3d::Zero();
  Eigen::Vector3d v = Eigen::Vector3d::Zero();

  Vector6d vec() const {
    Vector6d x;
    x << omega, v;
    return x;
  }
  static Se3Params from_vec(const Vector6d& x) {
    return {x.head<3>(), x.tail<3>()};
  }
};

Eigen::Matrix3d skew(const Eigen::Vector3d& w);

/// SE(3) exponential: Rodrigues rotation, left-Jacobian translation.
RigidTransform exp_se3(const Se3Params& xi);

/// Inverse of exp_se3. Throws DegenerateRotationError when the rotation
/// angle is within 1e-6 of pi.
Se3Params log_se3(const RigidTransform& t);

struct BoundingSphere {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 0.0;
};

/// Covering sphere for the union of both clouds: AABB-center construction,
/// max point distance as radius, inflated by 5% (floor 1e-12).
BoundingSphere bounding_sphere(const PointCloud& a, const PointCloud& b);

/// Greedy max-min farthest point sampling. First point picked uniformly by
/// seed; distance ties resolved toward the smaller point index. count >= n
/// returns the whole cloud in FPS order.
PointCloud farthest_point_sample(const PointCloud& c, int count,
                                 std::uint64_t seed);

/// d_nei: mean over all points of the mean distance to their k nearest
/// neighbors (self excluded). Throws DegenerateCloudError if n <= k.
double knn_stats(const PointCloud& c, int k);

/// Median of pairwise distances; even count averages the two middle values.
double median_pair_distance(
    const std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>>& pairs);

/// Median of a value list (copies; even count averages the middle two).
double median(std::vector<double> values);

/// PCA normals over k nearest neighbors, oriented away from the centroid.
void estimate_normals(PointCloud& c, int k = 10);

}  // namespace raylign
