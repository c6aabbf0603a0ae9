#pragma once

#include <vector>

#include <Eigen/Core>

#include "raylign/geometry.hpp"
#include "raylign/rng.hpp"

namespace raylign {

/// A random straight line materialized as a segment spanning the bounding
/// sphere.
struct Chord {
  Eigen::Vector3d a = Eigen::Vector3d::Zero();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();

  double length() const { return (b - a).norm(); }
  Eigen::Vector3d direction() const { return (b - a).normalized(); }
};

enum class SamplerKind {
  SphereChord,         // two uniform points on the bounding sphere
  BoxPointDirection,   // uniform box point + uniform direction (Sample1)
  CloudPairPerturbed,  // perturbed random point from each cloud (Sample2)
};

/// Area-uniform point on the sphere surface via the (u, alpha)
/// parameterization: u ~ U[-1,1], alpha ~ U[0,2pi),
/// p = center + (r*sqrt(1-u^2)*cos a, r*sqrt(1-u^2)*sin a, r*u).
Eigen::Vector3d sample_sphere_point(const BoundingSphere& sphere, Pcg32& rng);

/// count chords of the given kind. Degenerate (coincident-endpoint) draws are
/// retried up to 100 times, then Error. Deterministic for a given rng state.
/// perturb_scale is the CloudPairPerturbed displacement radius as a fraction
/// of the sphere radius.
std::vector<Chord> sample_chords(const BoundingSphere& sphere, int count,
                                 SamplerKind kind, const PointCloud& source,
                                 const PointCloud& target, Pcg32& rng,
                                 double perturb_scale = 0.05);

}  // namespace raylign
