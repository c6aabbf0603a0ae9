#pragma once

#include <cstdint>
#include <utility>

#include "raylign/geometry.hpp"
#include "raylign/rng.hpp"

namespace raylign {

enum class CropKind { None, HalfSpace, Cone };

struct PairSpec {
  double rotation_max_deg = 45.0;
  double translation_range = 0.2;
  CropKind crop = CropKind::None;
  double overlap = 1.0;  // target fraction of the source region covered
  double noise_sigma = 0.0;
  double outlier_fraction = 0.0;
  int points = 1024;
  std::uint64_t seed = 0;
};

struct BenchmarkPair {
  PointCloud source;
  PointCloud target;
  RigidTransform gt;  // maps source onto the target frame
  PairSpec provenance;
};

/// Invertible record of the unit scaling applied to a cloud.
struct ScaleRecord {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double half_extent = 1.0;

  Eigen::Vector3d restore(const Eigen::Vector3d& p) const {
    return p * half_extent + center;
  }
};

/// Centers the AABB at the origin and divides by half the maximum extent,
/// mapping the cloud into [-1, 1]^3. Throws on zero extent.
std::pair<PointCloud, ScaleRecord> unit_scale(const PointCloud& c);

/// ZYX Euler rotation with each angle ~ U[0, rotation_max_deg] and each
/// translation component ~ U[-range, range].
RigidTransform random_transform(const PairSpec& spec, Pcg32& rng);

/// Keeps the fraction of points with the largest projection onto axis
/// (HalfSpace) or the smallest angle about axis from the centroid (Cone);
/// original point order preserved.
PointCloud crop_cloud(const PointCloud& c, const Eigen::Vector3d& axis,
                      CropKind kind, double keep_fraction);

/// Scale -> crop (two opposite-facing regions, each keeping
/// 1/(2 - overlap) of the base so the measured source overlap matches the
/// spec) -> FPS -> gt^-1 on the source -> optional noise/outliers on the
/// source. Bit-reproducible for a given (base, spec).
BenchmarkPair make_pair(const PointCloud& base, const PairSpec& spec);

/// Asymmetric bumpy closed surface (deformed ellipsoid with trigonometric
/// lobes and one off-axis lump), sampled area-uniformly in direction space.
/// A self-contained stand-in for scanned shapes in benchmarks and demos.
PointCloud synthetic_blob(int n, std::uint64_t seed);

}  // namespace raylign
