#include "raylign/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "raylign/errors.hpp"

namespace raylign {

std::pair<PointCloud, ScaleRecord> unit_scale(const PointCloud& c) {
  if (c.empty()) throw DegenerateCloudError("unit_scale: empty cloud");
  Eigen::Vector3d lo = c.points.front(), hi = c.points.front();
  for (const auto& p : c.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const double extent = (hi - lo).maxCoeff();
  if (extent <= 0.0)
    throw DegenerateCloudError("unit_scale: cloud has zero extent");

  ScaleRecord record;
  record.center = 0.5 * (lo + hi);
  record.half_extent = 0.5 * extent;

  PointCloud out;
  out.points.reserve(c.size());
  for (const auto& p : c.points)
    out.points.push_back((p - record.center) / record.half_extent);
  out.normals = c.normals;  // direction-preserving map
  return {std::move(out), record};
}

RigidTransform random_transform(const PairSpec& spec, Pcg32& rng) {
  const double to_rad = M_PI / 180.0;
  const double az = rng.uniform(0.0, spec.rotation_max_deg) * to_rad;
  const double ay = rng.uniform(0.0, spec.rotation_max_deg) * to_rad;
  const double ax = rng.uniform(0.0, spec.rotation_max_deg) * to_rad;

  RigidTransform t;
  t.rotation = (Eigen::AngleAxisd(az, Eigen::Vector3d::UnitZ()) *
                Eigen::AngleAxisd(ay, Eigen::Vector3d::UnitY()) *
                Eigen::AngleAxisd(ax, Eigen::Vector3d::UnitX()))
                   .toRotationMatrix();
  for (int i = 0; i < 3; ++i)
    t.translation[i] =
        rng.uniform(-spec.translation_range, spec.translation_range);
  return t;
}

PointCloud crop_cloud(const PointCloud& c, const Eigen::Vector3d& axis,
                      CropKind kind, double keep_fraction) {
  if (kind == CropKind::None || keep_fraction >= 1.0) return c;
  if (c.empty()) throw DegenerateCloudError("crop_cloud: empty cloud");
  const int n = static_cast<int>(c.size());
  const int keep = std::max(1, static_cast<int>(std::lround(keep_fraction * n)));

  std::vector<double> score(n);
  if (kind == CropKind::HalfSpace) {
    for (int i = 0; i < n; ++i) score[i] = c.points[i].dot(axis);
  } else {
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (const auto& p : c.points) centroid += p;
    centroid /= n;
    for (int i = 0; i < n; ++i) {
      const Eigen::Vector3d d = c.points[i] - centroid;
      const double len = d.norm();
      // Larger cosine = smaller angle from the axis; score accordingly.
      score[i] = len > 0.0 ? d.dot(axis) / len : 1.0;
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return a < b;
  });
  order.resize(keep);
  std::sort(order.begin(), order.end());  // original point order

  PointCloud out;
  out.points.reserve(keep);
  for (int idx : order) out.points.push_back(c.points[idx]);
  if (c.has_normals()) {
    out.normals.reserve(keep);
    for (int idx : order) out.normals.push_back(c.normals[idx]);
  }
  return out;
}

BenchmarkPair make_pair(const PointCloud& base, const PairSpec& spec) {
  if (static_cast<int>(base.size()) < spec.points)
    throw Error("make_pair: base cloud smaller than requested point count");
  if (spec.crop != CropKind::None &&
      (spec.overlap <= 0.0 || spec.overlap > 1.0))
    throw Error("make_pair: overlap must be in (0, 1]");

  auto [scaled, record] = unit_scale(base);
  (void)record;

  Pcg32 dir_rng(spec.seed, 1);
  Pcg32 gt_rng(spec.seed, 2);
  Pcg32 noise_rng(spec.seed, 3);
  Pcg32 outlier_rng(spec.seed, 4);
  Pcg32 fps_rng(spec.seed, 5);

  const Eigen::Vector3d axis = dir_rng.unit_vector();
  const double keep_fraction =
      spec.crop == CropKind::None ? 1.0 : 1.0 / (2.0 - spec.overlap);
  const PointCloud source_region =
      crop_cloud(scaled, axis, spec.crop, keep_fraction);
  const PointCloud target_region =
      crop_cloud(scaled, -axis, spec.crop, keep_fraction);
  if (static_cast<int>(source_region.size()) < spec.points / 2 ||
      static_cast<int>(target_region.size()) < spec.points / 2)
    throw OverlapInfeasibleError("make_pair: crop leaves too few points");

  const std::uint64_t fps_seed =
      (static_cast<std::uint64_t>(fps_rng.next_u32()) << 32) |
      fps_rng.next_u32();
  BenchmarkPair pair;
  pair.provenance = spec;
  pair.target = farthest_point_sample(target_region, spec.points, fps_seed);
  const PointCloud source_aligned =
      farthest_point_sample(source_region, spec.points, fps_seed);

  pair.gt = random_transform(spec, gt_rng);
  pair.source = pair.gt.inverse().apply(source_aligned);

  if (spec.noise_sigma > 0.0) {
    for (auto& p : pair.source.points) {
      for (int ax = 0; ax < 3; ++ax)
        p[ax] += spec.noise_sigma * noise_rng.normal();
    }
  }

  if (spec.outlier_fraction > 0.0 && spec.outlier_fraction < 1.0) {
    const int n = static_cast<int>(pair.source.size());
    const int count = static_cast<int>(
        std::llround(spec.outlier_fraction * static_cast<double>(n)));
    // Partial Fisher-Yates over the index array for `count` distinct picks.
    std::vector<int> indices(n);
    std::iota(indices.begin(), indices.end(), 0);
    for (int i = 0; i < count; ++i) {
      const int j = i + static_cast<int>(outlier_rng.next_below(
                            static_cast<std::uint32_t>(n - i)));
      std::swap(indices[i], indices[j]);
      auto& p = pair.source.points[indices[i]];
      for (int ax = 0; ax < 3; ++ax) p[ax] = outlier_rng.uniform(-1.0, 1.0);
    }
  }
  return pair;
}

PointCloud synthetic_blob(int n, std::uint64_t seed) {
  if (n < 1) throw Error("synthetic_blob: n must be >= 1");
  Pcg32 rng(seed, 6);
  const Eigen::Vector3d lump_axis = Eigen::Vector3d(0.36, 0.48, 0.8).normalized();

  PointCloud cloud;
  cloud.points.reserve(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d dir = rng.unit_vector();
    const double theta = std::acos(std::clamp(dir.z(), -1.0, 1.0));
    const double phi = std::atan2(dir.y(), dir.x());
    const double r =
        1.0 + 0.22 * std::sin(2.0 * theta + 0.7) * std::cos(3.0 * phi + 0.4) +
        0.13 * std::cos(4.0 * theta - 0.3) * std::sin(2.0 * phi + 1.1) +
        0.09 * std::sin(5.0 * phi - 0.9);
    Eigen::Vector3d p = (r * dir).cwiseProduct(Eigen::Vector3d(1.0, 0.78, 0.62));
    p += 0.35 * std::exp(-8.0 * (1.0 - dir.dot(lump_axis))) * dir;
    cloud.points.push_back(p);
  }
  return cloud;
}

}  // namespace raylign
