#include "raylign/sampling.hpp"

#include <cmath>

#include "raylign/errors.hpp"

namespace raylign {

Eigen::Vector3d sample_sphere_point(const BoundingSphere& sphere, Pcg32& rng) {
  if (sphere.radius <= 0.0)
    throw Error("sample_sphere_point: radius must be positive");
  const double u = rng.uniform(-1.0, 1.0);
  const double alpha = rng.uniform(0.0, 2.0 * M_PI);
  const double s = sphere.radius * std::sqrt(std::max(0.0, 1.0 - u * u));
  return sphere.center + Eigen::Vector3d(s * std::cos(alpha),
                                         s * std::sin(alpha),
                                         sphere.radius * u);
}

namespace {

Eigen::Vector3d ball_point(double radius, Pcg32& rng) {
  const Eigen::Vector3d dir = rng.unit_vector();
  const double r = radius * std::cbrt(rng.next_double());
  return r * dir;
}

Chord draw_chord(const BoundingSphere& sphere, SamplerKind kind,
                 const PointCloud& source, const PointCloud& target,
                 Pcg32& rng, double perturb_scale) {
  Chord c;
  switch (kind) {
    case SamplerKind::SphereChord:
      c.a = sample_sphere_point(sphere, rng);
      c.b = sample_sphere_point(sphere, rng);
      break;
    case SamplerKind::BoxPointDirection: {
      Eigen::Vector3d p;
      for (int ax = 0; ax < 3; ++ax)
        p[ax] = sphere.center[ax] +
                rng.uniform(-sphere.radius, sphere.radius);
      const Eigen::Vector3d dir = rng.unit_vector();
      // The sampled line is unbounded; +-2r endpoints guarantee the segment
      // spans the sphere.
      c.a = p - 2.0 * sphere.radius * dir;
      c.b = p + 2.0 * sphere.radius * dir;
      break;
    }
    case SamplerKind::CloudPairPerturbed: {
      if (source.empty() || target.empty())
        throw DegenerateCloudError("CloudPairPerturbed needs non-empty clouds");
      const auto& ps = source.points[rng.next_below(
          static_cast<std::uint32_t>(source.size()))];
      const auto& pt = target.points[rng.next_below(
          static_cast<std::uint32_t>(target.size()))];
      c.a = ps + ball_point(perturb_scale * sphere.radius, rng);
      c.b = pt + ball_point(perturb_scale * sphere.radius, rng);
      break;
    }
  }
  return c;
}

}  // namespace

std::vector<Chord> sample_chords(const BoundingSphere& sphere, int count,
                                 SamplerKind kind, const PointCloud& source,
                                 const PointCloud& target, Pcg32& rng,
                                 double perturb_scale) {
  if (count < 1) throw Error("sample_chords: count must be >= 1");
  const double min_sep = 1e-9 * sphere.radius;

  std::vector<Chord> chords;
  chords.reserve(count);
  for (int i = 0; i < count; ++i) {
    Chord c;
    bool ok = false;
    for (int attempt = 0; attempt < 100; ++attempt) {
      c = draw_chord(sphere, kind, source, target, rng, perturb_scale);
      if ((c.b - c.a).norm() > min_sep) {
        ok = true;
        break;
      }
    }
    if (!ok) throw Error("sample_chords: degenerate chord after 100 retries");
    chords.push_back(c);
  }
  return chords;
}

}  // namespace raylign
