#include <doctest.h>

#include <cmath>

#include "raylign/errors.hpp"
#include "raylign/loss.hpp"
#include "raylign/rng.hpp"
#include "support/oracles.hpp"
#include "support/test_shapes.hpp"

using namespace raylign;

namespace {

std::vector<Chord> random_chords(const PointCloud& a, const PointCloud& b,
                                 int count, std::uint64_t seed) {
  const BoundingSphere sphere = bounding_sphere(a, b);
  Pcg32 rng(seed, 81);
  return sample_chords(sphere, count, SamplerKind::SphereChord, a, b, rng);
}

}  // namespace

TEST_CASE("welsch function") {
  CHECK(welsch(0.0, 0.7) == 0.0);
  CHECK(welsch(0.7, 0.7) ==
        doctest::Approx(0.3934693402873666).epsilon(1e-14));
  CHECK(welsch(100.0 * 0.3, 0.3) > 0.9999);
  CHECK(welsch_derivative(0.0, 0.5) == 0.0);
  // Derivative against central differences.
  const double h = 1e-6;
  for (double x : {0.1, 0.5, 1.3, 4.0}) {
    const double numeric = (welsch(x + h, 0.8) - welsch(x - h, 0.8)) / (2 * h);
    CHECK(welsch_derivative(x, 0.8) == doctest::Approx(numeric).epsilon(1e-6));
  }
  CHECK_THROWS_AS(welsch(1.0, 0.0), Error);
}

TEST_CASE("line loss vanishes on identical clouds") {
  const PointCloud cloud = shapes::random_ball_cloud(60, 21);
  const auto chords = random_chords(cloud, cloud, 80, 5);
  IntersectionParams params;
  params.delta = 0.25;
  const LossReport report =
      line_loss(RigidTransform::identity(), cloud, cloud, chords, {0.5, 0.0},
                params, 1);
  CHECK(report.value == 0.0);
  CHECK(report.gradient.norm() < 1e-9);
  CHECK(report.lines_used + report.lines_skipped ==
        static_cast<int>(chords.size()));

  const auto assembly =
      assemble_line_loss(RigidTransform::identity(), cloud, cloud, chords,
                         {0.5, 0.0}, params, 1);
  for (const auto& term : assembly.terms) CHECK(term.weight == 1.0);
}

TEST_CASE("per-chord weight follows the count gap") {
  // Chord along x. Source has 3 cylinder points, target 1; with raw
  // candidates |S_l| = 3 and |T_l| = 1 so w_l = exp(-1).
  PointCloud source, target;
  source.points = {{1, 0.01, 0}, {2, -0.01, 0}, {3, 0.01, 0},
                   {0, 5, 0},    {5, 5, 0},     {0, -5, 0}};
  target.points = {{5, 0.01, 0}, {0, 5, 0}, {5, 5, 0}, {0, -5, 0}};
  std::vector<Chord> chords{{{-1, 0, 0}, {10, 0, 0}}};
  IntersectionParams params;
  params.delta = 0.1;
  params.mode = IntersectionMode::AllCandidates;
  const auto assembly =
      assemble_line_loss(RigidTransform::identity(), source, target, chords,
                         {0.5, 0.0}, params, 1);
  REQUIRE(assembly.lines_used == 1);
  CHECK(assembly.terms[0].source_count == 3);
  CHECK(assembly.terms[0].target_count == 1);
  CHECK(assembly.terms[0].weight ==
        doctest::Approx(0.36787944117144233).epsilon(1e-15));
  CHECK(assembly.terms[0].pairs.size() == 4);
}

TEST_CASE("line loss matches the brute-force oracle") {
  Pcg32 rng(22, 82);
  int compared = 0;
  for (int trial = 0; trial < 12; ++trial) {
    const PointCloud source = shapes::random_ball_cloud(
        10 + static_cast<int>(rng.next_below(15)), 2000 + trial);
    const PointCloud target = shapes::random_ball_cloud(
        10 + static_cast<int>(rng.next_below(15)), 2100 + trial);
    const RigidTransform t = shapes::random_rigid(2200 + trial, 0.6, 0.3);
    const auto chords = random_chords(t.apply(source), target, 40,
                                      2300 + trial);
    IntersectionParams params;
    params.delta = rng.uniform(0.2, 0.5);
    const double nu0 = rng.uniform(0.2, 1.5);

    std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>> chord_pairs;
    for (const auto& c : chords) chord_pairs.emplace_back(c.a, c.b);
    const double expected =
        oracle::line_loss_value(t.rotation, t.translation, source.points,
                                target.points, chord_pairs, nu0, params.delta,
                                params.k);
    if (expected < 0.0) continue;  // all chords missed; nothing to compare

    const LossReport report =
        line_loss(t, source, target, chords, {nu0, 0.0}, params, 1);
    CHECK(report.value ==
          doctest::Approx(expected).epsilon(1e-10));
    ++compared;
  }
  CHECK(compared > 0);
}

TEST_CASE("loss value is bit-identical across thread counts") {
  const PointCloud source = shapes::random_ball_cloud(80, 23);
  const PointCloud target = shapes::random_ball_cloud(90, 24);
  const RigidTransform t = shapes::random_rigid(25, 0.4, 0.2);
  const auto chords = random_chords(t.apply(source), target, 200, 26);
  IntersectionParams params;
  params.delta = 0.3;
  const LossReport one = line_loss(t, source, target, chords, {0.5, 0.0},
                                   params, 1);
  const LossReport four = line_loss(t, source, target, chords, {0.5, 0.0},
                                    params, 4);
  CHECK(one.value == four.value);
  CHECK((one.gradient - four.gradient).norm() == 0.0);
  CHECK(one.d_med == four.d_med);
}

TEST_CASE("joint rigid motion leaves the loss unchanged") {
  const PointCloud source = shapes::random_ball_cloud(50, 27);
  const PointCloud target = shapes::random_ball_cloud(55, 28);
  const RigidTransform t = shapes::random_rigid(29, 0.5, 0.2);
  const auto chords = random_chords(t.apply(source), target, 120, 30);
  IntersectionParams params;
  params.delta = 0.35;
  const LossReport base = line_loss(t, source, target, chords, {0.5, 0.0},
                                    params, 1);

  for (int trial = 0; trial < 20; ++trial) {
    const RigidTransform g = shapes::random_rigid(3100 + trial, 2.0, 1.5);
    std::vector<Chord> moved_chords;
    for (const auto& c : chords)
      moved_chords.push_back({g.apply(c.a), g.apply(c.b)});
    const LossReport moved =
        line_loss(compose(g, t), source, g.apply(target), moved_chords,
                  {0.5, 0.0}, params, 1);
    CHECK(moved.value == doctest::Approx(base.value).epsilon(1e-9));
    CHECK(moved.lines_used == base.lines_used);
  }
}

TEST_CASE("all chords skipped raises the dedicated error") {
  PointCloud source, target;
  source.points = {{0, 0, 0}, {0.1, 0, 0}, {0, 0.1, 0}};
  target.points = {{0, 0, 5}, {0.1, 0, 5}, {0, 0.1, 5}};
  // One chord far away from both clusters.
  std::vector<Chord> chords{{{10, 10, -5}, {10, 10, 10}}};
  IntersectionParams params;
  params.delta = 0.05;
  CHECK_THROWS_AS(line_loss(RigidTransform::identity(), source, target,
                            chords, {0.5, 0.0}, params, 1),
                  NoIntersectionsError);
}

TEST_CASE("chamfer loss examples") {
  SUBCASE("identical clouds vanish") {
    const PointCloud cloud = shapes::random_ball_cloud(40, 33);
    const LossReport report =
        chamfer_loss(RigidTransform::identity(), cloud, cloud,
                     ChamferMetric::SquaredL2, {0.5, 0.0});
    CHECK(report.value == 0.0);
    CHECK(report.gradient.norm() == 0.0);
  }
  SUBCASE("single pair gives (1+1)/2") {
    PointCloud source, target;
    source.points = {{0, 0, 0}};
    target.points = {{1, 0, 0}};
    const LossReport report =
        chamfer_loss(RigidTransform::identity(), source, target,
                     ChamferMetric::SquaredL2, {0.5, 0.0});
    CHECK(report.value == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("matches the brute-force double loop") {
    Pcg32 rng(34, 83);
    for (int trial = 0; trial < 20; ++trial) {
      const PointCloud source = shapes::random_ball_cloud(25, 3500 + trial);
      const PointCloud target = shapes::random_ball_cloud(30, 3600 + trial);
      const RigidTransform t = shapes::random_rigid(3700 + trial, 1.0, 0.5);
      for (ChamferMetric metric :
           {ChamferMetric::SquaredL2, ChamferMetric::Welsch}) {
        const double expected = oracle::chamfer_value(
            t.rotation, t.translation, source.points, target.points,
            metric == ChamferMetric::Welsch, 0.5);
        const LossReport report =
            chamfer_loss(t, source, target, metric, {0.5, 0.0});
        CHECK(report.value == doctest::Approx(expected).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("analytic gradients match frozen finite differences") {
  Pcg32 rng(35, 84);
  double worst_chamfer = 0.0, worst_line = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const PointCloud source = shapes::random_ball_cloud(30, 3800 + trial);
    const PointCloud target = shapes::random_ball_cloud(30, 3900 + trial);
    const RigidTransform t = shapes::random_rigid(4000 + trial, 0.5, 0.3);

    const auto chamfer = assemble_chamfer_loss(
        t, source, target, ChamferMetric::SquaredL2, {0.5, 0.0});
    worst_chamfer =
        std::max(worst_chamfer, gradient_check(chamfer.objective, t, 1e-5));

    const auto chords = random_chords(t.apply(source), target, 50,
                                      4100 + trial);
    IntersectionParams params;
    params.delta = 0.35;
    const auto line = assemble_line_loss(t, source, target, chords,
                                         {0.5, 0.0}, params, 1);
    if (!line.empty())
      worst_line =
          std::max(worst_line, gradient_check(line.objective, t, 1e-5));
  }
  CHECK(worst_chamfer < 1e-5);
  CHECK(worst_line < 1e-4);
}

TEST_CASE("zero-loss configuration passes the gradient check trivially") {
  const PointCloud cloud = shapes::random_ball_cloud(30, 36);
  const RigidTransform id = RigidTransform::identity();
  const auto chamfer = assemble_chamfer_loss(id, cloud, cloud,
                                             ChamferMetric::SquaredL2,
                                             {0.5, 0.0});
  CHECK(chamfer.objective.gradient(id).norm() == 0.0);
  CHECK(gradient_check(chamfer.objective, id, 1e-5) < 1e-9);
}

TEST_CASE("loss is nonnegative and weights bounded") {
  Pcg32 rng(37, 85);
  for (int trial = 0; trial < 10; ++trial) {
    const PointCloud source = shapes::random_ball_cloud(30, 4200 + trial);
    const PointCloud target = shapes::random_ball_cloud(30, 4300 + trial);
    const RigidTransform t = shapes::random_rigid(4400 + trial, 1.2, 0.6);
    const auto chords = random_chords(t.apply(source), target, 60,
                                      4500 + trial);
    IntersectionParams params;
    params.delta = 0.4;
    const auto assembly = assemble_line_loss(t, source, target, chords,
                                             {0.5, 0.0}, params, 1);
    if (assembly.empty()) continue;
    CHECK(assembly.objective.value(t) >= 0.0);
    for (const auto& term : assembly.terms) {
      CHECK(term.weight > 0.0);
      CHECK(term.weight <= 1.0);
      if (term.source_count == term.target_count) CHECK(term.weight == 1.0);
      const double expected = std::exp(
          -std::abs((static_cast<double>(term.source_count) -
                     static_cast<double>(term.target_count)) / 2.0));
      CHECK(term.weight == expected);
    }
  }
}
