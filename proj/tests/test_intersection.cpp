#include <doctest.h>

#include <cmath>

#include "raylign/errors.hpp"
#include "raylign/intersection.hpp"
#include "raylign/kdtree.hpp"
#include "support/oracles.hpp"
#include "support/test_shapes.hpp"

using namespace raylign;

TEST_CASE("default params derive delta from d_nei") {
  SUBCASE("grid cloud") {
    PointCloud c;
    const double h = 0.25;
    for (int x = 0; x < 5; ++x)
      for (int y = 0; y < 5; ++y) c.points.emplace_back(h * x, h * y, 0.0);
    const IntersectionParams params = default_params(c);
    CHECK(params.k == 2);
    CHECK(params.delta ==
          doctest::Approx(0.5 * std::sqrt(3.0) * knn_stats(c, 2))
              .epsilon(1e-15));
  }
  SUBCASE("degenerate cloud errors") {
    PointCloud c;
    c.points = {{1, 1, 1}, {1, 1, 1}, {1, 1, 1}};
    CHECK_THROWS_AS(default_params(c), DegenerateCloudError);
  }
}

TEST_CASE("candidate membership rules") {
  // Exactly representable coordinates so the boundary test is bit-exact.
  PointCloud c;
  c.points = {{0.5, 0.0, 0.0},    // on the line
              {0.5, 0.25, 0.0},   // exactly delta away (closed cylinder)
              {0.5, 0.5, 0.0},    // outside the cylinder
              {2.0, 0.0, 0.0}};   // beyond the segment end
  const KdTree tree(c.points);
  Chord chord{{0, 0, 0}, {1, 0, 0}};
  const auto cands = candidate_points(chord, c, tree, 0.25);
  CHECK(cands == std::vector<int>{0, 1});
}

TEST_CASE("candidates equal brute force on random configurations") {
  Pcg32 rng(3, 71);
  for (int trial = 0; trial < 100; ++trial) {
    const PointCloud c = shapes::random_ball_cloud(
        20 + static_cast<int>(rng.next_below(150)), 900 + trial);
    const KdTree tree(c.points);
    Chord chord{rng.unit_vector() * 1.3, rng.unit_vector() * 1.3};
    if ((chord.b - chord.a).norm() < 1e-6) continue;
    const double delta = rng.uniform(0.05, 0.4);
    CHECK(candidate_points(chord, c, tree, delta) ==
          oracle::cylinder_candidates(c.points, chord.a, chord.b, delta));
  }
}

TEST_CASE("zero-distance candidate becomes neighbor midpoint") {
  // p0 sits on the line; its two neighbors sit at equal distance c on either
  // side, so the combination drops p0 and averages the neighbors.
  PointCloud cloud;
  cloud.points = {{0.5, 0.0, 0.0}, {0.45, 0.1, 0.0}, {0.55, -0.1, 0.0}};
  const KdTree tree(cloud.points);
  Chord chord{{0, 0, 0}, {1, 0, 0}};
  IntersectionParams params;
  params.delta = 0.2;
  const IntersectionSet set = intersect(chord, cloud, tree, params);
  REQUIRE(set.size() == 3);  // each point qualifies with the others as nbrs
  const Eigen::Vector3d mid =
      0.5 * (cloud.points[1] + cloud.points[2]);
  bool found = false;
  for (const auto& p : set.points)
    if ((p - mid).norm() < 1e-12) found = true;
  CHECK(found);
}

TEST_CASE("all members on the line fall back to the centroid") {
  PointCloud cloud;
  cloud.points = {{0.3, 0, 0}, {0.5, 0, 0}, {0.7, 0, 0}};
  const KdTree tree(cloud.points);
  Chord chord{{0, 0, 0}, {1, 0, 0}};
  IntersectionParams params;
  params.delta = 0.1;
  const IntersectionSet set = intersect(chord, cloud, tree, params);
  REQUIRE(set.size() == 3);
  const Eigen::Vector3d centroid =
      (cloud.points[0] + cloud.points[1] + cloud.points[2]) / 3.0;
  for (const auto& p : set.points) CHECK((p - centroid).norm() < 1e-12);
}

TEST_CASE("equal distances give the neighborhood centroid") {
  // All three members at the same perpendicular distance.
  PointCloud cloud;
  cloud.points = {{0.4, 0.1, 0.0}, {0.5, -0.1, 0.0}, {0.6, 0.0, 0.1}};
  const KdTree tree(cloud.points);
  Chord chord{{0, 0, 0}, {1, 0, 0}};
  IntersectionParams params;
  params.delta = 0.2;
  const IntersectionSet set = intersect(chord, cloud, tree, params);
  REQUIRE(!set.empty());
  const Eigen::Vector3d centroid =
      (cloud.points[0] + cloud.points[1] + cloud.points[2]) / 3.0;
  for (const auto& p : set.points) CHECK((p - centroid).norm() < 1e-9);
}

TEST_CASE("convex-combination matches the brute-force oracle") {
  Pcg32 rng(6, 72);
  for (int trial = 0; trial < 100; ++trial) {
    const PointCloud cloud = shapes::random_ball_cloud(50, 1200 + trial);
    const KdTree tree(cloud.points);
    Chord chord{rng.unit_vector() * 1.2, rng.unit_vector() * 1.2};
    if ((chord.b - chord.a).norm() < 1e-6) continue;
    IntersectionParams params;
    params.delta = rng.uniform(0.1, 0.45);
    const IntersectionSet got = intersect(chord, cloud, tree, params);
    auto expected = oracle::intersect_convex(cloud.points, chord.a, chord.b,
                                             params.delta, params.k);
    REQUIRE(got.size() == expected.size());
    // The oracle emits in candidate order; ours sorts along the chord.
    const Eigen::Vector3d dir = chord.direction();
    std::sort(expected.begin(), expected.end(),
              [&](const auto& p, const auto& q) {
                return (p - chord.a).dot(dir) < (q - chord.a).dot(dir);
              });
    for (std::size_t i = 0; i < got.size(); ++i)
      CHECK((got.points[i] - expected[i]).norm() < 1e-12);
  }
}

TEST_CASE("all-candidates mode emits raw candidates") {
  Pcg32 rng(13, 73);
  const PointCloud cloud = shapes::random_ball_cloud(80, 14);
  const KdTree tree(cloud.points);
  Chord chord{{-1.5, 0.05, 0.0}, {1.5, -0.03, 0.02}};
  IntersectionParams params;
  params.delta = 0.3;
  params.mode = IntersectionMode::AllCandidates;
  const IntersectionSet all = intersect(chord, cloud, tree, params);
  const auto expected =
      oracle::intersect_all(cloud.points, chord.a, chord.b, params.delta);
  CHECK(all.size() == expected.size());

  params.mode = IntersectionMode::ConvexCombination;
  const IntersectionSet convex = intersect(chord, cloud, tree, params);
  CHECK(convex.size() <= all.size());
}

TEST_CASE("emitted points satisfy the set invariants") {
  Pcg32 rng(15, 74);
  int emitted = 0;
  for (int trial = 0; trial < 200 && emitted < 500; ++trial) {
    const PointCloud cloud = shapes::random_ball_cloud(60, 1500 + trial);
    const KdTree tree(cloud.points);
    Chord chord{rng.unit_vector() * 1.2, rng.unit_vector() * 1.2};
    if ((chord.b - chord.a).norm() < 1e-6) continue;
    IntersectionParams params;
    params.delta = 0.35;
    const IntersectionSet set = intersect(chord, cloud, tree, params);
    const Eigen::Vector3d dir = chord.direction();
    double prev = -1e300;
    for (std::size_t i = 0; i < set.size(); ++i) {
      ++emitted;
      // Inside the cylinder.
      CHECK(oracle::point_line_distance(set.points[i], chord.a, chord.b) <=
            params.delta + 1e-9);
      // Sorted along the chord.
      const double proj = (set.points[i] - chord.a).dot(dir);
      CHECK(proj >= prev - 1e-12);
      prev = proj;
      // Neighborhood recorded: candidate + k neighbors.
      CHECK(set.source_indices[i].size() ==
            static_cast<std::size_t>(params.k + 1));
    }
  }
  CHECK(emitted > 0);
}

TEST_CASE("intersection is rigid-equivariant") {
  Pcg32 rng(16, 75);
  const PointCloud cloud = shapes::random_ball_cloud(60, 17);
  const KdTree tree(cloud.points);
  IntersectionParams params;
  params.delta = 0.3;
  for (int trial = 0; trial < 20; ++trial) {
    Chord chord{rng.unit_vector() * 1.2, rng.unit_vector() * 1.2};
    if ((chord.b - chord.a).norm() < 1e-6) continue;
    const RigidTransform g = shapes::random_rigid(30 + trial);

    const IntersectionSet plain = intersect(chord, cloud, tree, params);
    const PointCloud moved_cloud = g.apply(cloud);
    const KdTree moved_tree(moved_cloud.points);
    const Chord moved_chord{g.apply(chord.a), g.apply(chord.b)};
    const IntersectionSet moved =
        intersect(moved_chord, moved_cloud, moved_tree, params);

    REQUIRE(plain.size() == moved.size());
    for (std::size_t i = 0; i < plain.size(); ++i)
      CHECK((g.apply(plain.points[i]) - moved.points[i]).norm() < 1e-9);
  }
}
