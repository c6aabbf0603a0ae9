#include <doctest.h>

#include <cmath>

#include "raylign/evaluation.hpp"
#include "raylign/rng.hpp"
#include "support/test_shapes.hpp"

using namespace raylign;

TEST_CASE("rotation angle trace formula") {
  CHECK(rotation_angle(Eigen::Matrix3d::Identity()) == 0.0);

  Eigen::Matrix3d rz90;
  rz90 << 0, -1, 0, 1, 0, 0, 0, 0, 1;  // trace = 1
  CHECK(rotation_angle(rz90) == doctest::Approx(90.0).epsilon(1e-12));

  Eigen::Matrix3d rx180;
  rx180 << 1, 0, 0, 0, -1, 0, 0, 0, -1;  // trace = -1
  CHECK(rotation_angle(rx180) == doctest::Approx(180.0).epsilon(1e-12));
}

TEST_CASE("evaluate on exact and translated estimates") {
  const PointCloud source = shapes::random_ball_cloud(50, 61);
  const RigidTransform gt = shapes::random_rigid(62, 0.8, 0.5);

  SUBCASE("exact estimate is all zero") {
    const EvalReport r = evaluate(gt, gt, source);
    CHECK(r.err_r_deg == 0.0);
    CHECK(r.err_t_l1 == 0.0);
    CHECK(r.err_t_l2 == 0.0);
    CHECK(r.err_pw_l1 == 0.0);
    CHECK(r.err_pw_l2 == 0.0);
  }

  SUBCASE("pure translation offset") {
    RigidTransform est = gt;
    est.translation += Eigen::Vector3d(0.1, 0.0, 0.0);
    const EvalReport r = evaluate(gt, est, source);
    CHECK(r.err_r_deg < 1e-12);
    CHECK(r.err_t_l1 == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(r.err_t_l2 == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(r.err_pw_l1 == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(r.err_pw_l2 == doctest::Approx(0.1).epsilon(1e-12));
  }

  SUBCASE("matches a direct per-point evaluation") {
    const RigidTransform est = shapes::random_rigid(63, 0.8, 0.5);
    const EvalReport r = evaluate(gt, est, source);
    double sum1 = 0.0, sum2 = 0.0;
    for (const auto& p : source.points) {
      const Eigen::Vector3d d = (gt.rotation * p + gt.translation) -
                                (est.rotation * p + est.translation);
      sum1 += std::abs(d.x()) + std::abs(d.y()) + std::abs(d.z());
      sum2 += d.norm();
    }
    CHECK(r.err_pw_l1 ==
          doctest::Approx(sum1 / source.size()).epsilon(1e-12));
    CHECK(r.err_pw_l2 ==
          doctest::Approx(sum2 / source.size()).epsilon(1e-12));
    // Rotation error is symmetric in its arguments.
    CHECK(rotation_angle(gt.rotation.transpose() * est.rotation) ==
          doctest::Approx(
              rotation_angle(est.rotation.transpose() * gt.rotation))
              .epsilon(1e-9));
    // Norm inequalities per point carry to the means.
    CHECK(r.err_pw_l2 <= r.err_pw_l1 + 1e-12);
    CHECK(r.err_pw_l1 <= std::sqrt(3.0) * r.err_pw_l2 + 1e-12);
  }

  SUBCASE("invariant to source re-indexing") {
    const RigidTransform est = shapes::random_rigid(64, 0.8, 0.5);
    PointCloud shuffled = source;
    std::reverse(shuffled.points.begin(), shuffled.points.end());
    CHECK(evaluate(gt, est, source).err_pw_l2 ==
          doctest::Approx(evaluate(gt, est, shuffled).err_pw_l2)
              .epsilon(1e-12));
  }
}

TEST_CASE("alpha recall counting") {
  auto report_with = [](double pw_l2) {
    EvalReport r;
    r.err_pw_l2 = pw_l2;
    return r;
  };

  SUBCASE("all-zero reports recall 1 for any positive alpha") {
    const std::vector<EvalReport> reports(5);
    const RecallCurve curve = alpha_recall(reports, {0.1, 0.2});
    CHECK(curve.recalls == std::vector<double>{1.0, 1.0});
  }
  SUBCASE("mixed errors") {
    const std::vector<EvalReport> reports = {report_with(0.1),
                                             report_with(0.2),
                                             report_with(0.3)};
    const RecallCurve curve = alpha_recall(reports, {0.25});
    CHECK(curve.recalls[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("alpha zero counts nothing (strict inequality)") {
    const std::vector<EvalReport> reports(4);
    const RecallCurve curve = alpha_recall(reports, {0.0});
    CHECK(curve.recalls[0] == 0.0);
  }
  SUBCASE("recall is non-decreasing in alpha") {
    Pcg32 rng(65, 91);
    std::vector<EvalReport> reports;
    for (int i = 0; i < 40; ++i)
      reports.push_back(report_with(rng.uniform(0.0, 1.0)));
    std::vector<double> alphas;
    for (int i = 0; i <= 20; ++i) alphas.push_back(0.05 * i);
    const RecallCurve curve = alpha_recall(reports, alphas);
    for (std::size_t i = 1; i < curve.recalls.size(); ++i)
      CHECK(curve.recalls[i] >= curve.recalls[i - 1]);
  }
}
