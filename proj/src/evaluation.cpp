#include "raylign/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "raylign/errors.hpp"

namespace raylign {

double rotation_angle(const Eigen::Matrix3d& a) {
  const double c = std::clamp((a.trace() - 1.0) * 0.5, -1.0, 1.0);
  return std::acos(c) * 180.0 / M_PI;
}

EvalReport evaluate(const RigidTransform& gt, const RigidTransform& est,
                    const PointCloud& source) {
  if (source.empty()) throw DegenerateCloudError("evaluate: empty source");

  EvalReport report;
  report.err_r_deg = rotation_angle(gt.rotation.transpose() * est.rotation);
  const Eigen::Vector3d dt = gt.translation - est.translation;
  report.err_t_l1 = dt.lpNorm<1>();
  report.err_t_l2 = dt.norm();

  double sum_l1 = 0.0, sum_l2 = 0.0;
  for (const auto& p : source.points) {
    const Eigen::Vector3d d = gt.apply(p) - est.apply(p);
    sum_l1 += d.lpNorm<1>();
    sum_l2 += d.norm();
  }
  const double n = static_cast<double>(source.size());
  report.err_pw_l1 = sum_l1 / n;
  report.err_pw_l2 = sum_l2 / n;
  return report;
}

namespace {

double metric_of(const EvalReport& r, RecallMetric metric) {
  switch (metric) {
    case RecallMetric::PwL2: return r.err_pw_l2;
    case RecallMetric::PwL1: return r.err_pw_l1;
    case RecallMetric::RotationDeg: return r.err_r_deg;
    case RecallMetric::TL2: return r.err_t_l2;
    case RecallMetric::TL1: return r.err_t_l1;
  }
  return r.err_pw_l2;
}

}  // namespace

RecallCurve alpha_recall(const std::vector<EvalReport>& reports,
                         std::vector<double> alphas, RecallMetric metric) {
  if (reports.empty()) throw Error("alpha_recall: no reports");
  std::sort(alphas.begin(), alphas.end());

  RecallCurve curve;
  curve.alphas = std::move(alphas);
  curve.recalls.reserve(curve.alphas.size());
  const double n = static_cast<double>(reports.size());
  for (double alpha : curve.alphas) {
    std::size_t hits = 0;
    for (const auto& r : reports)
      if (metric_of(r, metric) < alpha) ++hits;
    curve.recalls.push_back(static_cast<double>(hits) / n);
  }
  return curve;
}

}  // namespace raylign
