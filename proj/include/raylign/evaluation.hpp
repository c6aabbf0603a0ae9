#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "raylign/geometry.hpp"

namespace raylign {

struct EvalReport {
  std::string pair_id;
  double err_r_deg = 0.0;
  double err_t_l1 = 0.0;
  double err_t_l2 = 0.0;
  double err_pw_l1 = 0.0;
  double err_pw_l2 = 0.0;
};

/// Rotation angle in degrees: arccos((tr(A) - 1) / 2), clamped against
/// roundoff. Range [0, 180].
double rotation_angle(const Eigen::Matrix3d& a);

/// Err_R = angle(R_gt^-1 R_est); Err_t and Err_pw under l1 and l2 norms,
/// with Err_pw the mean pointwise discrepancy over the source cloud.
EvalReport evaluate(const RigidTransform& gt, const RigidTransform& est,
                    const PointCloud& source);

enum class RecallMetric { PwL2, PwL1, RotationDeg, TL2, TL1 };

struct RecallCurve {
  std::vector<double> alphas;   // sorted ascending
  std::vector<double> recalls;  // same length, non-decreasing
};

/// recall(alpha) = fraction of reports whose metric is strictly below alpha.
RecallCurve alpha_recall(const std::vector<EvalReport>& reports,
                         std::vector<double> alphas,
                         RecallMetric metric = RecallMetric::PwL2);

}  // namespace raylign
