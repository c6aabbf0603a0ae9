#pragma once

#include <utility>
#include <vector>

#include <Eigen/Core>

#include "raylign/geometry.hpp"
#include "raylign/intersection.hpp"
#include "raylign/sampling.hpp"

namespace raylign {

/// Robust scale: nu = nu0 * d_med, recomputed per evaluation from the
/// matched pair distances and treated as a constant by the gradient.
struct WelschParams {
  double nu0 = 0.5;
  double nu = 0.0;  // filled in by the loss assembly
};

/// psi_nu(x) = 1 - exp(-x^2 / (2 nu^2)), bounded in [0, 1).
double welsch(double x, double nu);

/// d/dx psi_nu(x) = (x / nu^2) exp(-x^2 / (2 nu^2)).
double welsch_derivative(double x, double nu);

enum class PairDirection { SourceToTarget, TargetToSource };

/// One matched intersection pair of a chord. source_base is the source-side
/// point expressed in the untransformed source frame (a fixed convex
/// combination of original source points), so the pair can be re-evaluated
/// at any transform with the combinatorics frozen.
struct MatchedPair {
  Eigen::Vector3d source_base;
  Eigen::Vector3d target_point;
  PairDirection direction = PairDirection::SourceToTarget;
};

/// Per-chord contribution: weight w_l = exp(-| (|S_l| - |T_l|) / 2 |) and the
/// nearest-point matches in both directions.
struct LineTerm {
  Chord chord;
  std::size_t source_count = 0;  // |S_l|
  std::size_t target_count = 0;  // |T_l|
  double weight = 1.0;           // w_l
  std::vector<MatchedPair> pairs;
};

enum class ChamferMetric { SquaredL2, Welsch };

/// The current iterate's objective with every combinatorial quantity frozen:
/// matches, per-chord weights, nu, and intersection combination coefficients.
/// Only the transform applied to each pair's base point varies, so the
/// objective is smooth and the analytic gradient is exact.
class FrozenObjective {
 public:
  struct Pair {
    Eigen::Vector3d base;    // source-side point, untransformed frame
    Eigen::Vector3d target;  // fixed target-side point
    double coeff = 1.0;      // per-pair weight (w_l for line terms)
  };

  std::vector<Pair> pairs;
  double normalizer = 1.0;   // mean denominator (lines used, or m+n)
  bool squared = false;      // squared L2 instead of Welsch
  double nu = 1.0;

  double value(const RigidTransform& t) const;
  /// Gradient with respect to a left-multiplicative se(3) increment at t,
  /// ordered (omega, v).
  Vector6d gradient(const RigidTransform& t) const;
  std::pair<double, Vector6d> value_and_gradient(const RigidTransform& t) const;
};

struct LossReport {
  double value = 0.0;
  Vector6d gradient = Vector6d::Zero();
  int lines_used = 0;
  int lines_skipped = 0;
  double d_med = 0.0;
};

/// Everything line_loss computes for one iterate; kept so solvers and tests
/// can reuse the matches (SVD surrogate) or re-evaluate under perturbed
/// transforms (gradient checks).
struct LineLossAssembly {
  std::vector<LineTerm> terms;  // surviving chords, in chord order
  int lines_used = 0;
  int lines_skipped = 0;
  double d_med = 0.0;
  double nu = 0.0;
  FrozenObjective objective;

  bool empty() const { return lines_used == 0; }
};

/// Intersects every chord with the transformed source and the target, matches
/// intersection points in both directions, computes w_l, d_med and nu, and
/// freezes the result. Chords with an empty intersection set on either side
/// are skipped. A single explicit params.delta > 0 applies to both clouds;
/// delta == 0 derives each cloud's delta via default_params.
LineLossAssembly assemble_line_loss(const RigidTransform& transform,
                                    const PointCloud& source,
                                    const PointCloud& target,
                                    const std::vector<Chord>& chords,
                                    const WelschParams& welsch_params,
                                    const IntersectionParams& params,
                                    int jobs = 0);

/// Mean over surviving chords of F_l = w_l * (sum of Welsch deviations of the
/// bidirectional matches). Throws NoIntersectionsError when every chord is
/// skipped.
LossReport line_loss(const RigidTransform& transform, const PointCloud& source,
                     const PointCloud& target, const std::vector<Chord>& chords,
                     const WelschParams& welsch_params,
                     const IntersectionParams& params, int jobs = 0);

/// Bidirectional closest-point objective, normalized by m + n.
/// SquaredL2 is the CD baseline; Welsch the CD-W baseline with
/// nu = nu0 * median matched distance.
LineLossAssembly assemble_chamfer_loss(const RigidTransform& transform,
                                       const PointCloud& source,
                                       const PointCloud& target,
                                       ChamferMetric metric,
                                       const WelschParams& welsch_params);

LossReport chamfer_loss(const RigidTransform& transform,
                        const PointCloud& source, const PointCloud& target,
                        ChamferMetric metric,
                        const WelschParams& welsch_params);

/// Central finite differences of the frozen objective over the 6 se(3)
/// coordinates; returns max over coordinates of
/// |analytic - numeric| / max(1, |numeric|).
double gradient_check(const FrozenObjective& objective,
                      const RigidTransform& transform, double step);

}  // namespace raylign
