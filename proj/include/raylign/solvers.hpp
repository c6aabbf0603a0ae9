#pragma once

#include <cstdint>
#include <vector>

#include "raylign/geometry.hpp"
#include "raylign/intersection.hpp"
#include "raylign/loss.hpp"
#include "raylign/sampling.hpp"

namespace raylign {

struct SolverConfig {
  int max_iterations = 300;
  double learning_rate = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int lines_per_iteration = 15000;
  double convergence_tol = 1e-6;  // stop when the parameter step norm drops below
  bool resample_lines = true;     // fresh chords every iteration
  bool recompute_sphere = true;   // re-cover transformed source + target
  SamplerKind sampler = SamplerKind::SphereChord;
  double sampler_perturb_scale = 0.05;
  // Use the printed psi-as-weight variant instead of the IRLS majorizer
  // weight in the SVD surrogate.
  bool svd_printed_psi_weight = false;
  std::uint64_t seed = 0;
  int jobs = 0;  // loss evaluation threads, 0 = hardware concurrency
};

struct TraceRecord {
  int iteration = 0;
  double loss = 0.0;
  double d_med = 0.0;
  Se3Params params;
  double seconds = 0.0;  // wall time since solve start
};

struct SolveTrace {
  std::vector<TraceRecord> records;
};

struct SolveResult {
  RigidTransform transform;
  SolveTrace trace;
};

enum class Objective { LineLoss, Chamfer, ChamferWelsch };

/// Adam on the se(3) left-increment chart: per iteration the bounding sphere
/// is recomputed, chords resampled, the loss and its gradient evaluated, and
/// the chart re-centered via T <- exp(step) * T. Deterministic for a given
/// seed. Returns the best recorded iterate: smallest d_med for the
/// adaptive-nu objectives (their raw losses are not comparable across
/// iterations because nu and the matched-pair counts change), smallest loss
/// for the plain Chamfer objective.
SolveResult solve_first_order(const PointCloud& source,
                              const PointCloud& target,
                              const RigidTransform& initial,
                              Objective objective, const SolverConfig& config,
                              const WelschParams& welsch_params = {},
                              const IntersectionParams& intersection_params = {});

/// Closed-form weighted Procrustes fit of y ~ R x + t.
/// Throws RankDeficiencyError for fewer than 3 pairs; the SVD reflection fix
/// keeps det(R) = +1 on degenerate configurations.
RigidTransform weighted_procrustes(const std::vector<Eigen::Vector3d>& x,
                                   const std::vector<Eigen::Vector3d>& y,
                                   const std::vector<double>& weights);

/// Alternates the line-intersection matching with a closed-form weighted SVD
/// update, using the Welsch majorization weight exp(-d^2/2nu^2) * w_l per
/// matched pair (the printed psi * w_l variant sits behind
/// config.svd_printed_psi_weight).
SolveResult solve_svd_surrogate(const PointCloud& source,
                                const PointCloud& target,
                                const RigidTransform& initial,
                                const SolverConfig& config,
                                const WelschParams& welsch_params = {},
                                const IntersectionParams& intersection_params = {});

/// Classic point-to-point ICP: closest-point matching against the target's
/// spatial index plus a closed-form SVD update per iteration.
SolveResult solve_icp(const PointCloud& source, const PointCloud& target,
                      const RigidTransform& initial,
                      const SolverConfig& config);

}  // namespace raylign
