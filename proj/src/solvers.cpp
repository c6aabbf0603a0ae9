#include "raylign/solvers.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "raylign/errors.hpp"
#include "raylign/kdtree.hpp"
#include "raylign/rng.hpp"

namespace raylign {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Per-iteration chord generator with a dedicated RNG stream per
// (iteration, retry) so streams do not depend on how much randomness other
// parts consumed.
std::vector<Chord> iteration_chords(const SolverConfig& config,
                                    const BoundingSphere& sphere,
                                    const PointCloud& moved,
                                    const PointCloud& target, int iteration,
                                    int attempt) {
  Pcg32 rng(config.seed,
            (static_cast<std::uint64_t>(iteration) << 8) +
                static_cast<std::uint64_t>(attempt) + (1ULL << 40));
  return sample_chords(sphere, config.lines_per_iteration, config.sampler,
                       moved, target, rng, config.sampler_perturb_scale);
}

struct AdamState {
  Vector6d m = Vector6d::Zero();
  Vector6d v = Vector6d::Zero();
  int t = 0;

  Vector6d step(const Vector6d& gradient, const SolverConfig& c) {
    ++t;
    m = c.adam_beta1 * m + (1.0 - c.adam_beta1) * gradient;
    v = c.adam_beta2 * v +
        (1.0 - c.adam_beta2) * gradient.cwiseProduct(gradient).eval();
    const double m_corr = 1.0 - std::pow(c.adam_beta1, t);
    const double v_corr = 1.0 - std::pow(c.adam_beta2, t);
    Vector6d step;
    for (int i = 0; i < 6; ++i) {
      step[i] = -c.learning_rate * (m[i] / m_corr) /
                (std::sqrt(v[i] / v_corr) + c.adam_epsilon);
    }
    return step;
  }
};

}  // namespace

SolveResult solve_first_order(const PointCloud& source,
                              const PointCloud& target,
                              const RigidTransform& initial,
                              Objective objective, const SolverConfig& config,
                              const WelschParams& welsch_params,
                              const IntersectionParams& intersection_params) {
  if (config.max_iterations < 1 || config.learning_rate <= 0.0 ||
      config.lines_per_iteration < 1)
    throw Error("solve_first_order: invalid config");

  const auto start = Clock::now();
  const bool line_objective = (objective == Objective::LineLoss);

  // delta is rigid-invariant; derive it once per solve when auto.
  IntersectionParams iparams = intersection_params;

  SolveResult result;
  result.transform = initial;
  RigidTransform current = initial;
  AdamState adam;
  // Adaptive-nu losses are not comparable across iterations (nu and the
  // matched-pair counts both change), so those objectives pick the best
  // iterate by d_med; the plain quadratic Chamfer keeps best-by-loss.
  const bool best_by_dmed = (objective != Objective::Chamfer);
  double best_score = std::numeric_limits<double>::infinity();

  std::vector<Chord> chords;
  BoundingSphere sphere;
  bool have_sphere = false;
  int consecutive_failures = 0;

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    LossReport report;
    if (line_objective) {
      const PointCloud moved = current.apply(source);
      if (config.recompute_sphere || !have_sphere) {
        sphere = bounding_sphere(moved, target);
        have_sphere = true;
      }
      for (int attempt = 0;; ++attempt) {
        if (config.resample_lines || chords.empty() || attempt > 0)
          chords = iteration_chords(config, sphere, moved, target, iter,
                                    attempt);
        try {
          report = line_loss(current, source, target, chords, welsch_params,
                             iparams, config.jobs);
          consecutive_failures = 0;
          break;
        } catch (const NoIntersectionsError&) {
          ++consecutive_failures;
          if (consecutive_failures >= 5) throw;
        }
      }
    } else {
      const ChamferMetric metric = (objective == Objective::Chamfer)
                                       ? ChamferMetric::SquaredL2
                                       : ChamferMetric::Welsch;
      report = chamfer_loss(current, source, target, metric, welsch_params);
    }

    result.trace.records.push_back({iter, report.value, report.d_med,
                                    log_se3(current), seconds_since(start)});
    const double score = best_by_dmed ? report.d_med : report.value;
    if (score < best_score) {
      best_score = score;
      result.transform = current;
    }

    const Vector6d step = adam.step(report.gradient, config);
    current = compose(exp_se3(Se3Params::from_vec(step)), current);
    if (step.norm() < config.convergence_tol) break;
  }
  return result;
}

RigidTransform weighted_procrustes(const std::vector<Eigen::Vector3d>& x,
                                   const std::vector<Eigen::Vector3d>& y,
                                   const std::vector<double>& weights) {
  if (x.size() != y.size() || x.size() != weights.size())
    throw Error("weighted_procrustes: size mismatch");
  if (x.size() < 3)
    throw RankDeficiencyError("weighted_procrustes: need at least 3 pairs");

  double weight_sum = 0.0;
  Eigen::Vector3d cx = Eigen::Vector3d::Zero(), cy = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < x.size(); ++i) {
    weight_sum += weights[i];
    cx += weights[i] * x[i];
    cy += weights[i] * y[i];
  }
  if (weight_sum <= 0.0)
    throw RankDeficiencyError("weighted_procrustes: non-positive weight sum");
  cx /= weight_sum;
  cy /= weight_sum;

  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < x.size(); ++i)
    h += weights[i] * (x[i] - cx) * (y[i] - cy).transpose();

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0
                ? -1.0
                : 1.0;
  RigidTransform t;
  t.rotation = svd.matrixV() * d * svd.matrixU().transpose();
  t.translation = cy - t.rotation * cx;
  return t;
}

SolveResult solve_svd_surrogate(const PointCloud& source,
                                const PointCloud& target,
                                const RigidTransform& initial,
                                const SolverConfig& config,
                                const WelschParams& welsch_params,
                                const IntersectionParams& intersection_params) {
  if (config.max_iterations < 1 || config.lines_per_iteration < 1)
    throw Error("solve_svd_surrogate: invalid config");

  const auto start = Clock::now();
  SolveResult result;
  result.transform = initial;
  RigidTransform current = initial;
  double best_dmed = std::numeric_limits<double>::infinity();
  int consecutive_failures = 0;

  std::vector<Chord> chords;
  BoundingSphere sphere;
  bool have_sphere = false;

  std::vector<Eigen::Vector3d> xs, ys;
  std::vector<double> weights;

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    const PointCloud moved = current.apply(source);
    if (config.recompute_sphere || !have_sphere) {
      sphere = bounding_sphere(moved, target);
      have_sphere = true;
    }

    LineLossAssembly assembly;
    for (int attempt = 0;; ++attempt) {
      if (config.resample_lines || chords.empty() || attempt > 0)
        chords = iteration_chords(config, sphere, moved, target, iter, attempt);
      assembly = assemble_line_loss(current, source, target, chords,
                                    welsch_params, intersection_params,
                                    config.jobs);
      if (!assembly.empty()) {
        consecutive_failures = 0;
        break;
      }
      if (++consecutive_failures >= 5)
        throw NoIntersectionsError(
            "solve_svd_surrogate: every chord missed a cloud");
    }

    const double value = assembly.objective.value(current);
    result.trace.records.push_back({iter, value, assembly.d_med,
                                    log_se3(current), seconds_since(start)});
    if (assembly.d_med < best_dmed) {
      best_dmed = assembly.d_med;
      result.transform = current;
    }

    xs.clear();
    ys.clear();
    weights.clear();
    for (const auto& term : assembly.terms) {
      for (const auto& pair : term.pairs) {
        const double d =
            (current.apply(pair.source_base) - pair.target_point).norm();
        const double z = d / assembly.nu;
        const double w = config.svd_printed_psi_weight
                             ? welsch(d, assembly.nu) * term.weight
                             : std::exp(-0.5 * z * z) * term.weight;
        xs.push_back(pair.source_base);
        ys.push_back(pair.target_point);
        weights.push_back(w);
      }
    }

    const RigidTransform next = weighted_procrustes(xs, ys, weights);
    const Se3Params step = log_se3(compose(next, current.inverse()));
    current = next;
    if (step.vec().norm() < config.convergence_tol) {
      // Fixed point reached: the converged iterate is the answer.
      if (result.trace.records.size() <
          static_cast<std::size_t>(config.max_iterations)) {
        result.trace.records.push_back(
            {iter + 1, assembly.objective.value(current), assembly.d_med,
             log_se3(current), seconds_since(start)});
      }
      result.transform = current;
      break;
    }
  }
  return result;
}

SolveResult solve_icp(const PointCloud& source, const PointCloud& target,
                      const RigidTransform& initial,
                      const SolverConfig& config) {
  if (source.empty() || target.empty())
    throw DegenerateCloudError("solve_icp: empty cloud");
  if (source.size() < 3)
    throw RankDeficiencyError("solve_icp: need at least 3 source points");

  const auto start = Clock::now();
  const KdTree target_tree(target.points);

  SolveResult result;
  result.transform = initial;
  RigidTransform current = initial;
  double best_loss = std::numeric_limits<double>::infinity();

  std::vector<Eigen::Vector3d> matched(source.size());
  const std::vector<double> uniform(source.size(), 1.0);

  for (int iter = 0; iter < config.max_iterations; ++iter) {
    double sum_d2 = 0.0;
    std::vector<double> distances(source.size());
    for (std::size_t i = 0; i < source.size(); ++i) {
      const Eigen::Vector3d p = current.apply(source.points[i]);
      double dist = 0.0;
      const int j = target_tree.nearest(p, &dist);
      matched[i] = target.points[j];
      sum_d2 += dist * dist;
      distances[i] = dist;
    }
    const double value = sum_d2 / static_cast<double>(source.size());
    result.trace.records.push_back({iter, value, median(std::move(distances)),
                                    log_se3(current), seconds_since(start)});
    if (value < best_loss) {
      best_loss = value;
      result.transform = current;
    }

    const RigidTransform next =
        weighted_procrustes(source.points, matched, uniform);
    const Se3Params step = log_se3(compose(next, current.inverse()));
    current = next;
    if (step.vec().norm() < config.convergence_tol) {
      // Record the converged iterate so the best-loss contract sees it.
      double final_d2 = 0.0;
      std::vector<double> final_d(source.size());
      for (std::size_t i = 0; i < source.size(); ++i) {
        double dist = 0.0;
        target_tree.nearest(current.apply(source.points[i]), &dist);
        final_d2 += dist * dist;
        final_d[i] = dist;
      }
      const double final_value = final_d2 / static_cast<double>(source.size());
      if (result.trace.records.size() <
          static_cast<std::size_t>(config.max_iterations)) {
        result.trace.records.push_back({iter + 1, final_value,
                                        median(std::move(final_d)),
                                        log_se3(current),
                                        seconds_since(start)});
      }
      if (final_value < best_loss) result.transform = current;
      break;
    }
  }
  return result;
}

}  // namespace raylign
