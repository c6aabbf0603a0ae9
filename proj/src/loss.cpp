#include "raylign/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "raylign/errors.hpp"
#include "raylign/kdtree.hpp"
#include "raylign/parallel.hpp"

namespace raylign {

double welsch(double x, double nu) {
  if (nu <= 0.0) throw Error("welsch: nu must be positive");
  const double z = x / nu;
  return 1.0 - std::exp(-0.5 * z * z);
}

double welsch_derivative(double x, double nu) {
  if (nu <= 0.0) throw Error("welsch: nu must be positive");
  const double z = x / nu;
  return (x / (nu * nu)) * std::exp(-0.5 * z * z);
}

double FrozenObjective::value(const RigidTransform& t) const {
  double sum = 0.0;
  for (const auto& pair : pairs) {
    const double d = (t.apply(pair.base) - pair.target).norm();
    sum += pair.coeff * (squared ? d * d : welsch(d, nu));
  }
  return sum / normalizer;
}

Vector6d FrozenObjective::gradient(const RigidTransform& t) const {
  return value_and_gradient(t).second;
}

std::pair<double, Vector6d> FrozenObjective::value_and_gradient(
    const RigidTransform& t) const {
  double sum = 0.0;
  Eigen::Vector3d grad_omega = Eigen::Vector3d::Zero();
  Eigen::Vector3d grad_v = Eigen::Vector3d::Zero();
  const double inv_nu2 = squared ? 0.0 : 1.0 / (nu * nu);

  for (const auto& pair : pairs) {
    const Eigen::Vector3d x = t.apply(pair.base);
    const Eigen::Vector3d r = x - pair.target;
    const double d2 = r.squaredNorm();
    // Derivative through x(eps) = exp(eps) * x at eps = 0:
    // d x / d omega = -[x]_x, d x / d v = I.
    double scale;
    if (squared) {
      sum += pair.coeff * d2;
      scale = 2.0 * pair.coeff;
    } else {
      const double e = std::exp(-0.5 * d2 * inv_nu2);
      sum += pair.coeff * (1.0 - e);
      scale = pair.coeff * e * inv_nu2;
    }
    grad_v += scale * r;
    grad_omega += scale * x.cross(r);
  }

  Vector6d grad;
  grad << grad_omega / normalizer, grad_v / normalizer;
  return {sum / normalizer, grad};
}

namespace {

constexpr double kNuFloor = 1e-12;

struct ChordResult {
  bool used = false;
  LineTerm term;
};

// Nearest counterpart in `others` for each point of `own`, by Euclidean
// distance. Both sets are small; exhaustive scan.
int nearest_index(const Eigen::Vector3d& p,
                  const std::vector<Eigen::Vector3d>& others) {
  int best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < others.size(); ++k) {
    const double d2 = (p - others[k]).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = static_cast<int>(k);
    }
  }
  return best;
}

}  // namespace

LineLossAssembly assemble_line_loss(const RigidTransform& transform,
                                    const PointCloud& source,
                                    const PointCloud& target,
                                    const std::vector<Chord>& chords,
                                    const WelschParams& welsch_params,
                                    const IntersectionParams& params,
                                    int jobs) {
  if (source.empty() || target.empty())
    throw DegenerateCloudError("line_loss: empty cloud");
  if (chords.empty()) throw Error("line_loss: need at least one chord");

  IntersectionParams source_params = params;
  IntersectionParams target_params = params;
  if (params.delta <= 0.0) {
    source_params = default_params(source);
    target_params = default_params(target);
    source_params.mode = target_params.mode = params.mode;
    source_params.inverse_distance_weights =
        target_params.inverse_distance_weights = params.inverse_distance_weights;
  }

  const PointCloud moved = transform.apply(source);
  const KdTree source_tree(moved.points);
  const KdTree target_tree(target.points);
  const auto source_knn = build_knn_table(moved, source_tree, source_params.k);
  const auto target_knn = build_knn_table(target, target_tree, target_params.k);

  std::vector<ChordResult> results(chords.size());
  parallel_for(chords.size(), jobs, [&](std::size_t ci) {
    const Chord& chord = chords[ci];
    const IntersectionSet s_l =
        intersect(chord, moved, source_tree, source_params, &source_knn);
    if (s_l.empty()) return;
    const IntersectionSet t_l =
        intersect(chord, target, target_tree, target_params, &target_knn);
    if (t_l.empty()) return;

    ChordResult& res = results[ci];
    res.used = true;
    LineTerm& term = res.term;
    term.chord = chord;
    term.source_count = s_l.size();
    term.target_count = t_l.size();
    const double count_gap =
        std::abs((static_cast<double>(s_l.size()) -
                  static_cast<double>(t_l.size())) / 2.0);
    term.weight = std::exp(-count_gap);

    // Frozen combination weights, recovered from the emitted points: the
    // base point is the same convex combination of untransformed source
    // points. Weights are recomputed from the chord geometry.
    const Eigen::Vector3d dir = chord.direction();
    auto line_distance = [&](const Eigen::Vector3d& p) {
      const Eigen::Vector3d rel = p - chord.a;
      const double t = rel.dot(dir);
      return std::sqrt(std::max(0.0, rel.squaredNorm() - t * t));
    };
    // Same accumulation order as intersect(), but over the untransformed
    // source points, so that at the current transform the re-applied base
    // reproduces the emitted intersection bit-for-bit.
    auto base_of = [&](std::size_t i) {
      const auto& members = s_l.source_indices[i];
      double weight_sum = 0.0;
      Eigen::Vector3d combined = Eigen::Vector3d::Zero();
      for (int member : members) {
        double w = line_distance(moved.points[member]);
        if (source_params.inverse_distance_weights)
          w = 1.0 / std::max(w, 1e-12);
        weight_sum += w;
        combined += w * source.points[member];
      }
      if (weight_sum > 0.0) {
        combined /= weight_sum;
      } else {
        combined.setZero();
        for (int member : members) combined += source.points[member];
        combined /= static_cast<double>(members.size());
      }
      return combined;
    };

    std::vector<Eigen::Vector3d> bases(s_l.size());
    for (std::size_t i = 0; i < s_l.size(); ++i) bases[i] = base_of(i);

    term.pairs.reserve(s_l.size() + t_l.size());
    for (std::size_t i = 0; i < s_l.size(); ++i) {
      const int j = nearest_index(s_l.points[i], t_l.points);
      term.pairs.push_back(
          {bases[i], t_l.points[j], PairDirection::SourceToTarget});
    }
    for (std::size_t j = 0; j < t_l.size(); ++j) {
      const int i = nearest_index(t_l.points[j], s_l.points);
      term.pairs.push_back(
          {bases[i], t_l.points[j], PairDirection::TargetToSource});
    }
  });

  LineLossAssembly assembly;
  std::vector<double> distances;
  for (auto& res : results) {
    if (!res.used) {
      ++assembly.lines_skipped;
      continue;
    }
    ++assembly.lines_used;
    assembly.terms.push_back(std::move(res.term));
  }
  if (assembly.lines_used == 0) {
    assembly.d_med = 0.0;
    assembly.nu = std::max(welsch_params.nu0 * 0.0, kNuFloor);
    return assembly;
  }

  for (const auto& term : assembly.terms)
    for (const auto& pair : term.pairs)
      distances.push_back(
          (transform.apply(pair.source_base) - pair.target_point).norm());
  assembly.d_med = median(std::move(distances));
  assembly.nu = std::max(welsch_params.nu0 * assembly.d_med, kNuFloor);

  assembly.objective.squared = false;
  assembly.objective.nu = assembly.nu;
  assembly.objective.normalizer = assembly.lines_used;
  for (const auto& term : assembly.terms)
    for (const auto& pair : term.pairs)
      assembly.objective.pairs.push_back(
          {pair.source_base, pair.target_point, term.weight});
  return assembly;
}

LossReport line_loss(const RigidTransform& transform, const PointCloud& source,
                     const PointCloud& target, const std::vector<Chord>& chords,
                     const WelschParams& welsch_params,
                     const IntersectionParams& params, int jobs) {
  const LineLossAssembly assembly = assemble_line_loss(
      transform, source, target, chords, welsch_params, params, jobs);
  if (assembly.empty())
    throw NoIntersectionsError("line_loss: every chord missed a cloud");

  LossReport report;
  auto [value, gradient] = assembly.objective.value_and_gradient(transform);
  report.value = value;
  report.gradient = gradient;
  report.lines_used = assembly.lines_used;
  report.lines_skipped = assembly.lines_skipped;
  report.d_med = assembly.d_med;
  return report;
}

LineLossAssembly assemble_chamfer_loss(const RigidTransform& transform,
                                       const PointCloud& source,
                                       const PointCloud& target,
                                       ChamferMetric metric,
                                       const WelschParams& welsch_params) {
  if (source.empty() || target.empty())
    throw DegenerateCloudError("chamfer_loss: empty cloud");

  const PointCloud moved = transform.apply(source);
  const KdTree source_tree(moved.points);
  const KdTree target_tree(target.points);

  LineLossAssembly assembly;
  auto& pairs = assembly.objective.pairs;
  pairs.reserve(source.size() + target.size());
  for (std::size_t i = 0; i < source.size(); ++i) {
    const int j = target_tree.nearest(moved.points[i]);
    pairs.push_back({source.points[i], target.points[j], 1.0});
  }
  for (std::size_t j = 0; j < target.size(); ++j) {
    const int i = source_tree.nearest(target.points[j]);
    pairs.push_back({source.points[i], target.points[j], 1.0});
  }

  std::vector<double> distances;
  distances.reserve(pairs.size());
  for (const auto& pair : pairs)
    distances.push_back((transform.apply(pair.base) - pair.target).norm());
  assembly.d_med = median(std::move(distances));
  assembly.nu = std::max(welsch_params.nu0 * assembly.d_med, kNuFloor);

  assembly.objective.squared = (metric == ChamferMetric::SquaredL2);
  assembly.objective.nu = assembly.nu;
  assembly.objective.normalizer =
      static_cast<double>(source.size() + target.size());
  return assembly;
}

LossReport chamfer_loss(const RigidTransform& transform,
                        const PointCloud& source, const PointCloud& target,
                        ChamferMetric metric,
                        const WelschParams& welsch_params) {
  const LineLossAssembly assembly =
      assemble_chamfer_loss(transform, source, target, metric, welsch_params);
  LossReport report;
  auto [value, gradient] = assembly.objective.value_and_gradient(transform);
  report.value = value;
  report.gradient = gradient;
  report.d_med = assembly.d_med;
  return report;
}

double gradient_check(const FrozenObjective& objective,
                      const RigidTransform& transform, double step) {
  if (step <= 0.0) throw Error("gradient_check: step must be positive");
  const Vector6d analytic = objective.gradient(transform);

  double max_err = 0.0;
  for (int i = 0; i < 6; ++i) {
    Vector6d delta = Vector6d::Zero();
    delta[i] = step;
    const double plus =
        objective.value(compose(exp_se3(Se3Params::from_vec(delta)), transform));
    const double minus = objective.value(
        compose(exp_se3(Se3Params::from_vec(-delta)), transform));
    const double numeric = (plus - minus) / (2.0 * step);
    const double err =
        std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(numeric));
    max_err = std::max(max_err, err);
  }
  return max_err;
}

}  // namespace raylign
