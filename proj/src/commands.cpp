#include "raylign/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "raylign/errors.hpp"
#include "raylign/intersection.hpp"
#include "raylign/io.hpp"
#include "raylign/kdtree.hpp"
#include "raylign/loss.hpp"
#include "raylign/parallel.hpp"
#include "raylign/rng.hpp"

namespace raylign {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(CropKind k) {
  switch (k) {
    case CropKind::None: return "none";
    case CropKind::HalfSpace: return "half-space";
    case CropKind::Cone: return "cone";
  }
  return "none";
}

CropKind crop_from_string(const std::string& name) {
  if (name == "none") return CropKind::None;
  if (name == "half-space") return CropKind::HalfSpace;
  if (name == "cone") return CropKind::Cone;
  throw Error("unknown crop kind: " + name);
}

SolveResult run_method(Method method, const RunConfig& config,
                       const PointCloud& source, const PointCloud& target) {
  const RigidTransform initial = RigidTransform::identity();
  switch (method) {
    case Method::LineLoss:
      return solve_first_order(source, target, initial, Objective::LineLoss,
                               config.solver, config.welsch,
                               config.intersection);
    case Method::Cd:
      return solve_first_order(source, target, initial, Objective::Chamfer,
                               config.solver, config.welsch,
                               config.intersection);
    case Method::CdW:
      return solve_first_order(source, target, initial,
                               Objective::ChamferWelsch, config.solver,
                               config.welsch, config.intersection);
    case Method::Icp:
      return solve_icp(source, target, initial, config.solver);
    case Method::SvdSurrogate:
      return solve_svd_surrogate(source, target, initial, config.solver,
                                 config.welsch, config.intersection);
  }
  throw Error("unhandled method");
}

namespace {

void write_trace_csv(const fs::path& path, const SolveTrace& trace) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(trace.records.size());
  for (const auto& rec : trace.records) {
    const Vector6d xi = rec.params.vec();
    rows.push_back({std::to_string(rec.iteration),
                    io::format_double(rec.loss), io::format_double(rec.d_med),
                    io::format_double(xi[0]), io::format_double(xi[1]),
                    io::format_double(xi[2]), io::format_double(xi[3]),
                    io::format_double(xi[4]), io::format_double(xi[5]),
                    io::format_double(rec.seconds)});
  }
  io::write_csv(path,
                {"iteration", "loss", "d_med", "omega_x", "omega_y", "omega_z",
                 "v_x", "v_y", "v_z", "seconds"},
                rows);
}

double best_recorded_loss(const SolveTrace& trace) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& rec : trace.records) best = std::min(best, rec.loss);
  return best;
}

}  // namespace

RegisterOutcome cmd_register(const RegisterOptions& opts) {
  const PointCloud source = io::read_point_cloud(opts.source_path);
  const PointCloud target = io::read_point_cloud(opts.target_path);

  RunConfig config = opts.config;
  config.apply_env_seed();

  const SolveResult result = run_method(config.method, config, source, target);

  fs::create_directories(opts.out_dir);
  io::write_transform(opts.out_dir / "transform.txt", result.transform);
  std::string ext = opts.source_path.extension().string();
  if (ext != ".ply") ext = ".xyz";
  io::write_point_cloud(opts.out_dir / ("transformed_source" + ext),
                        result.transform.apply(source));
  write_trace_csv(opts.out_dir / "trace.csv", result.trace);
  config.save(opts.out_dir / "config.json");

  RegisterOutcome outcome;
  outcome.estimated = result.transform;
  outcome.trace = result.trace;
  outcome.best_loss = best_recorded_loss(result.trace);
  std::printf("method=%s iterations=%zu best_loss=%.12g\n",
              to_string(config.method).c_str(), result.trace.records.size(),
              outcome.best_loss);
  if (opts.gt_path) {
    const RigidTransform gt = io::read_transform(*opts.gt_path);
    outcome.eval = evaluate(gt, result.transform, source);
    std::printf(
        "err_r_deg=%.6g err_t_l1=%.6g err_t_l2=%.6g err_pw_l1=%.6g "
        "err_pw_l2=%.6g\n",
        outcome.eval->err_r_deg, outcome.eval->err_t_l1,
        outcome.eval->err_t_l2, outcome.eval->err_pw_l1,
        outcome.eval->err_pw_l2);
  }
  return outcome;
}

namespace {

json spec_to_json(const PairSpec& spec) {
  return {
      {"rotation_max_deg", spec.rotation_max_deg},
      {"translation_range", spec.translation_range},
      {"crop", to_string(spec.crop)},
      {"overlap", spec.overlap},
      {"noise_sigma", spec.noise_sigma},
      {"outlier_fraction", spec.outlier_fraction},
      {"points", spec.points},
      {"seed", spec.seed},
  };
}

std::string pair_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "pair_%04d", index);
  return buf;
}

}  // namespace

fs::path cmd_genbench(const GenbenchOptions& opts) {
  if (opts.count < 1) throw Error("genbench: count must be >= 1");
  const PointCloud base = io::read_point_cloud(opts.base_path);

  fs::create_directories(opts.out_dir);
  json manifest;
  manifest["base"] = opts.base_path.string();
  manifest["count"] = opts.count;
  manifest["spec"] = spec_to_json(opts.spec);
  manifest["pairs"] = json::array();

  for (int i = 0; i < opts.count; ++i) {
    PairSpec spec = opts.spec;
    spec.seed = opts.spec.seed + static_cast<std::uint64_t>(i);
    const BenchmarkPair pair = make_pair(base, spec);

    const std::string id = pair_name(i);
    const std::string source_file = id + "_source.xyz";
    const std::string target_file = id + "_target.xyz";
    const std::string gt_file = id + "_gt.txt";
    io::write_point_cloud(opts.out_dir / source_file, pair.source);
    io::write_point_cloud(opts.out_dir / target_file, pair.target);
    io::write_transform(opts.out_dir / gt_file, pair.gt);

    const Eigen::Matrix4d m = pair.gt.matrix();
    json gt_numbers = json::array();
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) gt_numbers.push_back(m(r, c));
    manifest["pairs"].push_back({{"id", id},
                                 {"seed", spec.seed},
                                 {"source", source_file},
                                 {"target", target_file},
                                 {"gt_file", gt_file},
                                 {"gt", gt_numbers}});
  }

  const fs::path manifest_path = opts.out_dir / "manifest.json";
  io::atomic_write(manifest_path, manifest.dump(2) + "\n");
  return manifest_path;
}

namespace {

struct BenchPairEntry {
  std::string id;
  fs::path source;
  fs::path target;
  RigidTransform gt;
};

std::vector<BenchPairEntry> load_manifest(const fs::path& given) {
  fs::path path = given;
  if (fs::is_directory(path)) path /= "manifest.json";
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest: " + path.string());
  json manifest;
  try {
    in >> manifest;
  } catch (const json::parse_error& e) {
    throw IoError(std::string("manifest parse error: ") + e.what());
  }

  const fs::path dir = path.parent_path();
  std::vector<BenchPairEntry> entries;
  for (const auto& p : manifest.at("pairs")) {
    BenchPairEntry entry;
    entry.id = p.at("id");
    entry.source = dir / p.at("source").get<std::string>();
    entry.target = dir / p.at("target").get<std::string>();
    Eigen::Matrix4d m;
    const auto& numbers = p.at("gt");
    if (numbers.size() != 16) throw IoError("manifest gt needs 16 numbers");
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) m(r, c) = numbers[4 * r + c];
    entry.gt = RigidTransform::from_matrix(m);
    entries.push_back(std::move(entry));
  }
  return entries;
}

struct MethodVariant {
  std::string label;
  Method method;
  double nu0;
};

std::string nu0_label(double nu0) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "line-loss_nu0=%g", nu0);
  return buf;
}

std::vector<std::string> eval_fields(const EvalReport& e) {
  return {io::format_double(e.err_r_deg), io::format_double(e.err_t_l1),
          io::format_double(e.err_t_l2), io::format_double(e.err_pw_l1),
          io::format_double(e.err_pw_l2)};
}

MethodSummary summarize(const std::string& label,
                        const std::vector<const BenchRow*>& rows) {
  MethodSummary s;
  s.method = label;
  s.pairs = static_cast<int>(rows.size());
  std::vector<double> r, t1, t2, p1, p2;
  double seconds = 0.0;
  for (const BenchRow* row : rows) {
    if (!row->ok) {
      ++s.failures;
      continue;
    }
    r.push_back(row->eval.err_r_deg);
    t1.push_back(row->eval.err_t_l1);
    t2.push_back(row->eval.err_t_l2);
    p1.push_back(row->eval.err_pw_l1);
    p2.push_back(row->eval.err_pw_l2);
    seconds += row->seconds;
  }
  const int ok = s.pairs - s.failures;
  if (ok == 0) return s;
  auto mean = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  };
  s.mean_err_r_deg = mean(r);
  s.median_err_r_deg = median(r);
  s.mean_err_t_l1 = mean(t1);
  s.median_err_t_l1 = median(t1);
  s.mean_err_t_l2 = mean(t2);
  s.median_err_t_l2 = median(t2);
  s.mean_err_pw_l1 = mean(p1);
  s.median_err_pw_l1 = median(p1);
  s.mean_err_pw_l2 = mean(p2);
  s.median_err_pw_l2 = median(p2);
  s.mean_seconds = seconds / ok;
  return s;
}

}  // namespace

BenchResult cmd_bench(const BenchOptions& opts) {
  std::vector<MethodVariant> variants;
  for (Method m : opts.methods)
    variants.push_back({to_string(m), m, opts.config.welsch.nu0});
  for (double nu0 : opts.nu0_sweep)
    variants.push_back({nu0_label(nu0), Method::LineLoss, nu0});
  if (variants.empty()) throw Error("bench: no methods selected");

  const auto entries = load_manifest(opts.manifest_path);
  if (entries.empty()) throw Error("bench: manifest has no pairs");

  RunConfig base_config = opts.config;
  base_config.apply_env_seed();
  // Outer pair-level parallelism owns the cores; keep each solve serial
  // unless bench itself runs sequentially.
  const int outer_jobs = std::max(1, opts.jobs);
  if (outer_jobs > 1) base_config.solver.jobs = 1;

  BenchResult result;
  result.rows.resize(entries.size() * variants.size());

  parallel_for(entries.size(), outer_jobs, [&](std::size_t pi) {
    const BenchPairEntry& entry = entries[pi];
    const PointCloud source = io::read_point_cloud(entry.source);
    const PointCloud target = io::read_point_cloud(entry.target);
    for (std::size_t vi = 0; vi < variants.size(); ++vi) {
      const MethodVariant& variant = variants[vi];
      BenchRow& row = result.rows[pi * variants.size() + vi];
      row.pair_id = entry.id;
      row.method = variant.label;
      RunConfig config = base_config;
      config.method = variant.method;
      config.welsch.nu0 = variant.nu0;
      try {
        const SolveResult solve = run_method(variant.method, config, source,
                                             target);
        row.eval = evaluate(entry.gt, solve.transform, source);
        row.eval.pair_id = entry.id;
        row.iterations = static_cast<int>(solve.trace.records.size());
        row.seconds = solve.trace.records.empty()
                          ? 0.0
                          : solve.trace.records.back().seconds;
        row.ok = true;
        row.status = "ok";
      } catch (const std::exception& e) {
        row.ok = false;
        row.status = std::string("error:") + e.what();
      }
    }
  });

  fs::create_directories(opts.out_dir);
  std::vector<std::vector<std::string>> pair_rows;
  pair_rows.reserve(result.rows.size());
  for (const auto& row : result.rows) {
    std::vector<std::string> fields{row.pair_id, row.method};
    if (row.ok) {
      for (auto& f : eval_fields(row.eval)) fields.push_back(std::move(f));
      fields.push_back(std::to_string(row.iterations));
      fields.push_back(io::format_double(row.seconds));
    } else {
      fields.insert(fields.end(), 7, "");
    }
    fields.push_back(row.status);
    pair_rows.push_back(std::move(fields));
  }
  io::write_csv(opts.out_dir / "per_pair.csv",
                {"pair_id", "method", "err_r_deg", "err_t_l1", "err_t_l2",
                 "err_pw_l1", "err_pw_l2", "iterations", "seconds", "status"},
                pair_rows);

  std::vector<std::vector<std::string>> summary_rows;
  std::vector<double> alphas;
  for (int i = 0; i <= 100; ++i) alphas.push_back(0.01 * i);
  for (std::size_t vi = 0; vi < variants.size(); ++vi) {
    std::vector<const BenchRow*> rows;
    std::vector<EvalReport> ok_reports;
    for (std::size_t pi = 0; pi < entries.size(); ++pi) {
      const BenchRow& row = result.rows[pi * variants.size() + vi];
      rows.push_back(&row);
      if (row.ok) ok_reports.push_back(row.eval);
    }
    const MethodSummary s = summarize(variants[vi].label, rows);
    result.summaries.push_back(s);
    summary_rows.push_back(
        {s.method, std::to_string(s.pairs), std::to_string(s.failures),
         io::format_double(s.mean_err_r_deg),
         io::format_double(s.median_err_r_deg),
         io::format_double(s.mean_err_t_l1),
         io::format_double(s.median_err_t_l1),
         io::format_double(s.mean_err_t_l2),
         io::format_double(s.median_err_t_l2),
         io::format_double(s.mean_err_pw_l1),
         io::format_double(s.median_err_pw_l1),
         io::format_double(s.mean_err_pw_l2),
         io::format_double(s.median_err_pw_l2),
         io::format_double(s.mean_seconds)});

    if (!ok_reports.empty()) {
      const RecallCurve curve = alpha_recall(ok_reports, alphas);
      std::vector<std::vector<std::string>> recall_rows;
      for (std::size_t i = 0; i < curve.alphas.size(); ++i)
        recall_rows.push_back({io::format_double(curve.alphas[i]),
                               io::format_double(curve.recalls[i])});
      io::write_csv(opts.out_dir / ("recall_" + variants[vi].label + ".csv"),
                    {"alpha", "recall"}, recall_rows);
    }
  }
  io::write_csv(
      opts.out_dir / "summary.csv",
      {"method", "pairs", "failures", "mean_err_r_deg", "median_err_r_deg",
       "mean_err_t_l1", "median_err_t_l1", "mean_err_t_l2", "median_err_t_l2",
       "mean_err_pw_l1", "median_err_pw_l1", "mean_err_pw_l2",
       "median_err_pw_l2", "mean_seconds"},
      summary_rows);
  base_config.save(opts.out_dir / "config.json");
  return result;
}

GradcheckOutcome cmd_gradcheck(const GradcheckOptions& opts) {
  GradcheckOutcome outcome;
  for (int state = 0; state < opts.states; ++state) {
    Pcg32 rng(opts.seed, 100 + static_cast<std::uint64_t>(state));
    PointCloud source, target;
    for (int i = 0; i < 30; ++i) {
      source.points.push_back(rng.unit_vector() * rng.uniform(0.3, 1.0));
      target.points.push_back(rng.unit_vector() * rng.uniform(0.3, 1.0));
    }
    Se3Params xi;
    xi.omega = rng.unit_vector() * rng.uniform(0.0, 0.5);
    xi.v = rng.unit_vector() * rng.uniform(0.0, 0.3);
    const RigidTransform t = exp_se3(xi);

    const WelschParams welsch_params{0.5, 0.0};
    const auto chamfer = assemble_chamfer_loss(t, source, target,
                                               ChamferMetric::SquaredL2,
                                               welsch_params);
    outcome.chamfer_max_rel_err =
        std::max(outcome.chamfer_max_rel_err,
                 gradient_check(chamfer.objective, t, opts.step));

    const BoundingSphere sphere = bounding_sphere(t.apply(source), target);
    const auto chords =
        sample_chords(sphere, 50, SamplerKind::SphereChord, source, target,
                      rng);
    IntersectionParams params;
    params.delta = 0.35;
    const auto line = assemble_line_loss(t, source, target, chords,
                                         welsch_params, params, 1);
    if (!line.empty()) {
      outcome.line_max_rel_err =
          std::max(outcome.line_max_rel_err,
                   gradient_check(line.objective, t, opts.step));
    }
  }
  std::printf("gradcheck chamfer max_rel_err=%.3e line max_rel_err=%.3e\n",
              outcome.chamfer_max_rel_err, outcome.line_max_rel_err);
  return outcome;
}

void cmd_lines_debug(const LinesDebugOptions& opts) {
  const PointCloud source = io::read_point_cloud(opts.source_path);
  const PointCloud target = io::read_point_cloud(opts.target_path);
  RunConfig config = opts.config;
  config.apply_env_seed();

  RigidTransform transform = RigidTransform::identity();
  if (opts.transform_path) transform = io::read_transform(*opts.transform_path);

  const PointCloud moved = transform.apply(source);
  const BoundingSphere sphere = bounding_sphere(moved, target);
  Pcg32 rng(config.solver.seed, 1ULL << 40);
  const auto chords = sample_chords(
      sphere, config.solver.lines_per_iteration, config.solver.sampler, moved,
      target, rng, config.solver.sampler_perturb_scale);

  std::vector<std::vector<std::string>> chord_rows;
  chord_rows.reserve(chords.size());
  for (const auto& c : chords)
    chord_rows.push_back({io::format_double(c.a.x()), io::format_double(c.a.y()),
                          io::format_double(c.a.z()), io::format_double(c.b.x()),
                          io::format_double(c.b.y()), io::format_double(c.b.z())});
  fs::create_directories(opts.out_dir);
  io::write_csv(opts.out_dir / "chords.csv",
                {"ax", "ay", "az", "bx", "by", "bz"}, chord_rows);

  IntersectionParams source_params = config.intersection;
  IntersectionParams target_params = config.intersection;
  if (config.intersection.delta <= 0.0) {
    source_params = default_params(moved);
    target_params = default_params(target);
  }
  const KdTree source_tree(moved.points);
  const KdTree target_tree(target.points);

  std::vector<std::vector<std::string>> rows;
  for (std::size_t ci = 0; ci < chords.size(); ++ci) {
    auto dump = [&](const char* cloud_name, const IntersectionSet& set) {
      for (const auto& p : set.points)
        rows.push_back({std::to_string(ci), cloud_name,
                        io::format_double(p.x()), io::format_double(p.y()),
                        io::format_double(p.z())});
    };
    dump("source", intersect(chords[ci], moved, source_tree, source_params));
    dump("target", intersect(chords[ci], target, target_tree, target_params));
  }
  io::write_csv(opts.out_dir / "intersections.csv",
                {"chord", "cloud", "x", "y", "z"}, rows);
  config.save(opts.out_dir / "config.json");
}

}  // namespace raylign
