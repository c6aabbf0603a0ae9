#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "raylign/commands.hpp"
#include "raylign/errors.hpp"
#include "raylign/io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitNumeric = 3;

using raylign::RunConfig;

// Shared config plumbing: optional config file, then flag overrides.
struct ConfigFlags {
  std::string config_path;
  std::string method;
  std::string sampler;
  std::string intersection_mode;
  double nu0 = -1.0;
  double delta = -1.0;
  int lines = -1;
  int max_iterations = -1;
  double learning_rate = -1.0;
  double convergence_tol = -1.0;
  std::int64_t seed = -1;
  int jobs = -1;
  int resample_lines = -1;
  int recompute_sphere = -1;
  int inverse_distance_weights = -1;
  int svd_printed_psi_weight = -1;

  void add_to(CLI::App& app) {
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--method", method,
                   "line-loss | cd | cd-w | icp | svd-surrogate");
    app.add_option("--sampler", sampler,
                   "sphere-chord | box-point-direction | cloud-pair-perturbed");
    app.add_option("--intersection-mode", intersection_mode,
                   "convex-combination | all-candidates");
    app.add_option("--nu0", nu0, "Welsch nu0");
    app.add_option("--delta", delta, "cylinder radius (0 = per-cloud auto)");
    app.add_option("--lines", lines, "chords per iteration");
    app.add_option("--max-iterations", max_iterations, "iteration cap");
    app.add_option("--learning-rate", learning_rate, "Adam learning rate");
    app.add_option("--convergence-tol", convergence_tol, "step-norm stop");
    app.add_option("--seed", seed, "RNG seed (RAYLIGN_SEED overrides)");
    app.add_option("--jobs", jobs, "worker threads");
    app.add_flag("--resample-lines,!--freeze-lines", resample_lines,
                 "resample chords every iteration");
    app.add_flag("--recompute-sphere,!--fixed-sphere", recompute_sphere,
                 "recompute the bounding sphere every iteration");
    app.add_flag("--inverse-distance-weights", inverse_distance_weights,
                 "experimental Eq-weights inversion");
    app.add_flag("--svd-printed-psi-weight", svd_printed_psi_weight,
                 "psi-as-weight variant in the SVD surrogate");
  }

  RunConfig resolve() const {
    RunConfig config;
    if (!config_path.empty()) config = RunConfig::load(config_path);
    if (!method.empty()) config.method = raylign::method_from_string(method);
    if (!sampler.empty())
      config.solver.sampler = raylign::sampler_from_string(sampler);
    if (!intersection_mode.empty())
      config.intersection.mode =
          raylign::intersection_mode_from_string(intersection_mode);
    if (nu0 >= 0.0) config.welsch.nu0 = nu0;
    if (delta >= 0.0) config.intersection.delta = delta;
    if (lines >= 0) config.solver.lines_per_iteration = lines;
    if (max_iterations >= 0) config.solver.max_iterations = max_iterations;
    if (learning_rate >= 0.0) config.solver.learning_rate = learning_rate;
    if (convergence_tol >= 0.0) config.solver.convergence_tol = convergence_tol;
    if (seed >= 0) config.solver.seed = static_cast<std::uint64_t>(seed);
    if (jobs >= 0) config.solver.jobs = jobs;
    if (resample_lines >= 0) config.solver.resample_lines = resample_lines > 0;
    if (recompute_sphere >= 0)
      config.solver.recompute_sphere = recompute_sphere > 0;
    if (inverse_distance_weights >= 0)
      config.intersection.inverse_distance_weights =
          inverse_distance_weights > 0;
    if (svd_printed_psi_weight >= 0)
      config.solver.svd_printed_psi_weight = svd_printed_psi_weight > 0;
    return config;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"raylign: rigid point-cloud registration via random-line "
               "intersection metrics"};
  app.require_subcommand(1);

  // register
  auto* reg = app.add_subcommand("register", "align a source cloud to a target");
  raylign::RegisterOptions reg_opts;
  std::string reg_source, reg_target, reg_out = "register_out", reg_gt;
  ConfigFlags reg_flags;
  reg->add_option("source", reg_source, "source cloud (.xyz/.ply)")->required();
  reg->add_option("target", reg_target, "target cloud (.xyz/.ply)")->required();
  reg->add_option("--out-dir", reg_out, "output directory");
  reg->add_option("--gt", reg_gt, "ground-truth 4x4 transform file");
  reg_flags.add_to(*reg);

  // genbench
  auto* gen = app.add_subcommand("genbench", "generate a benchmark pair set");
  std::string gen_base, gen_out = "bench_data", gen_crop = "half-space";
  raylign::GenbenchOptions gen_opts;
  gen->add_option("base", gen_base, "base cloud (.xyz/.ply)")->required();
  gen->add_option("--out-dir", gen_out, "output directory");
  gen->add_option("--count", gen_opts.count, "number of pairs");
  gen->add_option("--points", gen_opts.spec.points, "points per cloud");
  gen->add_option("--rotation-max-deg", gen_opts.spec.rotation_max_deg,
                  "Euler angle range");
  gen->add_option("--translation-range", gen_opts.spec.translation_range,
                  "translation range per axis");
  gen->add_option("--crop", gen_crop, "none | half-space | cone");
  gen->add_option("--overlap", gen_opts.spec.overlap, "overlap ratio (0,1]");
  gen->add_option("--noise-sigma", gen_opts.spec.noise_sigma,
                  "Gaussian noise sigma");
  gen->add_option("--outlier-fraction", gen_opts.spec.outlier_fraction,
                  "fraction of source points replaced");
  std::int64_t gen_seed = 0;
  gen->add_option("--seed", gen_seed, "batch seed");

  // bench
  auto* bench = app.add_subcommand("bench", "run methods over a benchmark");
  std::string bench_dir, bench_out = "bench_out";
  std::vector<std::string> bench_methods;
  std::vector<double> bench_nu0;
  int bench_jobs = 1;
  ConfigFlags bench_flags;
  bench->add_option("bench-dir", bench_dir, "directory with manifest.json")
      ->required();
  bench->add_option("--out-dir", bench_out, "output directory");
  bench->add_option("--methods", bench_methods,
                    "methods to run (space separated)");
  bench->add_option("--nu0-sweep", bench_nu0,
                    "additional line-loss runs at these nu0 values");
  bench->add_option("--bench-jobs", bench_jobs, "concurrent pairs");
  bench_flags.add_to(*bench);

  // gradcheck
  auto* grad = app.add_subcommand("gradcheck",
                                  "finite-difference gradient verification");
  raylign::GradcheckOptions grad_opts;
  grad->add_option("--states", grad_opts.states, "random states");
  grad->add_option("--step", grad_opts.step, "central difference step");
  std::int64_t grad_seed = 7;
  grad->add_option("--seed", grad_seed, "RNG seed");

  // lines-debug
  auto* lines = app.add_subcommand("lines-debug",
                                   "dump sampled chords and intersections");
  std::string lines_source, lines_target, lines_out = "lines_debug",
              lines_transform;
  ConfigFlags lines_flags;
  lines->add_option("source", lines_source, "source cloud")->required();
  lines->add_option("target", lines_target, "target cloud")->required();
  lines->add_option("--out-dir", lines_out, "output directory");
  lines->add_option("--transform", lines_transform,
                    "4x4 transform applied to the source first");
  lines_flags.add_to(*lines);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*reg) {
      reg_opts.source_path = reg_source;
      reg_opts.target_path = reg_target;
      reg_opts.out_dir = reg_out;
      if (!reg_gt.empty()) reg_opts.gt_path = reg_gt;
      reg_opts.config = reg_flags.resolve();
      raylign::cmd_register(reg_opts);
    } else if (*gen) {
      gen_opts.base_path = gen_base;
      gen_opts.out_dir = gen_out;
      gen_opts.spec.crop = raylign::crop_from_string(gen_crop);
      gen_opts.spec.seed = static_cast<std::uint64_t>(gen_seed);
      const auto manifest = raylign::cmd_genbench(gen_opts);
      std::printf("wrote %s\n", manifest.string().c_str());
    } else if (*bench) {
      raylign::BenchOptions opts;
      opts.manifest_path = bench_dir;
      opts.out_dir = bench_out;
      for (const auto& name : bench_methods)
        opts.methods.push_back(raylign::method_from_string(name));
      opts.nu0_sweep = bench_nu0;
      opts.jobs = bench_jobs;
      opts.config = bench_flags.resolve();
      if (opts.methods.empty() && opts.nu0_sweep.empty())
        throw CLI::ValidationError("bench", "no methods selected");
      const auto result = raylign::cmd_bench(opts);
      for (const auto& s : result.summaries)
        std::printf("%s: pairs=%d failures=%d mean_err_r=%.4g "
                    "mean_err_pw_l2=%.4g\n",
                    s.method.c_str(), s.pairs, s.failures, s.mean_err_r_deg,
                    s.mean_err_pw_l2);
    } else if (*grad) {
      grad_opts.seed = static_cast<std::uint64_t>(grad_seed);
      const auto outcome = raylign::cmd_gradcheck(grad_opts);
      if (outcome.chamfer_max_rel_err >= 1e-5 ||
          outcome.line_max_rel_err >= 1e-4)
        return kExitNumeric;
    } else if (*lines) {
      raylign::LinesDebugOptions opts;
      opts.source_path = lines_source;
      opts.target_path = lines_target;
      opts.out_dir = lines_out;
      if (!lines_transform.empty()) opts.transform_path = lines_transform;
      opts.config = lines_flags.resolve();
      raylign::cmd_lines_debug(opts);
    }
  } catch (const CLI::Error& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const raylign::IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumeric;
  }
  return kExitOk;
}
