#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "raylign/config.hpp"
#include "raylign/datagen.hpp"
#include "raylign/evaluation.hpp"
#include "raylign/solvers.hpp"

namespace raylign {

std::string to_string(CropKind k);
CropKind crop_from_string(const std::string& name);

/// Runs the configured method on a cloud pair.
SolveResult run_method(Method method, const RunConfig& config,
                       const PointCloud& source, const PointCloud& target);

struct RegisterOptions {
  std::filesystem::path source_path;
  std::filesystem::path target_path;
  std::filesystem::path out_dir = "register_out";
  std::optional<std::filesystem::path> gt_path;
  RunConfig config;
};

struct RegisterOutcome {
  RigidTransform estimated;
  SolveTrace trace;
  double best_loss = 0.0;
  std::optional<EvalReport> eval;
};

/// register: solve, then write transform.txt, transformed_source.<ext>,
/// trace.csv and config.json into out_dir.
RegisterOutcome cmd_register(const RegisterOptions& opts);

struct GenbenchOptions {
  std::filesystem::path base_path;
  std::filesystem::path out_dir = "bench_data";
  int count = 20;
  PairSpec spec;  // spec.seed is the batch seed; pair i uses seed + i
};

/// genbench: writes pair_%04d_{source,target}.xyz + _gt.txt and
/// manifest.json. Byte-identical on rerun with the same inputs.
std::filesystem::path cmd_genbench(const GenbenchOptions& opts);

struct BenchOptions {
  std::filesystem::path manifest_path;  // manifest.json, or its directory
  std::filesystem::path out_dir = "bench_out";
  std::vector<Method> methods;
  /// Non-empty: additionally run line-loss at each nu0 (labelled
  /// line-loss_nu0=<x>).
  std::vector<double> nu0_sweep;
  RunConfig config;
  int jobs = 1;  // concurrent pairs
};

struct BenchRow {
  std::string pair_id;
  std::string method;
  bool ok = false;
  std::string status;  // "ok" or the failure reason
  EvalReport eval;
  int iterations = 0;
  double seconds = 0.0;
};

struct MethodSummary {
  std::string method;
  int pairs = 0;
  int failures = 0;
  double mean_err_r_deg = 0.0, median_err_r_deg = 0.0;
  double mean_err_t_l1 = 0.0, median_err_t_l1 = 0.0;
  double mean_err_t_l2 = 0.0, median_err_t_l2 = 0.0;
  double mean_err_pw_l1 = 0.0, median_err_pw_l1 = 0.0;
  double mean_err_pw_l2 = 0.0, median_err_pw_l2 = 0.0;
  double mean_seconds = 0.0;
};

struct BenchResult {
  std::vector<BenchRow> rows;          // pair-major, method order per pair
  std::vector<MethodSummary> summaries;
};

/// bench: every method on every pair; per_pair.csv, summary.csv and
/// recall_<method>.csv in out_dir. Per-pair failures land in the status
/// column without aborting the batch.
BenchResult cmd_bench(const BenchOptions& opts);

struct GradcheckOptions {
  int states = 20;
  double step = 1e-5;
  std::uint64_t seed = 7;
};

struct GradcheckOutcome {
  double chamfer_max_rel_err = 0.0;
  double line_max_rel_err = 0.0;
};

/// gradcheck: analytic vs central-difference gradients on random states.
GradcheckOutcome cmd_gradcheck(const GradcheckOptions& opts);

struct LinesDebugOptions {
  std::filesystem::path source_path;
  std::filesystem::path target_path;
  std::filesystem::path out_dir = "lines_debug";
  std::optional<std::filesystem::path> transform_path;
  RunConfig config;
};

/// lines-debug: dumps chords.csv and intersections.csv for plotting.
void cmd_lines_debug(const LinesDebugOptions& opts);

}  // namespace raylign
