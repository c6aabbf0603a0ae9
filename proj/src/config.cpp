#include "raylign/config.hpp"

#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "raylign/errors.hpp"
#include "raylign/io.hpp"

namespace raylign {

using nlohmann::json;

Method method_from_string(const std::string& name) {
  if (name == "line-loss") return Method::LineLoss;
  if (name == "cd") return Method::Cd;
  if (name == "cd-w") return Method::CdW;
  if (name == "icp") return Method::Icp;
  if (name == "svd-surrogate") return Method::SvdSurrogate;
  throw Error("unknown method: " + name);
}

std::string to_string(Method m) {
  switch (m) {
    case Method::LineLoss: return "line-loss";
    case Method::Cd: return "cd";
    case Method::CdW: return "cd-w";
    case Method::Icp: return "icp";
    case Method::SvdSurrogate: return "svd-surrogate";
  }
  return "line-loss";
}

std::string to_string(SamplerKind k) {
  switch (k) {
    case SamplerKind::SphereChord: return "sphere-chord";
    case SamplerKind::BoxPointDirection: return "box-point-direction";
    case SamplerKind::CloudPairPerturbed: return "cloud-pair-perturbed";
  }
  return "sphere-chord";
}

SamplerKind sampler_from_string(const std::string& name) {
  if (name == "sphere-chord") return SamplerKind::SphereChord;
  if (name == "box-point-direction") return SamplerKind::BoxPointDirection;
  if (name == "cloud-pair-perturbed") return SamplerKind::CloudPairPerturbed;
  throw Error("unknown sampler: " + name);
}

std::string to_string(IntersectionMode m) {
  return m == IntersectionMode::ConvexCombination ? "convex-combination"
                                                  : "all-candidates";
}

IntersectionMode intersection_mode_from_string(const std::string& name) {
  if (name == "convex-combination") return IntersectionMode::ConvexCombination;
  if (name == "all-candidates") return IntersectionMode::AllCandidates;
  throw Error("unknown intersection mode: " + name);
}

std::string RunConfig::to_json_string() const {
  json j;
  j["method"] = to_string(method);
  j["solver"] = {
      {"max_iterations", solver.max_iterations},
      {"learning_rate", solver.learning_rate},
      {"adam_beta1", solver.adam_beta1},
      {"adam_beta2", solver.adam_beta2},
      {"adam_epsilon", solver.adam_epsilon},
      {"lines_per_iteration", solver.lines_per_iteration},
      {"convergence_tol", solver.convergence_tol},
      {"resample_lines", solver.resample_lines},
      {"recompute_sphere", solver.recompute_sphere},
      {"sampler", to_string(solver.sampler)},
      {"sampler_perturb_scale", solver.sampler_perturb_scale},
      {"svd_printed_psi_weight", solver.svd_printed_psi_weight},
      {"seed", solver.seed},
      {"jobs", solver.jobs},
  };
  j["welsch"] = {{"nu0", welsch.nu0}};
  j["intersection"] = {
      {"delta", intersection.delta},
      {"k", intersection.k},
      {"mode", to_string(intersection.mode)},
      {"inverse_distance_weights", intersection.inverse_distance_weights},
  };
  return j.dump(2) + "\n";
}

RunConfig RunConfig::from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("config parse error: ") + e.what());
  }

  RunConfig c;
  if (j.contains("method")) c.method = method_from_string(j.at("method"));
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    auto get = [&s](const char* key, auto& field) {
      if (s.contains(key)) field = s.at(key);
    };
    get("max_iterations", c.solver.max_iterations);
    get("learning_rate", c.solver.learning_rate);
    get("adam_beta1", c.solver.adam_beta1);
    get("adam_beta2", c.solver.adam_beta2);
    get("adam_epsilon", c.solver.adam_epsilon);
    get("lines_per_iteration", c.solver.lines_per_iteration);
    get("convergence_tol", c.solver.convergence_tol);
    get("resample_lines", c.solver.resample_lines);
    get("recompute_sphere", c.solver.recompute_sphere);
    get("sampler_perturb_scale", c.solver.sampler_perturb_scale);
    get("svd_printed_psi_weight", c.solver.svd_printed_psi_weight);
    get("seed", c.solver.seed);
    get("jobs", c.solver.jobs);
    if (s.contains("sampler"))
      c.solver.sampler = sampler_from_string(s.at("sampler"));
  }
  if (j.contains("welsch")) c.welsch.nu0 = j.at("welsch").value("nu0", 0.5);
  if (j.contains("intersection")) {
    const auto& s = j.at("intersection");
    c.intersection.delta = s.value("delta", 0.0);
    c.intersection.k = s.value("k", 2);
    if (s.contains("mode"))
      c.intersection.mode = intersection_mode_from_string(s.at("mode"));
    c.intersection.inverse_distance_weights =
        s.value("inverse_distance_weights", false);
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json_string(text);
}

void RunConfig::save(const std::filesystem::path& path) const {
  io::atomic_write(path, to_json_string());
}

void RunConfig::apply_env_seed() {
  if (const char* env = std::getenv("RAYLIGN_SEED")) {
    solver.seed = std::strtoull(env, nullptr, 10);
  }
}

}  // namespace raylign
