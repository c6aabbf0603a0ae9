#pragma once

#include <filesystem>
#include <string>

#include "raylign/intersection.hpp"
#include "raylign/loss.hpp"
#include "raylign/sampling.hpp"
#include "raylign/solvers.hpp"

namespace raylign {

enum class Method { LineLoss, Cd, CdW, Icp, SvdSurrogate };

Method method_from_string(const std::string& name);
std::string to_string(Method m);
std::string to_string(SamplerKind k);
SamplerKind sampler_from_string(const std::string& name);
std::string to_string(IntersectionMode m);
IntersectionMode intersection_mode_from_string(const std::string& name);

/// Everything a run needs, serializable to a single JSON config file.
/// CLI flags override file values; the effective config is echoed into each
/// output directory. Round-trips losslessly.
struct RunConfig {
  Method method = Method::LineLoss;
  SolverConfig solver;
  WelschParams welsch;
  IntersectionParams intersection;  // delta == 0 means per-cloud auto

  std::string to_json_string() const;
  static RunConfig from_json_string(const std::string& text);

  static RunConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  /// Applies the RAYLIGN_SEED environment variable, when set.
  void apply_env_seed();
};

}  // namespace raylign
