#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dioph/core.hpp"
#include "dioph/forms.hpp"

namespace dioph::cli {

using nlohmann::json;

enum class GammaSource { synthetic, table, system };

struct GammaSpec {
  GammaSource source = GammaSource::synthetic;
  int m = 1;                      // synthetic: γ_p = m/p, and table fallback
  std::map<UInt, double> values;  // table
  bool table_fallback = false;
  int level = 2;                  // system: inner density level
};

/// Validated experiment description. `canonical` holds the normalized JSON
/// (defaults filled in) and is what reports echo and cache keys hash.
struct ExperimentConfig {
  forms::FormSystem system;
  std::optional<forms::LinearFamily> linear;
  IVec v;

  Int N = 1;
  Int D = 1;
  IVec s;
  std::optional<IVec> b;
  bool accelerate = false;

  int m = 1;
  std::optional<double> eps;
  std::optional<double> eta;
  std::optional<double> R;
  UInt omega = 1;
  std::optional<UInt> q;
  std::string weight = "gpy";

  std::vector<UInt> primes;
  std::vector<int> levels;
  GammaSpec gamma;

  std::optional<RVec> alpha;
  double theta = 0.1;
  Int Q_max = 20;
  UInt P_max = 50;
  int max_level = 6;
  double level_cost = 2e6;
  std::string local_method = "padic";
  std::string integral = "monte_carlo";
  std::uint64_t seed = 20240601;
  std::uint64_t samples = 1'000'000;
  std::optional<double> delta;
  double Phi = 20;

  double budget = 1e9;
  unsigned workers = 1;

  json canonical;

  ExecutionLimits limits() const { return {budget, workers}; }
};

/// Throws Error(validation) naming the offending key.
ExperimentConfig parse_config(const json& document);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical inputs for cache keys: the normalized config without fields that
/// cannot change a result (workers).
json cache_inputs(const ExperimentConfig& config);

}  // namespace dioph::cli
