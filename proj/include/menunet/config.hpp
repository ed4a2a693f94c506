#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "menunet/core.hpp"
#include "menunet/oracles.hpp"
#include "menunet/trainer.hpp"

namespace menunet {

/// Bad or missing config entry; field() is the dotted path, e.g. "train.iterations".
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct CompareConfig {
  bool oracle = false;   // report optimality against a known optimum (must exist)
  bool lp = false;       // also solve the LP at lp.grid_n and report both revenues
  bool duality = false;  // certify the reference and trained menus (triangle only)
};

struct LpConfig {
  std::size_t grid_n = 10;
  bool export_mps = false;
};

struct BenchConfig {
  std::vector<std::size_t> shared_grids{10, 15, 20, 25, 30};
  std::vector<std::size_t> trainer_grids{50, 100, 200};
  std::size_t iterations = 5000;
  std::size_t restarts = 5;
};

struct ExperimentConfig {
  std::string name = "experiment";
  DistributionSpec distribution = DistributionSpec::uniform_rect(1.0, 1.0);
  ValuationKind valuation = ValuationKind::Additive;
  TrainConfig train;
  CompareConfig compare;
  LpConfig lp;
  BenchConfig bench;
  std::string output_dir = "out";
};

/// Parses TOML (or JSON when the text starts with '{'). Unknown keys are errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

/// The known optimum the run is compared against, if any: the menu-size
/// capped references on U[0,1]^2 for k = 2, 3, the unrestricted rectangle and
/// triangle optima otherwise. Additive valuations only.
std::optional<OptimalReference> reference_for(const ExperimentConfig& config);

nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace menunet
