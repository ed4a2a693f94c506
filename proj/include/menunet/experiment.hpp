#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "menunet/config.hpp"

namespace menunet {

// The four CLI commands. Each writes its artifacts under an output directory
// and returns the JSON report it wrote; progress goes to `log`.

struct Overrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;  // 0 means all logical cores
  std::optional<std::size_t> n_grid;
};

/// Invalid request that is not a config syntax problem (e.g. LP grid too large).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMaxLpGrid = 40;

/// menu.json (cleaned), trace.csv, regions.svg, report.json.
nlohmann::json cmd_train(ExperimentConfig config, const Overrides& overrides, std::ostream& log);

/// lp_solution.csv, lp_menu.json, lp_report.json and optionally lp.mps.
/// Throws UsageError for N > kMaxLpGrid.
nlohmann::json cmd_lp(ExperimentConfig config, const Overrides& overrides, std::ostream& log);

/// bench.csv with rows (method, N, seconds, revenue); revenue is the exact
/// revenue of the (extracted) menu on the continuous distribution.
nlohmann::json cmd_bench(ExperimentConfig config, const Overrides& overrides, std::ostream& log);

/// certificate.json for `menu_path` on the uniform triangle with parameter c.
nlohmann::json cmd_certify(double c, const std::string& menu_path, const std::string& out_dir,
                           std::size_t quad_n, std::ostream& log);

}  // namespace menunet
