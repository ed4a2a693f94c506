// menunet: train menus, solve the LP baseline, benchmark both, certify
// triangle menus.
//
//   menunet train   --config configs/u01sq.toml [--out DIR] [--seed S] [--threads T] [--n-grid N]
//   menunet lp      --config configs/lp_n10.toml [--n-grid N]
//   menunet bench   --config configs/bench.toml
//   menunet certify --c 2 --menu menu.json [--out DIR]
//
// Exit codes: 0 success, 1 runtime failure, 2 bad config or usage,
// 3 certificate verdict "fail".

#include <CLI11.hpp>
#include <fmt/core.h>

#include <iostream>

#include "menunet/config.hpp"
#include "menunet/duality.hpp"
#include "menunet/experiment.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string out;
  std::int64_t seed = -1;
  int threads = -1;
  std::int64_t n_grid = -1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config, "experiment config (TOML or JSON)")->required();
    cmd->add_option("--out", out, "output directory (overrides output.dir)");
    cmd->add_option("--seed", seed, "random seed (overrides train.seed)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--threads", threads, "worker threads, 0 = all logical cores")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--n-grid", n_grid, "grid resolution N (overrides train.grid_n or lp.grid_n)")
        ->check(CLI::PositiveNumber);
  }

  menunet::Overrides overrides() const {
    menunet::Overrides o;
    if (!out.empty()) o.out = out;
    if (seed >= 0) o.seed = static_cast<std::uint64_t>(seed);
    if (threads >= 0) o.threads = threads;
    if (n_grid > 0) o.n_grid = static_cast<std::size_t>(n_grid);
    return o;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Menu learning for revenue-optimal selling of two goods"};
  app.require_subcommand(1);

  CommonFlags train_flags, lp_flags, bench_flags;
  auto* train = app.add_subcommand("train", "train a menu and write menu.json, trace.csv, regions.svg, report.json");
  train_flags.attach(train);
  auto* lp = app.add_subcommand("lp", "solve the direct-mechanism LP on the grid");
  lp_flags.attach(lp);
  auto* bench = app.add_subcommand("bench", "time trainer and LP across grid sizes");
  bench_flags.attach(bench);

  auto* certify = app.add_subcommand("certify", "check the transport certificate of a menu on the uniform triangle");
  double c = 0.0;
  std::string menu_path;
  std::string certify_out;
  std::size_t quad_n = menunet::kDefaultQuadN;
  certify->add_option("--c", c, "triangle parameter c >= 1")->required();
  certify->add_option("--menu", menu_path, "menu JSON")->required()->check(CLI::ExistingFile);
  certify->add_option("--out", certify_out, "directory for certificate.json");
  certify->add_option("--quad-n", quad_n, "quadrature subdivisions (>= 100)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*train) {
      menunet::cmd_train(menunet::load_config(train_flags.config), train_flags.overrides(), std::cout);
    } else if (*lp) {
      menunet::cmd_lp(menunet::load_config(lp_flags.config), lp_flags.overrides(), std::cout);
    } else if (*bench) {
      menunet::cmd_bench(menunet::load_config(bench_flags.config), bench_flags.overrides(), std::cout);
    } else if (*certify) {
      const auto report = menunet::cmd_certify(c, menu_path, certify_out, quad_n, std::cout);
      return report["verdict"] == "pass" ? 0 : 3;
    }
  } catch (const menunet::ConfigError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const menunet::UsageError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    // Bad command-line values reaching the library (e.g. certify --c 0.5).
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
