#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <fmt/core.h>
#include <json.hpp>

#include "menunet/core.hpp"
#include "menunet/evaluator.hpp"
#include "menunet/oracles.hpp"

using namespace menunet;
namespace fs = std::filesystem;

namespace {

const fs::path& scratch() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "menunet_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

struct Run {
  int code;
  std::string err;
};

Run run(const std::string& args) {
  const fs::path err = scratch() / "stderr.txt";
  const std::string cmd = fmt::format("'{}' {} >'{}' 2>'{}'", MENUNET_CLI, args,
                                      (scratch() / "stdout.txt").string(), err.string());
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

constexpr const char* kSmallTrain = R"(
name = "small"
[mechanism]
k = 3
[train]
iterations = 300
grid_n = 20
restarts = 2
[compare]
oracle = true
)";

}  // namespace

TEST_CASE("malformed configs exit 2 and name the field") {
  const fs::path cfg = scratch() / "bad.toml";
  write(cfg, "[train]\nlearning_rate = -0.5\n");
  const Run r = run(fmt::format("train --config '{}'", cfg.string()));
  CHECK(r.code == 2);
  CHECK(r.err.find("train.learning_rate") != std::string::npos);

  write(cfg, "[mechanism]\nk = \"many\"\n");
  const Run s = run(fmt::format("train --config '{}'", cfg.string()));
  CHECK(s.code == 2);
  CHECK(s.err.find("mechanism.k") != std::string::npos);

  CHECK(run("train").code == 2);
  CHECK(run("frobnicate").code == 2);
}

TEST_CASE("certify: exit 0 on the optimum, 3 on a perturbed menu") {
  const Menu best = *optimal_triangle(2.0).menu;
  const fs::path good = scratch() / "good.json";
  save_menu(best, good.string());
  CHECK(run(fmt::format("certify --c 2 --menu '{}' --out '{}'", good.string(), scratch().string())).code == 0);
  const auto cert = nlohmann::json::parse(slurp(scratch() / "certificate.json"));
  CHECK(cert["verdict"] == "pass");

  std::vector<MenuItem> offers(best.items().begin() + 1, best.items().end());
  offers.back().price += 0.05;
  const fs::path bad = scratch() / "bad.json";
  save_menu(Menu::with_exit(2, offers), bad.string());
  CHECK(run(fmt::format("certify --c 2 --menu '{}'", bad.string())).code == 3);
  CHECK(run(fmt::format("certify --c 0.5 --menu '{}'", good.string())).code == 2);
}

TEST_CASE("train writes its artifacts and is reproducible") {
  const fs::path cfg = scratch() / "small.toml";
  write(cfg, kSmallTrain);
  // same output directory twice, since report.json records it
  const fs::path a = scratch() / "run_a", b = scratch() / "run_b";
  REQUIRE(run(fmt::format("train --config '{}' --out '{}' --threads 1", cfg.string(), a.string())).code == 0);
  fs::copy(a, b);
  REQUIRE(run(fmt::format("train --config '{}' --out '{}' --threads 1", cfg.string(), a.string())).code == 0);
  for (const char* f : {"menu.json", "trace.csv", "regions.svg", "report.json"}) {
    CAPTURE(f);
    REQUIRE(fs::exists(a / f));
    CHECK(slurp(a / f) == slurp(b / f));
  }

  // the reported revenue is the revenue of the saved menu
  const auto report = nlohmann::json::parse(slurp(a / "report.json"));
  const Menu menu = load_menu((a / "menu.json").string());
  CHECK(std::abs(exact_revenue(menu, DistributionSpec::uniform_rect(1, 1)) - report["revenue"].get<double>()) <
        1e-12);
  CHECK(report["menu_size"] == menu.size());
  CHECK(menu.size() <= 3);
  CHECK(report["optimality"].get<double>() > 0.9);
  CHECK(slurp(a / "trace.csv").rfind("iteration,lambda,soft_rev,exact_rev\n", 0) == 0);

  // a different seed gives a different run
  const fs::path c = scratch() / "run_c";
  REQUIRE(run(fmt::format("train --config '{}' --out '{}' --threads 1 --seed 9", cfg.string(), c.string())).code == 0);
  CHECK(slurp(c / "trace.csv") != slurp(a / "trace.csv"));
}

TEST_CASE("a two-item cap leaves exit plus one offer") {
  const fs::path cfg = scratch() / "k2.toml";
  write(cfg, "[mechanism]\nk = 2\n[train]\niterations = 300\ngrid_n = 20\nrestarts = 1\n");
  const fs::path out = scratch() / "k2";
  REQUIRE(run(fmt::format("train --config '{}' --out '{}'", cfg.string(), out.string())).code == 0);
  CHECK(load_menu((out / "menu.json").string()).size() <= 2);
}

TEST_CASE("lp refuses large grids and solves small ones") {
  const fs::path cfg = scratch() / "lp.toml";
  write(cfg, "[lp]\ngrid_n = 4\nexport_mps = true\n");
  const Run big = run(fmt::format("lp --config '{}' --n-grid 41", cfg.string()));
  CHECK(big.code == 2);
  CHECK(big.err.find("41") != std::string::npos);

  const fs::path out = scratch() / "lp";
  REQUIRE(run(fmt::format("lp --config '{}' --out '{}'", cfg.string(), out.string())).code == 0);
  for (const char* f : {"lp_solution.csv", "lp_menu.json", "lp_report.json", "lp.mps"}) {
    CAPTURE(f);
    CHECK(fs::exists(out / f));
  }
  const auto report = nlohmann::json::parse(slurp(out / "lp_report.json"));
  CHECK(report["audit"]["pass"] == true);
  CHECK(report["points"] == 16);
}
