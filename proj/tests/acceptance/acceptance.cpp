// End-to-end acceptance run: one PASS/FAIL line per criterion, exit status 1
// if any fails. Trains the shipped configs at full size, so expect several
// minutes on one core.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "menunet/buyer.hpp"
#include "menunet/config.hpp"
#include "menunet/duality.hpp"
#include "menunet/evaluator.hpp"
#include "menunet/experiment.hpp"
#include "menunet/lp_baseline.hpp"
#include "menunet/oracles.hpp"
#include "menunet/trainer.hpp"
#include "support/gradcheck.hpp"

using namespace menunet;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, std::string note) {
    pass = pass && ok;
    notes.push_back((ok ? "" : "!") + std::move(note));
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const fs::path& work_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "menunet_acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

ExperimentConfig shipped(const std::string& name) {
  return load_config((fs::path(MENUNET_CONFIG_DIR) / (name + ".toml")).string());
}

// Every final menu trained during the run, for the IC/IR audit.
struct TrainedMenu {
  std::string name;
  Menu menu;
  DistributionSpec spec;
  ValuationKind kind;
};
std::vector<TrainedMenu> trained;

struct TrainRun {
  nlohmann::json report;
  Menu menu;
  double seconds;
};

TrainRun train_config(const std::string& name) {
  const ExperimentConfig cfg = shipped(name);
  Overrides o;
  o.out = (work_dir() / name).string();
  std::ostringstream log;
  const auto t0 = Clock::now();
  nlohmann::json report = cmd_train(cfg, o, log);
  const double secs = seconds_since(t0);
  Menu menu = load_menu((work_dir() / name / "menu.json").string());
  trained.push_back({name, menu, cfg.distribution, cfg.valuation});
  return {std::move(report), std::move(menu), secs};
}

Outcome closed_forms() {
  Outcome out;
  const auto t0 = Clock::now();
  const double tri2 = exact_revenue(*optimal_triangle(2.0).menu, DistributionSpec::uniform_triangle(2.0));
  out.require(std::abs(tri2 - (12 + 2 * std::sqrt(2.0)) / 27) < 1e-12, fmt::format("triangle c=2 {:.15f}", tri2));
  const auto rect = DistributionSpec::uniform_rect(1, 1);
  const double three = exact_revenue(Menu::with_exit(2, {{{1.0, 1.0}, 5.0 / 6}, {{1.0, 0.0}, 2.0 / 3}}), rect);
  out.require(std::abs(three - 59.0 / 108) < 1e-12, fmt::format("3-menu {:.15f}", three));
  const double bundle = exact_revenue(Menu::with_exit(2, {{{1.0, 1.0}, std::sqrt(6.0) / 3}}), rect);
  out.require(std::abs(bundle - 2 * std::sqrt(6.0) / 9) < 1e-12, fmt::format("bundle {:.15f}", bundle));
  for (double c : {1.5, 2.0, 2.5, 3.0}) {
    const double r = exact_revenue(*optimal_triangle(c).menu, DistributionSpec::uniform_triangle(c));
    const double formula = 2.0 / 27 * (4 + c + std::sqrt(c * (c - 1)));
    out.require(std::abs(r - formula) < 1e-12, fmt::format("c={} err {:.1e}", c, std::abs(r - formula)));
  }
  const double secs = seconds_since(t0);
  out.require(secs < 1.0, fmt::format("{:.3f} s", secs));
  return out;
}

Outcome table_reproduction() {
  Outcome out;
  for (const char* name : {"u01sq", "rect_c1.5", "rect_c2"}) {
    const TrainRun r = train_config(name);
    const double opt = r.report["optimality"].get<double>();
    out.require(opt >= 0.9995, fmt::format("{} {:.6f}", name, opt));
    out.require(r.seconds < 300.0, fmt::format("{:.0f} s", r.seconds));
  }
  return out;
}

Outcome restricted_size() {
  Outcome out;
  const TrainRun k3 = train_config("u01sq_k3");
  out.require(k3.report["optimality"].get<double>() >= 0.999,
              fmt::format("k=3 {:.6f}", k3.report["optimality"].get<double>()));
  bool asymmetric = false;
  for (std::size_t i = 1; i < k3.menu.size(); ++i) {
    const MenuItem& it = k3.menu[i];
    const double d1 = std::max({std::abs(it.allocation[0] - 1), std::abs(it.allocation[1]), std::abs(it.price - 2.0 / 3)});
    const double d2 = std::max({std::abs(it.allocation[0]), std::abs(it.allocation[1] - 1), std::abs(it.price - 2.0 / 3)});
    asymmetric = asymmetric || std::min(d1, d2) <= 0.05;
  }
  out.require(asymmetric, "single-good item at 2/3");
  const TrainRun k2 = train_config("u01sq_k2");
  out.require(k2.report["optimality"].get<double>() >= 0.999,
              fmt::format("k=2 {:.6f}", k2.report["optimality"].get<double>()));
  return out;
}

Outcome gradients() {
  Outcome out;
  const auto spec = DistributionSpec::uniform_rect(1, 1);
  const ValueGrid grid = make_grid(spec, 20);
  double worst = 0.0;
  for (std::uint64_t draw = 0; draw < 20; ++draw) {
    const MechanismParams p = initial_params(2, 10, MechanismMode::Free, spec.max_value(), 1000 + draw, 3.0);
    for (double lambda : {10.0, 100.0}) {
      worst = std::max(worst, testing::check_gradient(p, grid, ValuationKind::Additive, lambda).max_rel_error);
    }
  }
  out.require(worst < 1e-4, fmt::format("max rel error {:.2e}", worst));
  return out;
}

Outcome lp_baseline() {
  Outcome out;
  const TrainRun r = train_config("lp_n10");
  const double lp = r.report["lp"]["objective"].get<double>();
  const double trainer = r.report["lp"]["trainer_grid_revenue"].get<double>();
  out.require(std::abs(lp - trainer) <= 1e-3, fmt::format("N=10 LP {:.6f} trainer {:.6f}", lp, trainer));

  const LpSolution s10 = solve_lp(build_lp(make_grid(DistributionSpec::uniform_rect(1, 1), 10)));
  const AuditReport audit = audit_direct(s10.mechanism);
  out.require(audit.passes(1e-6), fmt::format("audit IC {:.1e} IR {:.1e}", audit.max_ic_violation,
                                              audit.max_ir_violation));

  const auto t0 = Clock::now();
  const LpSolution s30 = solve_lp(build_lp(make_grid(DistributionSpec::uniform_rect(1, 1), 30)));
  const double secs = seconds_since(t0);
  out.require(secs < 3600.0 && std::isfinite(s30.objective),
              fmt::format("N=30 {:.6f} in {:.0f} s", s30.objective, secs));
  return out;
}

Outcome certificates() {
  Outcome out;
  for (double c : {1.5, 2.0, 2.5}) {
    const auto t0 = Clock::now();
    const Menu best = *optimal_triangle(c).menu;
    const fs::path good = work_dir() / fmt::format("opt_c{}.json", c);
    save_menu(best, good.string());
    std::vector<MenuItem> offers(best.items().begin() + 1, best.items().end());
    offers.back().price += 0.05;
    const fs::path bad = work_dir() / fmt::format("perturbed_c{}.json", c);
    save_menu(Menu::with_exit(2, offers), bad.string());

    std::ostringstream log;
    const bool ok = cmd_certify(c, good.string(), "", kDefaultQuadN, log)["verdict"] == "pass";
    const bool rejected = cmd_certify(c, bad.string(), "", kDefaultQuadN, log)["verdict"] == "fail";
    const double secs = seconds_since(t0);
    out.require(ok && rejected && secs < 30.0,
                fmt::format("c={} optimum {} perturbed {} {:.1f} s", c, ok ? "pass" : "fail",
                            rejected ? "fail" : "pass", secs));
  }
  return out;
}

Outcome deterministic() {
  Outcome out;
  const TrainRun r = train_config("deterministic_triangle_c2");
  const double opt = r.report["optimality"].get<double>();
  out.require(opt >= 0.997 && opt <= 1.0, fmt::format("{:.6f} of the optimum", opt));
  return out;
}

Outcome unit_demand() {
  Outcome out;
  const ExperimentConfig cfg = shipped("unit_demand");
  double worst = 0.0;
  std::size_t checks = 0;
  const TrainResult res = train(cfg.distribution, cfg.valuation, cfg.train,
                                [&](std::size_t, std::size_t it, const MechanismParams& p) {
                                  if (it % 100 != 0) return;
                                  const Menu menu = materialize(p);
                                  for (const MenuItem& item : menu.items()) {
                                    worst = std::max(worst, item.allocation[0] + item.allocation[1]);
                                  }
                                  ++checks;
                                });
  for (const MenuItem& item : res.menu.items()) worst = std::max(worst, item.allocation[0] + item.allocation[1]);
  trained.push_back({"unit_demand", res.menu, cfg.distribution, cfg.valuation});
  out.require(worst <= 1 + 1e-12, fmt::format("max x1+x2 {:.17g} over {} checks", worst, checks));
  return out;
}

// Hard-buyer IC and IR on random values drawn from each run's distribution.
Outcome exactness() {
  Outcome out;
  std::mt19937_64 rng(20260);
  for (const TrainedMenu& t : trained) {
    const Polygon box = t.spec.support();
    double x0 = box[0].x, x1 = box[0].x, y0 = box[0].y, y1 = box[0].y;
    for (Point2 p : box) {
      x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
    }
    std::uniform_real_distribution<double> ux(x0, x1), uy(y0, y1);
    std::size_t violations = 0;
    for (int s = 0; s < 100000;) {
      const double v[2] = {ux(rng), uy(rng)};
      if (t.spec.density_at({v[0], v[1]}) <= 0.0) continue;
      ++s;
      const std::size_t pick = hard_response(t.menu, v, t.kind);
      const auto u = menu_utility(t.menu, v, t.kind);
      const bool ic = std::all_of(u.begin(), u.end(), [&](double x) { return x <= u[pick]; });
      const bool ir = u[pick] >= 0.0;
      if (!ic || !ir) ++violations;
    }
    out.require(violations == 0, fmt::format("{} {}", t.name, violations));
  }
  out.require(trained.size() >= 7, fmt::format("{} menus", trained.size()));
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"oracle closed forms", closed_forms},
      {"trained optimality on U[0,1]x[0,c]", table_reproduction},
      {"restricted menu size", restricted_size},
      {"gradient vs finite differences", gradients},
      {"LP baseline", lp_baseline},
      {"duality certificate", certificates},
      {"deterministic prices", deterministic},
      {"unit-demand feasibility", unit_demand},
      {"hard-buyer IC/IR audit", exactness},
  };
  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.require(false, fmt::format("threw: {}", e.what()));
    }
    std::string notes;
    for (const auto& n : o.notes) notes += (notes.empty() ? "" : "; ") + n;
    fmt::print("criterion {}: {} {} ({:.1f} s) [{}]\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
               seconds_since(t0), notes);
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
