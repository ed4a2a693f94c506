#include "menunet/experiment.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>

#include <fmt/core.h>
#include <fmt/ostream.h>

#include "menunet/duality.hpp"
#include "menunet/evaluator.hpp"
#include "menunet/lp_baseline.hpp"
#include "menunet/parallel.hpp"
#include "menunet/trainer.hpp"

namespace menunet {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void apply(ExperimentConfig& cfg, const Overrides& o) {
  if (o.out) cfg.output_dir = *o.out;
  if (o.seed) cfg.train.seed = *o.seed;
  if (o.threads) cfg.train.threads = resolve_threads(*o.threads);
}

fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw std::runtime_error(fmt::format("failed writing '{}'", path.string()));
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

bool exact_geometry(const DistributionSpec& spec, ValuationKind kind, std::size_t m) {
  return spec.is_uniform() && m == 2 && kind != ValuationKind::Combinatorial;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
  std::string out = "iteration,lambda,soft_rev,exact_rev\n";
  for (const TraceRow& r : trace) {
    out += fmt::format("{},{:.17g},{:.17g},{:.17g}\n", r.iteration, r.lambda, r.soft_revenue,
                       r.exact_revenue);
  }
  return out;
}

}  // namespace

json cmd_train(ExperimentConfig cfg, const Overrides& overrides, std::ostream& log) {
  apply(cfg, overrides);
  if (overrides.n_grid) cfg.train.grid_n = *overrides.n_grid;
  cfg.train.validate();
  const TrainConfig& tc = cfg.train;
  const fs::path dir = prepare_dir(cfg.output_dir);

  fmt::print(log, "train {}: {}, {} valuation, mode {}, k={}, N={}, {} restarts x {} iterations\n",
             cfg.name, cfg.distribution.describe(), to_string(cfg.valuation), to_string(tc.mode), tc.k,
             tc.grid_n, tc.restarts, tc.iterations);
  const auto t0 = std::chrono::steady_clock::now();
  const ValueGrid grid = make_grid(cfg.distribution, tc.grid_n);
  const TrainResult result = train_on_grid(cfg.distribution, grid, cfg.valuation, tc);
  const Menu menu = extract_clean_menu(result.menu, grid, cfg.valuation);
  const double revenue = evaluate_menu(menu, cfg.distribution, grid, cfg.valuation, tc.threads);
  const bool exact = exact_geometry(cfg.distribution, cfg.valuation, grid.dim());

  json report;
  report["name"] = cfg.name;
  report["config"] = to_json(cfg);
  report["revenue"] = revenue;
  report["revenue_method"] = exact ? "exact" : "grid";
  report["raw_revenue"] = result.exact_revenue;
  report["grid_revenue"] = grid_revenue(menu, grid, cfg.valuation, tc.threads);
  report["final_soft_revenue"] = result.trace.empty() ? 0.0 : result.trace.back().soft_revenue;
  report["best_restart"] = result.best_restart;
  report["restart_revenues"] = result.restart_revenues;
  report["menu_size"] = menu.size();
  report["raw_menu_size"] = result.menu.size();

  if (const auto ref = reference_for(cfg)) {
    report["reference"] = {{"name", ref->name}, {"opt_revenue", ref->opt_revenue}};
    report["optimality"] = revenue / ref->opt_revenue;
  } else {
    report["reference"] = nullptr;
    report["optimality"] = nullptr;
  }

  if (cfg.compare.lp) {
    if (cfg.lp.grid_n > kMaxLpGrid) {
      throw UsageError(fmt::format("lp.grid_n = {} exceeds the LP limit of {}", cfg.lp.grid_n, kMaxLpGrid));
    }
    const ValueGrid lp_grid = make_grid(cfg.distribution, cfg.lp.grid_n);
    const LpSolution sol = solve_lp(build_lp(lp_grid));
    report["lp"] = {{"grid_n", cfg.lp.grid_n},
                    {"objective", sol.objective},
                    {"trainer_grid_revenue", grid_revenue(menu, lp_grid, cfg.valuation, tc.threads)},
                    {"iterations", sol.iterations}};
    fmt::print(log, "  LP at N={}: objective {:.6f}\n", cfg.lp.grid_n, sol.objective);
  }
  if (cfg.compare.duality) {
    const double c = std::get<UniformTriangle>(cfg.distribution.variant()).c;
    json dual;
    dual["trained"] = to_json(certify(menu, c));
    if (const auto ref = reference_for(cfg); ref && ref->menu) dual["reference"] = to_json(certify(*ref->menu, c));
    report["duality"] = dual;
  }

  save_menu(menu, (dir / "menu.json").string());
  write_text(dir / "trace.csv", trace_csv(result.trace));
  write_text(dir / "regions.svg", exact ? region_svg(menu, cfg.distribution, cfg.valuation)
                                        : choice_svg(menu, cfg.distribution, grid, cfg.valuation));
  write_json(dir / "report.json", report);

  fmt::print(log, "  revenue {:.7f} ({}), {} menu items, {:.1f} s\n", revenue, exact ? "exact" : "grid",
             menu.size(), seconds_since(t0));
  if (!report["optimality"].is_null()) {
    fmt::print(log, "  optimality {:.5f}% of {}\n", 100.0 * report["optimality"].get<double>(),
               report["reference"]["name"].get<std::string>());
  }
  fmt::print(log, "  wrote {}\n", dir.string());
  return report;
}

json cmd_lp(ExperimentConfig cfg, const Overrides& overrides, std::ostream& log) {
  apply(cfg, overrides);
  if (overrides.n_grid) cfg.lp.grid_n = *overrides.n_grid;
  const std::size_t n = cfg.lp.grid_n;
  if (n > kMaxLpGrid) {
    throw UsageError(fmt::format("LP refused for N = {}: the program grows as N^4 rows (limit N <= {})", n,
                                 kMaxLpGrid));
  }
  if (cfg.valuation != ValuationKind::Additive) {
    throw UsageError("the LP baseline assumes additive valuations");
  }
  const fs::path dir = prepare_dir(cfg.output_dir);
  const ValueGrid grid = make_grid(cfg.distribution, n);
  const LpInstance lp = build_lp(grid);
  fmt::print(log, "lp {}: N={} points={} variables={} rows={}\n", cfg.name, n, lp.points, lp.num_vars,
             lp.num_rows);
  if (cfg.lp.export_mps) {
    std::ofstream mps(dir / "lp.mps");
    write_mps(lp, mps);
  }
  const LpSolution sol = solve_lp(lp);
  const AuditReport audit = audit_direct(sol.mechanism);

  json report;
  report["name"] = cfg.name;
  report["grid_n"] = n;
  report["points"] = lp.points;
  report["variables"] = lp.num_vars;
  report["rows"] = lp.num_rows;
  report["objective"] = sol.objective;
  report["dual_objective"] = sol.dual_objective;
  report["iterations"] = sol.iterations;
  report["audit"] = {{"max_ic_violation", audit.max_ic_violation},
                     {"max_ir_violation", audit.max_ir_violation},
                     {"pass", audit.passes(1e-6)}};
  try {
    const Menu menu = menu_from_direct(sol.mechanism);
    const double revenue = evaluate_menu(menu, cfg.distribution, grid, cfg.valuation, 1);
    save_menu(menu, (dir / "lp_menu.json").string());
    report["menu_size"] = menu.size();
    report["extracted_revenue"] = revenue;
    report["extracted_revenue_method"] =
        exact_geometry(cfg.distribution, cfg.valuation, grid.dim()) ? "exact" : "grid";
    if (const auto ref = reference_for(cfg)) {
      report["reference"] = {{"name", ref->name}, {"opt_revenue", ref->opt_revenue}};
      report["extracted_optimality"] = revenue / ref->opt_revenue;
    }
  } catch (const std::invalid_argument& e) {
    report["extraction_error"] = e.what();
  }
  {
    std::ofstream csv(dir / "lp_solution.csv");
    write_solution_csv(sol.mechanism, csv);
  }
  write_json(dir / "lp_report.json", report);
  fmt::print(log, "  objective {:.9f} after {} iterations, {:.2f} s; audit IC {:.2e} IR {:.2e}\n",
             sol.objective, sol.iterations, sol.seconds, audit.max_ic_violation, audit.max_ir_violation);
  fmt::print(log, "  wrote {}\n", dir.string());
  return report;
}

json cmd_bench(ExperimentConfig cfg, const Overrides& overrides, std::ostream& log) {
  apply(cfg, overrides);
  if (cfg.valuation != ValuationKind::Additive) throw UsageError("bench compares against the LP: additive only");
  const fs::path dir = prepare_dir(cfg.output_dir);
  TrainConfig tc = cfg.train;
  tc.iterations = cfg.bench.iterations;
  tc.restarts = cfg.bench.restarts;

  std::string csv = "method,N,seconds,revenue\n";
  json rows = json::array();
  auto record = [&](const std::string& method, std::size_t n, double secs, double revenue) {
    csv += fmt::format("{},{},{:.3f},{:.17g}\n", method, n, secs, revenue);
    rows.push_back({{"method", method}, {"N", n}, {"seconds", secs}, {"revenue", revenue}});
    fmt::print(log, "  {:<7} N={:<4} {:9.2f} s  revenue {:.7f}\n", method, n, secs, revenue);
  };
  auto run_trainer = [&](std::size_t n) {
    tc.grid_n = n;
    const auto t0 = std::chrono::steady_clock::now();
    const ValueGrid grid = make_grid(cfg.distribution, n);
    const TrainResult res = train_on_grid(cfg.distribution, grid, cfg.valuation, tc);
    const Menu menu = extract_clean_menu(res.menu, grid, cfg.valuation);
    const double secs = seconds_since(t0);
    record("trainer", n, secs, evaluate_menu(menu, cfg.distribution, grid, cfg.valuation, tc.threads));
  };

  fmt::print(log, "bench {}: {}\n", cfg.name, cfg.distribution.describe());
  for (std::size_t n : cfg.bench.shared_grids) {
    run_trainer(n);
    if (n > kMaxLpGrid) {
      fmt::print(log, "  lp      N={:<4} skipped (limit {})\n", n, kMaxLpGrid);
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    const ValueGrid grid = make_grid(cfg.distribution, n);
    const LpSolution sol = solve_lp(build_lp(grid));
    const double secs = seconds_since(t0);
    const Menu menu = menu_from_direct(sol.mechanism);
    record("lp", n, secs, evaluate_menu(menu, cfg.distribution, grid, cfg.valuation, 1));
  }
  for (std::size_t n : cfg.bench.trainer_grids) run_trainer(n);

  write_text(dir / "bench.csv", csv);
  fmt::print(log, "  wrote {}\n", (dir / "bench.csv").string());
  return {{"rows", rows}};
}

json cmd_certify(double c, const std::string& menu_path, const std::string& out_dir, std::size_t quad_n,
                 std::ostream& log) {
  const Menu menu = load_menu(menu_path);
  const DualityCertificate cert = certify(menu, c, quad_n);
  const json report = to_json(cert);
  if (!out_dir.empty()) write_json(prepare_dir(out_dir) / "certificate.json", report);
  fmt::print(log, "certify c={} menu={}: dual {:.12f} revenue {:.12f} -> {}\n", c, menu_path,
             cert.dual_objective, cert.revenue, cert.pass ? "pass" : "fail");
  for (const RegionBalance& r : cert.regions) {
    fmt::print(log, "  region {}: mu+ {:.12f} mu- {:.12f} gap {:.3e}\n", r.item, r.mu_plus, r.mu_minus, r.gap());
  }
  return report;
}

}  // namespace menunet
