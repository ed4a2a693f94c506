#include "menunet/lp_baseline.hpp"

#include <fmt/core.h>
#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace menunet {

LpInstance build_lp(const ValueGrid& grid) {
  const std::size_t n = grid.size();
  const std::size_t m = grid.dim();
  const double rows = static_cast<double>(n) * static_cast<double>(n);
  if (rows > kMaxLpRows) {
    throw std::length_error(
        fmt::format("build_lp: {} points would need {:.3g} rows (limit {:.0e})", n, rows, kMaxLpRows));
  }
  const std::size_t w = m + 1;
  LpInstance lp;
  lp.m = m;
  lp.points = n;
  lp.num_vars = n * w;
  lp.ic_rows = n * (n - 1);
  lp.ir_rows = n;
  lp.num_rows = lp.ic_rows + lp.ir_rows;
  lp.values.assign(grid.coords().begin(), grid.coords().end());
  lp.masses.assign(grid.masses().begin(), grid.masses().end());

  lp.objective.assign(lp.num_vars, 0.0);
  lp.var_lower.assign(lp.num_vars, 0.0);
  lp.var_upper.assign(lp.num_vars, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    lp.objective[i * w + m] = grid.mass(i);
    lp.var_lower[i * w + m] = -std::numeric_limits<double>::infinity();
    lp.var_upper[i * w + m] = std::numeric_limits<double>::infinity();
  }

  lp.entries.reserve(lp.num_rows * 2 * w);
  lp.row_upper.assign(lp.num_rows, 0.0);
  // IC (i reports j): v_i.x_j - p_j - (v_i.x_i - p_i) <= 0
  std::size_t row = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto v = grid.point(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const auto r = static_cast<int>(row);
      for (std::size_t d = 0; d < m; ++d) {
        if (v[d] != 0.0) {
          lp.entries.emplace_back(r, static_cast<int>(j * w + d), v[d]);
          lp.entries.emplace_back(r, static_cast<int>(i * w + d), -v[d]);
        }
      }
      lp.entries.emplace_back(r, static_cast<int>(j * w + m), -1.0);
      lp.entries.emplace_back(r, static_cast<int>(i * w + m), 1.0);
      ++row;
    }
  }
  // IR: p_i - v_i.x_i <= 0
  for (std::size_t i = 0; i < n; ++i, ++row) {
    const auto v = grid.point(i);
    const auto r = static_cast<int>(row);
    for (std::size_t d = 0; d < m; ++d) {
      if (v[d] != 0.0) lp.entries.emplace_back(r, static_cast<int>(i * w + d), -v[d]);
    }
    lp.entries.emplace_back(r, static_cast<int>(i * w + m), 1.0);
  }
  return lp;
}

double DirectMechanism::utility(std::size_t type, std::size_t report) const {
  double u = -payment[report];
  for (std::size_t d = 0; d < m; ++d) u += values[type * m + d] * allocation[report * m + d];
  return u;
}

double DirectMechanism::revenue() const {
  double r = 0.0;
  for (std::size_t i = 0; i < points(); ++i) r += masses[i] * payment[i];
  return r;
}

LpSolution solve_lp(const LpInstance& lp, const IpmOptions& options) {
  const auto start = std::chrono::steady_clock::now();

  // Append finite variable bounds as rows.
  std::vector<Eigen::Triplet<double>> entries = lp.entries;
  std::vector<double> h = lp.row_upper;
  int row = static_cast<int>(lp.num_rows);
  for (std::size_t v = 0; v < lp.num_vars; ++v) {
    if (std::isfinite(lp.var_upper[v])) {
      entries.emplace_back(row++, static_cast<int>(v), 1.0);
      h.push_back(lp.var_upper[v]);
    }
    if (std::isfinite(lp.var_lower[v])) {
      entries.emplace_back(row++, static_cast<int>(v), -1.0);
      h.push_back(-lp.var_lower[v]);
    }
  }
  SparseRows G(row, static_cast<Eigen::Index>(lp.num_vars));
  G.setFromTriplets(entries.begin(), entries.end());
  entries.clear();
  entries.shrink_to_fit();

  // Minimize the negated objective, scaled so the largest coefficient is 1.
  Eigen::VectorXd c(static_cast<Eigen::Index>(lp.num_vars));
  double scale = 0.0;
  for (double o : lp.objective) scale = std::max(scale, std::abs(o));
  if (scale == 0.0) scale = 1.0;
  for (std::size_t v = 0; v < lp.num_vars; ++v) c[static_cast<Eigen::Index>(v)] = -lp.objective[v] / scale;
  const Eigen::VectorXd hv = Eigen::Map<const Eigen::VectorXd>(h.data(), static_cast<Eigen::Index>(h.size()));

  const IpmResult res = solve_inequality_lp(G, hv, c, options);

  LpSolution out;
  out.objective = -res.primal_objective * scale;
  out.dual_objective = -res.dual_objective * scale;
  out.iterations = res.iterations;
  DirectMechanism& mech = out.mechanism;
  mech.m = lp.m;
  mech.values = lp.values;
  mech.masses = lp.masses;
  mech.allocation.resize(lp.points * lp.m);
  mech.payment.resize(lp.points);
  const std::size_t w = lp.m + 1;
  for (std::size_t i = 0; i < lp.points; ++i) {
    for (std::size_t d = 0; d < lp.m; ++d) {
      mech.allocation[i * lp.m + d] = res.z[static_cast<Eigen::Index>(i * w + d)];
    }
    mech.payment[i] = res.z[static_cast<Eigen::Index>(i * w + lp.m)];
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

AuditReport audit_direct(const DirectMechanism& mech) {
  AuditReport rep;
  rep.max_ic_violation = -std::numeric_limits<double>::infinity();
  rep.max_ir_violation = -std::numeric_limits<double>::infinity();
  const std::size_t n = mech.points();
  for (std::size_t i = 0; i < n; ++i) {
    const double truthful = mech.utility(i, i);
    if (-truthful > rep.max_ir_violation) {
      rep.max_ir_violation = -truthful;
      rep.ir_type = i;
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double gain = mech.utility(i, j) - truthful;
      if (gain > rep.max_ic_violation) {
        rep.max_ic_violation = gain;
        rep.ic_type = i;
        rep.ic_report = j;
      }
    }
  }
  if (n < 2) rep.max_ic_violation = 0.0;
  if (n == 0) rep.max_ir_violation = 0.0;
  return rep;
}

Menu menu_from_direct(const DirectMechanism& mech, double resolution, double ic_tol) {
  const AuditReport audit = audit_direct(mech);
  if (audit.max_ic_violation > ic_tol) {
    throw std::invalid_argument(fmt::format(
        "menu_from_direct: IC violated by {:.3g} (type {} prefers the outcome of type {})",
        audit.max_ic_violation, audit.ic_type, audit.ic_report));
  }
  const std::size_t m = mech.m;
  std::vector<MenuItem> items;
  items.push_back(MenuItem{std::vector<double>(m, 0.0), 0.0});
  auto close = [&](const MenuItem& item, std::span<const double> x, double p) {
    if (std::abs(item.price - p) >= resolution) return false;
    for (std::size_t d = 0; d < m; ++d) {
      if (std::abs(item.allocation[d] - x[d]) >= resolution) return false;
    }
    return true;
  };
  for (std::size_t i = 0; i < mech.points(); ++i) {
    std::vector<double> x(mech.allocation.begin() + static_cast<std::ptrdiff_t>(i * m),
                          mech.allocation.begin() + static_cast<std::ptrdiff_t>((i + 1) * m));
    for (double& xd : x) xd = std::clamp(xd, 0.0, 1.0);
    double p = mech.payment[i];
    if (p < 0.0) {
      if (p < -ic_tol) {
        throw std::invalid_argument(
            fmt::format("menu_from_direct: type {} has negative payment {:.3g}", i, p));
      }
      p = 0.0;
    }
    bool seen = false;
    for (const MenuItem& item : items) {
      if (close(item, x, p)) {
        seen = true;
        break;
      }
    }
    if (!seen) items.push_back(MenuItem{std::move(x), p});
  }
  return Menu(m, std::move(items));
}

void write_mps(const LpInstance& lp, std::ostream& out, const std::string& name) {
  const std::size_t w = lp.m + 1;
  auto var_name = [&](std::size_t v) {
    const std::size_t i = v / w;
    const std::size_t d = v % w;
    return d == lp.m ? fmt::format("p{}", i) : fmt::format("x{}_{}", d + 1, i);
  };
  auto row_name = [&](std::size_t r) {
    return r < lp.ic_rows ? fmt::format("IC{}", r) : fmt::format("IR{}", r - lp.ic_rows);
  };

  // Column-major view of the triplets.
  std::vector<std::vector<std::pair<std::size_t, double>>> cols(lp.num_vars);
  for (const auto& t : lp.entries) {
    cols[static_cast<std::size_t>(t.col())].emplace_back(static_cast<std::size_t>(t.row()), t.value());
  }

  out << "NAME " << name << "\n";
  out << "OBJSENSE\n    MAX\n";
  out << "ROWS\n N OBJ\n";
  for (std::size_t r = 0; r < lp.num_rows; ++r) out << " L " << row_name(r) << "\n";
  out << "COLUMNS\n";
  for (std::size_t v = 0; v < lp.num_vars; ++v) {
    const std::string vn = var_name(v);
    if (lp.objective[v] != 0.0) out << fmt::format(" {} OBJ {:.17g}\n", vn, lp.objective[v]);
    for (const auto& [r, a] : cols[v]) out << fmt::format(" {} {} {:.17g}\n", vn, row_name(r), a);
  }
  out << "RHS\n";
  for (std::size_t r = 0; r < lp.num_rows; ++r) {
    if (lp.row_upper[r] != 0.0) out << fmt::format(" RHS {} {:.17g}\n", row_name(r), lp.row_upper[r]);
  }
  out << "BOUNDS\n";
  for (std::size_t v = 0; v < lp.num_vars; ++v) {
    const bool lo = std::isfinite(lp.var_lower[v]);
    const bool up = std::isfinite(lp.var_upper[v]);
    const std::string vn = var_name(v);
    if (!lo && !up) {
      out << " FR BND " << vn << "\n";
      continue;
    }
    if (!lo) out << " MI BND " << vn << "\n";
    if (lo && lp.var_lower[v] != 0.0) out << fmt::format(" LO BND {} {:.17g}\n", vn, lp.var_lower[v]);
    if (up) out << fmt::format(" UP BND {} {:.17g}\n", vn, lp.var_upper[v]);
  }
  out << "ENDATA\n";
}

void write_solution_csv(const DirectMechanism& mech, std::ostream& out) {
  const std::size_t m = mech.m;
  std::string header;
  for (std::size_t d = 0; d < m; ++d) header += fmt::format("v{},", d + 1);
  for (std::size_t d = 0; d < m; ++d) header += fmt::format("x{},", d + 1);
  out << header << "p\n";
  for (std::size_t i = 0; i < mech.points(); ++i) {
    std::string line;
    for (std::size_t d = 0; d < m; ++d) line += fmt::format("{:.17g},", mech.values[i * m + d]);
    for (std::size_t d = 0; d < m; ++d) line += fmt::format("{:.17g},", mech.allocation[i * m + d]);
    out << line << fmt::format("{:.17g}\n", mech.payment[i]);
  }
}

}  // namespace menunet
