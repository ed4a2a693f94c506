#pragma once

#include "menunet/core.hpp"
#include "menunet/interior_point.hpp"

#include <Eigen/SparseCore>

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace menunet {

// Direct-mechanism LP over a value grid. Per grid point i the variables are
// x_1(i)..x_m(i) in [0,1] followed by a free payment p(i), stored at
// (m+1)*i + 0..m. Rows are "A z <= b": one IC row per ordered pair (i, j),
// i != j, then one IR row per point.

inline constexpr double kMaxLpRows = 1e8;

struct LpInstance {
  std::size_t m = 0;
  std::size_t points = 0;
  std::size_t num_vars = 0;
  std::size_t num_rows = 0;
  std::size_t ic_rows = 0;
  std::size_t ir_rows = 0;
  std::vector<double> objective;  // maximized
  std::vector<Eigen::Triplet<double>> entries;
  std::vector<double> row_upper;
  std::vector<double> var_lower;
  std::vector<double> var_upper;
  std::vector<double> values;  // grid coordinates, point-major, for reporting
  std::vector<double> masses;
};

/// Throws std::length_error when the row count would exceed kMaxLpRows.
LpInstance build_lp(const ValueGrid& grid);

struct DirectMechanism {
  std::size_t m = 0;
  std::vector<double> values;      // points * m
  std::vector<double> masses;      // points
  std::vector<double> allocation;  // points * m
  std::vector<double> payment;     // points

  std::size_t points() const { return payment.size(); }
  double utility(std::size_t type, std::size_t report) const;
  double revenue() const;
};

struct LpSolution {
  DirectMechanism mechanism;
  double objective = 0.0;
  double dual_objective = 0.0;
  std::size_t iterations = 0;
  double seconds = 0.0;
};

/// Solves the LP with the interior point method. Bounds become extra rows.
LpSolution solve_lp(const LpInstance& lp, const IpmOptions& options = {});

struct AuditReport {
  double max_ic_violation = 0.0;  // max over pairs of u(i, j) - u(i, i)
  std::size_t ic_type = 0;
  std::size_t ic_report = 0;
  double max_ir_violation = 0.0;  // max over points of -u(i, i)
  std::size_t ir_type = 0;

  bool passes(double tol) const { return max_ic_violation <= tol && max_ir_violation <= tol; }
};

/// Brute force over all ordered pairs, independent of the LP rows.
AuditReport audit_direct(const DirectMechanism& mech);

/// Taxation-principle extraction: distinct (x, p) outcomes deduplicated at
/// `resolution`, exit item prepended. Throws std::invalid_argument naming the
/// worst pair when IC is violated by more than `ic_tol`.
Menu menu_from_direct(const DirectMechanism& mech, double resolution = 1e-4,
                      double ic_tol = 1e-4);

/// Free-format MPS with OBJSENSE MAX.
void write_mps(const LpInstance& lp, std::ostream& out, const std::string& name = "MENULP");
/// CSV with columns v1..vm, x1..xm, p.
void write_solution_csv(const DirectMechanism& mech, std::ostream& out);

}  // namespace menunet
