#pragma once

#include <Eigen/SparseCore>

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace menunet {

// Primal-dual interior point method (Mehrotra predictor-corrector) for
//
//   minimize c'z  subject to  G z <= h
//
// Newton steps go through the normal equations G'WG, which is formed densely,
// so the method suits problems with a few thousand variables and arbitrarily
// many rows. Everything is deterministic: no pivoting choices, no threads.

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct IpmOptions {
  std::size_t max_iterations = 200;
  double feasibility_tol = 1e-8;  // relative primal/dual residual
  double gap_tol = 1e-9;          // relative duality gap
  bool verbose = false;
};

struct IpmResult {
  Eigen::VectorXd z;       // primal
  Eigen::VectorXd lambda;  // row multipliers, >= 0
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  std::size_t iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double relative_gap = 0.0;
};

class IpmError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws IpmError when the iteration limit is hit or the normal matrix
/// cannot be factored.
IpmResult solve_inequality_lp(const SparseRows& G, const Eigen::VectorXd& h,
                              const Eigen::VectorXd& c, const IpmOptions& options = {});

}  // namespace menunet
