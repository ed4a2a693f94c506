#include "menunet/interior_point.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace menunet {

namespace {

// Largest alpha keeping v + alpha * dv >= 0 (infinite when dv >= 0).
double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double alpha = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
  }
  return alpha;
}

class NormalSolver {
 public:
  explicit NormalSolver(const SparseRows& G) : G_(G), K_(G.cols(), G.cols()) {}

  void factor(const Eigen::VectorXd& w) {
    K_.setZero();
    for (Eigen::Index r = 0; r < G_.outerSize(); ++r) {
      const double wr = w[r];
      for (SparseRows::InnerIterator a(G_, r); a; ++a) {
        const double wa = wr * a.value();
        for (SparseRows::InnerIterator b(G_, r); b; ++b) {
          if (b.col() > a.col()) break;
          K_(a.col(), b.col()) += wa * b.value();
        }
      }
    }
    double diag = 0.0;
    for (Eigen::Index i = 0; i < K_.rows(); ++i) diag = std::max(diag, K_(i, i));
    double delta = 1e-14 * std::max(diag, 1.0);
    for (int attempt = 0; attempt < 8; ++attempt, delta *= 100.0) {
      Eigen::MatrixXd shifted = K_;
      shifted.diagonal().array() += delta;
      llt_.compute(shifted);
      if (llt_.info() == Eigen::Success) return;
    }
    throw IpmError("interior point: normal matrix is not positive definite");
  }

  // A few rounds of iterative refinement against the unshifted matrix; late
  // iterations are badly conditioned and a plain solve leaks into the dual residual.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    Eigen::VectorXd x = llt_.solve(rhs);
    for (int round = 0; round < 3; ++round) {
      const Eigen::VectorXd r = rhs - K_.selfadjointView<Eigen::Lower>() * x;
      x += llt_.solve(r);
    }
    return x;
  }

 private:
  const SparseRows& G_;
  Eigen::MatrixXd K_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

}  // namespace

IpmResult solve_inequality_lp(const SparseRows& G, const Eigen::VectorXd& h,
                              const Eigen::VectorXd& c, const IpmOptions& options) {
  const Eigen::Index n = G.cols();
  const Eigen::Index rows = G.rows();
  if (h.size() != rows || c.size() != n) {
    throw std::invalid_argument("interior point: dimension mismatch");
  }

  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd s = (h - G * z).cwiseMax(1.0);
  Eigen::VectorXd lam = Eigen::VectorXd::Ones(rows);

  const double h_scale = 1.0 + h.lpNorm<Eigen::Infinity>();
  const double c_scale = 1.0 + c.lpNorm<Eigen::Infinity>();
  NormalSolver normal(G);
  IpmResult out;
  double best_dual = std::numeric_limits<double>::infinity();
  int stalled = 0;

  for (std::size_t it = 0; it <= options.max_iterations; ++it) {
    const Eigen::VectorXd rp = G * z + s - h;
    const Eigen::VectorXd rd = c + G.transpose() * lam;
    const double pobj = c.dot(z);
    const double dobj = -h.dot(lam);
    const double mu = rows > 0 ? s.dot(lam) / static_cast<double>(rows) : 0.0;

    out.primal_residual = rp.lpNorm<Eigen::Infinity>() / h_scale;
    out.dual_residual = rd.lpNorm<Eigen::Infinity>() / c_scale;
    out.relative_gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
    out.iterations = it;
    if (options.verbose) {
      fmt::print("ipm {:3d} mu {:.2e} pobj {:.12g} dobj {:.12g} rp {:.2e} rd {:.2e} gap {:.2e}\n", it, mu,
                 pobj, dobj, out.primal_residual, out.dual_residual, out.relative_gap);
    }
    // Once mu bottoms out the dual residual only moves with round-off in the
    // normal solve, so accept a stalled one that is still within 100x tolerance.
    const bool converged_core =
        out.primal_residual <= options.feasibility_tol && out.relative_gap <= options.gap_tol;
    if (converged_core && out.dual_residual < best_dual * 0.5) {
      best_dual = out.dual_residual;
      stalled = 0;
    } else if (converged_core) {
      ++stalled;
    }
    const bool dual_ok = out.dual_residual <= options.feasibility_tol ||
                         (stalled >= 5 && out.dual_residual <= 100.0 * options.feasibility_tol);
    if (converged_core && dual_ok) {
      out.z = z;
      out.lambda = lam;
      out.primal_objective = pobj;
      out.dual_objective = dobj;
      return out;
    }
    if (it == options.max_iterations) break;

    const Eigen::VectorXd w = lam.cwiseQuotient(s);
    normal.factor(w);

    // Given the complementarity target rc, returns (dz, ds, dlam).
    auto direction = [&](const Eigen::VectorXd& rc, Eigen::VectorXd& dz, Eigen::VectorXd& ds,
                         Eigen::VectorXd& dlam) {
      const Eigen::VectorXd rc_s = rc.cwiseQuotient(s);
      const Eigen::VectorXd rhs = -rd - G.transpose() * (w.cwiseProduct(rp) - rc_s);
      dz = normal.solve(rhs);
      dlam = w.cwiseProduct(G * dz + rp) - rc_s;
      ds = -(rc + s.cwiseProduct(dlam)).cwiseQuotient(lam);
    };

    Eigen::VectorXd dz, ds, dlam;
    direction(s.cwiseProduct(lam), dz, ds, dlam);
    const double ap = std::min(1.0, max_step(s, ds));
    const double ad = std::min(1.0, max_step(lam, dlam));
    const double mu_aff = (s + ap * ds).dot(lam + ad * dlam) / static_cast<double>(rows);
    const double sigma = std::pow(mu_aff / mu, 3.0);

    const Eigen::VectorXd rc =
        ((s.cwiseProduct(lam) + ds.cwiseProduct(dlam)).array() - sigma * mu).matrix();
    direction(rc, dz, ds, dlam);
    const double step_p = std::min(1.0, 0.99 * max_step(s, ds));
    const double step_d = std::min(1.0, 0.99 * max_step(lam, dlam));
    z += step_p * dz;
    s += step_p * ds;
    lam += step_d * dlam;
    if (options.verbose) fmt::print("    sigma {:.2e} step_p {:.3f} step_d {:.3f}\n", sigma, step_p, step_d);
  }
  throw IpmError(fmt::format(
      "interior point: iteration limit {} exceeded (primal {:.2e}, dual {:.2e}, gap {:.2e})",
      options.max_iterations, out.primal_residual, out.dual_residual, out.relative_gap));
}

}  // namespace menunet
