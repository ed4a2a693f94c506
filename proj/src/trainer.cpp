#include "menunet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <fmt/format.h>

#include "menunet/buyer.hpp"
#include "menunet/evaluator.hpp"
#include "menunet/parallel.hpp"

namespace menunet {

std::string to_string(MechanismMode mode) {
  switch (mode) {
    case MechanismMode::Free:
      return "free";
    case MechanismMode::UnitDemand:
      return "unit_demand";
    case MechanismMode::DeterministicPricesOnly:
      return "deterministic";
  }
  return "unknown";
}

MechanismMode mode_from_string(const std::string& name) {
  if (name == "free") return MechanismMode::Free;
  if (name == "unit_demand" || name == "unit-demand") return MechanismMode::UnitDemand;
  if (name == "deterministic" || name == "deterministic_prices_only") {
    return MechanismMode::DeterministicPricesOnly;
  }
  throw std::invalid_argument(fmt::format("unknown mechanism mode '{}'", name));
}

std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::Adam ? "adam" : "gradient_descent";
}

OptimizerKind optimizer_from_string(const std::string& name) {
  if (name == "adam") return OptimizerKind::Adam;
  if (name == "gradient_descent" || name == "gd" || name == "sgd") return OptimizerKind::GradientDescent;
  throw std::invalid_argument(fmt::format("unknown optimizer '{}'", name));
}

std::string to_string(RampKind kind) {
  switch (kind) {
    case RampKind::Geometric:
      return "geometric";
    case RampKind::Linear:
      return "linear";
    case RampKind::Constant:
      return "constant";
  }
  return "unknown";
}

RampKind ramp_from_string(const std::string& name) {
  if (name == "geometric") return RampKind::Geometric;
  if (name == "linear") return RampKind::Linear;
  if (name == "constant") return RampKind::Constant;
  throw std::invalid_argument(fmt::format("unknown lambda ramp '{}'", name));
}

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

double inverse_softplus(double y) {
  if (!(y > 0.0)) throw std::invalid_argument("inverse_softplus needs y > 0");
  return y > 30.0 ? y : std::log(std::expm1(y));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::size_t deterministic_menu_size(std::size_t m) { return std::size_t{1} << m; }

MechanismParams MechanismParams::zeros(std::size_t m, std::size_t k, MechanismMode mode) {
  MechanismParams p;
  p.m = m;
  p.mode = mode;
  p.k = mode == MechanismMode::DeterministicPricesOnly ? deterministic_menu_size(m) : k;
  if (mode != MechanismMode::DeterministicPricesOnly) p.alloc_raw.assign(m * (p.k - 1), 0.0);
  p.price_raw.assign(p.k - 1, 0.0);
  p.validate();
  return p;
}

void MechanismParams::validate() const {
  if (m == 0) throw std::invalid_argument("params: m must be positive");
  if (k < 2) throw std::invalid_argument("params: k must be at least 2");
  if (mode == MechanismMode::DeterministicPricesOnly) {
    if (m > 16) throw std::invalid_argument("params: deterministic mode supports m <= 16");
    if (k != deterministic_menu_size(m)) {
      throw std::invalid_argument(fmt::format("params: deterministic mode needs k = {}", deterministic_menu_size(m)));
    }
    if (!alloc_raw.empty()) throw std::invalid_argument("params: deterministic mode has no allocation parameters");
  } else if (alloc_raw.size() != m * (k - 1)) {
    throw std::invalid_argument("params: alloc_raw must hold m * (k - 1) entries");
  }
  if (price_raw.size() != k - 1) throw std::invalid_argument("params: price_raw must hold k - 1 entries");
  for (double x : alloc_raw) {
    if (!std::isfinite(x)) throw std::domain_error("params: non-finite allocation parameter");
  }
  for (double x : price_raw) {
    if (!std::isfinite(x)) throw std::domain_error("params: non-finite price parameter");
  }
}

double LambdaSchedule::at(std::size_t iteration, std::size_t iterations) const {
  if (ramp == RampKind::Constant) return final;
  const auto ramp_iters = static_cast<std::size_t>(std::floor(ramp_fraction * static_cast<double>(iterations)));
  if (ramp_iters == 0 || iteration >= ramp_iters) return final;
  const double t = static_cast<double>(iteration) / static_cast<double>(ramp_iters);
  const double lam = ramp == RampKind::Geometric ? start * std::pow(final / start, t)
                                                 : start + (final - start) * t;
  return std::min(lam, final);
}

void TrainConfig::validate() const {
  if (mode != MechanismMode::DeterministicPricesOnly && k < 2) {
    throw std::invalid_argument("k: menu size must be at least 2");
  }
  if (iterations < 1) throw std::invalid_argument("iterations: must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning_rate: must be positive");
  }
  if (!(lambda.start > 0.0)) throw std::invalid_argument("lambda_start: must be positive");
  if (!(lambda.start <= lambda.final) || !std::isfinite(lambda.final)) {
    throw std::invalid_argument("lambda_final: must be finite and >= lambda_start");
  }
  if (!(lambda.ramp_fraction >= 0.0 && lambda.ramp_fraction <= 1.0)) {
    throw std::invalid_argument("ramp_fraction: must lie in [0, 1]");
  }
  if (grid_n < 1) throw std::invalid_argument("grid_n: must be at least 1");
  if (restarts < 1) throw std::invalid_argument("restarts: must be at least 1");
  if (!(lr_lambda_ref >= 0.0) || !std::isfinite(lr_lambda_ref)) {
    throw std::invalid_argument("lr_lambda_ref: must be finite and nonnegative");
  }
  if (!(init_logit_scale >= 0.0) || !std::isfinite(init_logit_scale)) {
    throw std::invalid_argument("init_logit_scale: must be finite and nonnegative");
  }
}

namespace {

// Squashed menu parameters as dense arrays; row 0 is the exit item.
struct DenseMenu {
  std::size_t k = 0;
  std::size_t m = 0;
  std::vector<double> x;  // k * m
  std::vector<double> p;  // k
};

DenseMenu squash(const MechanismParams& params) {
  params.validate();
  DenseMenu d;
  d.k = params.k;
  d.m = params.m;
  d.x.assign(d.k * d.m, 0.0);
  d.p.assign(d.k, 0.0);
  const std::size_t m = params.m;
  for (std::size_t j = 1; j < d.k; ++j) {
    d.p[j] = softplus(params.price_raw[j - 1]);
    double* xj = d.x.data() + j * m;
    switch (params.mode) {
      case MechanismMode::Free:
        for (std::size_t i = 0; i < m; ++i) xj[i] = sigmoid(params.alloc_raw[(j - 1) * m + i]);
        break;
      case MechanismMode::UnitDemand: {
        const double* a = params.alloc_raw.data() + (j - 1) * m;
        double top = 0.0;  // the dummy logit
        for (std::size_t i = 0; i < m; ++i) top = std::max(top, a[i]);
        double total = std::exp(-top);
        for (std::size_t i = 0; i < m; ++i) {
          xj[i] = std::exp(a[i] - top);
          total += xj[i];
        }
        for (std::size_t i = 0; i < m; ++i) xj[i] /= total;
        break;
      }
      case MechanismMode::DeterministicPricesOnly:
        for (std::size_t i = 0; i < m; ++i) xj[i] = ((j >> (m - 1 - i)) & 1u) ? 1.0 : 0.0;
        break;
    }
  }
  return d;
}

struct Partial {
  double revenue = 0.0;
  std::vector<double> gx;  // d revenue / d x, k * m
  std::vector<double> gp;  // d revenue / d p, k
};

Partial combine(Partial a, Partial b) {
  a.revenue += b.revenue;
  for (std::size_t i = 0; i < a.gx.size(); ++i) a.gx[i] += b.gx[i];
  for (std::size_t i = 0; i < a.gp.size(); ++i) a.gp[i] += b.gp[i];
  return a;
}

Partial accumulate(const DenseMenu& d, const ValueGrid& grid, ValuationKind kind, double lambda,
                   bool want_grad, int threads) {
  if (!(lambda > 0.0)) throw std::invalid_argument(fmt::format("lambda must be positive, got {}", lambda));
  if (grid.dim() != d.m) throw std::invalid_argument("grid and mechanism dimensions differ");
  if (kind == ValuationKind::Combinatorial && d.m != 2) {
    throw std::invalid_argument("combinatorial valuation is defined for two items");
  }
  const std::size_t k = d.k;
  const std::size_t m = d.m;
  const std::size_t blocks = block_count(grid.size());
  std::vector<Partial> parts(blocks);
  for_each_block(blocks, resolve_threads(threads), [&](std::size_t b) {
    Partial part;
    if (want_grad) {
      part.gx.assign(k * m, 0.0);
      part.gp.assign(k, 0.0);
    }
    std::vector<double> u(k);
    std::vector<double> s(k);
    const std::size_t end = std::min(grid.size(), (b + 1) * kBlockSize);
    for (std::size_t n = b * kBlockSize; n < end; ++n) {
      const auto v = grid.point(n);
      const double w = grid.mass(n);
      const double bonus = kind == ValuationKind::Combinatorial ? v[0] * v[1] : 0.0;
      u[0] = 0.0;
      double top = 0.0;
      for (std::size_t j = 1; j < k; ++j) {
        double uj = bonus - d.p[j];
        const double* xj = d.x.data() + j * m;
        for (std::size_t i = 0; i < m; ++i) uj += v[i] * xj[i];
        if (!std::isfinite(uj)) throw std::domain_error("non-finite utility");
        u[j] = uj;
        top = std::max(top, uj);
      }
      double total = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        s[j] = std::exp(lambda * (u[j] - top));
        total += s[j];
      }
      double pbar = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        s[j] /= total;
        pbar += s[j] * d.p[j];
      }
      part.revenue += w * pbar;
      if (!want_grad) continue;
      // d pbar / d u_j = lambda s_j (p_j - pbar);  d pbar / d p_j = s_j - that
      for (std::size_t j = 1; j < k; ++j) {
        const double coef = w * s[j];
        const double dud = lambda * (d.p[j] - pbar);
        part.gp[j] += coef * (1.0 - dud);
        double* gxj = part.gx.data() + j * m;
        for (std::size_t i = 0; i < m; ++i) gxj[i] += coef * dud * v[i];
      }
    }
    parts[b] = std::move(part);
  });
  return tree_reduce(std::move(parts), combine);
}

}  // namespace

Menu materialize(const MechanismParams& params) {
  const DenseMenu d = squash(params);
  std::vector<MenuItem> items;
  items.reserve(d.k);
  for (std::size_t j = 0; j < d.k; ++j) {
    items.push_back({std::vector<double>(d.x.begin() + static_cast<std::ptrdiff_t>(j * d.m),
                                         d.x.begin() + static_cast<std::ptrdiff_t>((j + 1) * d.m)),
                     d.p[j]});
  }
  return Menu(d.m, std::move(items));
}

double soft_revenue(const MechanismParams& params, const ValueGrid& grid, ValuationKind kind,
                    double lambda, int threads) {
  return accumulate(squash(params), grid, kind, lambda, false, threads).revenue;
}

LossGradient gradient(const MechanismParams& params, const ValueGrid& grid, ValuationKind kind,
                      double lambda, int threads) {
  const DenseMenu d = squash(params);
  const Partial acc = accumulate(d, grid, kind, lambda, true, threads);
  const std::size_t m = d.m;
  LossGradient g;
  g.soft_revenue = acc.revenue;
  g.alloc_raw.assign(params.alloc_raw.size(), 0.0);
  g.price_raw.assign(params.price_raw.size(), 0.0);
  for (std::size_t j = 1; j < d.k; ++j) {
    g.price_raw[j - 1] = -acc.gp[j] * sigmoid(params.price_raw[j - 1]);
    const double* xj = d.x.data() + j * m;
    const double* gxj = acc.gx.data() + j * m;
    double* out = params.alloc_raw.empty() ? nullptr : g.alloc_raw.data() + (j - 1) * m;
    switch (params.mode) {
      case MechanismMode::Free:
        for (std::size_t i = 0; i < m; ++i) out[i] = -gxj[i] * xj[i] * (1.0 - xj[i]);
        break;
      case MechanismMode::UnitDemand: {
        double dot = 0.0;
        for (std::size_t i = 0; i < m; ++i) dot += gxj[i] * xj[i];
        for (std::size_t i = 0; i < m; ++i) out[i] = -xj[i] * (gxj[i] - dot);
        break;
      }
      case MechanismMode::DeterministicPricesOnly:
        break;
    }
  }
  return g;
}

MechanismParams initial_params(std::size_t m, std::size_t k, MechanismMode mode, double max_value,
                               std::uint64_t seed, double logit_scale) {
  MechanismParams p = MechanismParams::zeros(m, k, mode);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> logit(-logit_scale, logit_scale);
  std::uniform_real_distribution<double> price(0.1 * max_value, 0.9 * max_value);
  for (double& a : p.alloc_raw) a = logit(rng);
  for (double& b : p.price_raw) b = inverse_softplus(price(rng));
  return p;
}

double evaluate_menu(const Menu& menu, const DistributionSpec& spec, const ValueGrid& grid,
                     ValuationKind kind, int threads) {
  if (spec.is_uniform() && menu.dim() == 2 && kind != ValuationKind::Combinatorial) {
    return exact_revenue(menu, spec, kind);
  }
  return grid_revenue(menu, grid, kind, threads);
}

namespace {

class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double lr, std::size_t n) : kind_(kind), lr_(lr), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::vector<double>& theta, const std::vector<double>& grad, double lr_scale) {
    const double lr = lr_ * lr_scale;
    if (kind_ == OptimizerKind::GradientDescent) {
      for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= lr * grad[i];
      return;
    }
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;
    ++t_;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m_[i] = beta1 * m_[i] + (1.0 - beta1) * grad[i];
      v_[i] = beta2 * v_[i] + (1.0 - beta2) * grad[i] * grad[i];
      theta[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
    }
  }

 private:
  OptimizerKind kind_;
  double lr_;
  std::vector<double> m_;
  std::vector<double> v_;
  std::size_t t_ = 0;
};

std::vector<double> flatten(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out(a);
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

void unflatten(const std::vector<double>& flat, MechanismParams& p) {
  std::copy_n(flat.begin(), p.alloc_raw.size(), p.alloc_raw.begin());
  std::copy(flat.begin() + static_cast<std::ptrdiff_t>(p.alloc_raw.size()), flat.end(), p.price_raw.begin());
}

struct RunResult {
  MechanismParams params;
  std::vector<TraceRow> trace;
  double exact_revenue = 0.0;
};

RunResult run_once(const DistributionSpec& spec, const ValueGrid& grid, ValuationKind kind,
                   const TrainConfig& config, std::size_t restart, const IterationHook& hook) {
  MechanismParams params = initial_params(grid.dim(), config.k, config.mode, spec.max_value(),
                                          config.seed + restart, config.init_logit_scale);
  std::vector<double> theta = flatten(params.alloc_raw, params.price_raw);
  Optimizer opt(config.optimizer, config.learning_rate, theta.size());
  RunResult run;
  run.trace.reserve(config.iterations);
  for (std::size_t it = 0; it < config.iterations; ++it) {
    const double lambda = config.lambda.at(it, config.iterations);
    if (hook) hook(restart, it, params);
    LossGradient g;
    try {
      g = gradient(params, grid, kind, lambda, config.threads);
    } catch (const std::domain_error& e) {
      throw DivergenceError(it, fmt::format("training diverged at iteration {}: {}", it, e.what()));
    }
    if (!std::isfinite(g.soft_revenue)) {
      throw DivergenceError(it, fmt::format("training diverged at iteration {}: loss is not finite", it));
    }
    const Menu menu = materialize(params);
    run.trace.push_back({it, lambda, g.soft_revenue, evaluate_menu(menu, spec, grid, kind, config.threads)});
    const std::vector<double> grad = flatten(g.alloc_raw, g.price_raw);
    for (double x : grad) {
      if (!std::isfinite(x)) {
        throw DivergenceError(it, fmt::format("training diverged at iteration {}: gradient is not finite", it));
      }
    }
    opt.step(theta, grad, config.lr_scale(lambda));
    unflatten(theta, params);
  }
  try {
    params.validate();
  } catch (const std::domain_error& e) {
    throw DivergenceError(config.iterations, fmt::format("training diverged: {}", e.what()));
  }
  run.exact_revenue = evaluate_menu(materialize(params), spec, grid, kind, config.threads);
  run.params = std::move(params);
  return run;
}

}  // namespace

TrainResult train_on_grid(const DistributionSpec& spec, const ValueGrid& grid, ValuationKind kind,
                          const TrainConfig& config, const IterationHook& hook) {
  config.validate();
  std::vector<double> revenues;
  RunResult best;
  std::size_t best_restart = 0;
  for (std::size_t r = 0; r < config.restarts; ++r) {
    RunResult run = run_once(spec, grid, kind, config, r, hook);
    revenues.push_back(run.exact_revenue);
    if (r == 0 || run.exact_revenue > best.exact_revenue) {
      best = std::move(run);
      best_restart = r;
    }
  }
  Menu menu = materialize(best.params);
  return TrainResult{std::move(menu), std::move(best.params), std::move(best.trace),
                     best.exact_revenue, best_restart, std::move(revenues)};
}

TrainResult train(const DistributionSpec& spec, ValuationKind kind, const TrainConfig& config,
                  const IterationHook& hook) {
  config.validate();
  const ValueGrid grid = make_grid(spec, config.grid_n);
  return train_on_grid(spec, grid, kind, config, hook);
}

namespace {

std::vector<double> paid_prices(const Menu& menu, const ValueGrid& grid, ValuationKind kind) {
  const auto choice = grid_choices(menu, grid, kind);
  std::vector<double> paid(choice.size());
  for (std::size_t i = 0; i < choice.size(); ++i) paid[i] = menu[choice[i]].price;
  return paid;
}

bool same_payments(const std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > 1e-12) return false;
  }
  return true;
}

Menu drop_unchosen(const Menu& menu, const ValueGrid& grid, ValuationKind kind) {
  const auto choice = grid_choices(menu, grid, kind);
  std::vector<bool> used(menu.size(), false);
  used[0] = true;
  for (auto c : choice) used[c] = true;
  std::vector<MenuItem> kept;
  for (std::size_t j = 0; j < menu.size(); ++j) {
    if (used[j]) kept.push_back(menu[j]);
  }
  return Menu(menu.dim(), std::move(kept));
}

bool near_duplicate(const MenuItem& a, const MenuItem& b) {
  if (std::abs(a.price - b.price) >= 1e-3) return false;
  for (std::size_t i = 0; i < a.allocation.size(); ++i) {
    if (std::abs(a.allocation[i] - b.allocation[i]) >= 1e-3) return false;
  }
  return true;
}

}  // namespace

Menu extract_clean_menu(const Menu& menu, const ValueGrid& grid, ValuationKind kind) {
  const std::vector<double> reference = paid_prices(menu, grid, kind);
  Menu current = drop_unchosen(menu, grid, kind);

  // merge: try removing the later item of each near-duplicate pair
  for (std::size_t a = 1; a < current.size(); ++a) {
    for (std::size_t b = a + 1; b < current.size();) {
      if (!near_duplicate(current[a], current[b])) {
        ++b;
        continue;
      }
      std::vector<MenuItem> items = current.items();
      items.erase(items.begin() + static_cast<std::ptrdiff_t>(b));
      Menu candidate(current.dim(), std::move(items));
      if (same_payments(reference, paid_prices(candidate, grid, kind))) {
        current = std::move(candidate);
      } else {
        ++b;
      }
    }
  }

  for (std::size_t j = 1; j < current.size(); ++j) {
    for (std::size_t i = 0; i < current.dim(); ++i) {
      const double x = current[j].allocation[i];
      double target = x;
      if (x < 1e-3) target = 0.0;
      if (x > 1.0 - 1e-3) target = 1.0;
      if (target == x) continue;
      std::vector<MenuItem> items = current.items();
      items[j].allocation[i] = target;
      if (items[j].is_exit()) continue;
      Menu candidate(current.dim(), std::move(items));
      if (same_payments(reference, paid_prices(candidate, grid, kind))) current = std::move(candidate);
    }
  }
  return drop_unchosen(current, grid, kind);
}

}  // namespace menunet
