#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "menunet/core.hpp"

namespace menunet {

enum class MechanismMode { Free, UnitDemand, DeterministicPricesOnly };
enum class OptimizerKind { GradientDescent, Adam };
enum class RampKind { Geometric, Linear, Constant };

std::string to_string(MechanismMode mode);
MechanismMode mode_from_string(const std::string& name);
std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_from_string(const std::string& name);
std::string to_string(RampKind kind);
RampKind ramp_from_string(const std::string& name);

/// Unconstrained parameters of a menu of size k (exit item included).
///
///   Free:        x = sigmoid(alloc_raw), p = softplus(price_raw)
///   UnitDemand:  each item's allocation is the softmax of (alloc_raw column, 0)
///                without the dummy entry, so sum_i x_i < 1
///   DeterministicPricesOnly: allocations are the 2^m - 1 nonzero 0/1
///                vectors in binary order (for m = 2: (0,1), (1,0), (1,1));
///                only prices train and alloc_raw is empty
struct MechanismParams {
  std::size_t m = 2;
  std::size_t k = 2;
  MechanismMode mode = MechanismMode::Free;
  /// Item-major: entry (j, i) at j * m + i for trainable item j, good i.
  std::vector<double> alloc_raw;
  std::vector<double> price_raw;

  static MechanismParams zeros(std::size_t m, std::size_t k, MechanismMode mode);
  std::size_t trainable_items() const { return k - 1; }
  void validate() const;
};

/// Menu size of the deterministic mode (exit item plus every nonzero 0/1 vector).
std::size_t deterministic_menu_size(std::size_t m);

double softplus(double x);
double inverse_softplus(double y);
double sigmoid(double x);

/// lambda ramps from `start` to `final` over the first `ramp_fraction` of the
/// iterations, then stays at `final`.
struct LambdaSchedule {
  double start = 100.0;
  double final = 2000.0;
  RampKind ramp = RampKind::Geometric;
  double ramp_fraction = 0.8;

  double at(std::size_t iteration, std::size_t iterations) const;
};

struct TrainConfig {
  std::size_t k = 10;  // menu size including the exit item
  MechanismMode mode = MechanismMode::Free;
  std::size_t iterations = 5000;
  double learning_rate = 0.01;
  LambdaSchedule lambda;
  /// Once lambda exceeds this, the step shrinks as learning_rate * ref / lambda.
  /// The loss sharpens as lambda grows, and a fixed Adam step eventually
  /// overshoots and knocks a converged menu loose. 0 disables the scaling.
  double lr_lambda_ref = 500.0;
  /// Restart r initializes from seed + r.
  std::uint64_t seed = 42;
  std::size_t grid_n = 100;
  OptimizerKind optimizer = OptimizerKind::Adam;
  std::size_t restarts = 5;
  /// Allocation logits start uniform in (-init_logit_scale, init_logit_scale).
  double init_logit_scale = 3.0;
  int threads = 1;

  double lr_scale(double lam) const {
    return lr_lambda_ref > 0.0 && lam > lr_lambda_ref ? lr_lambda_ref / lam : 1.0;
  }

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::size_t iteration, const std::string& what)
      : std::runtime_error(what), iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

Menu materialize(const MechanismParams& params);

/// Expected payment sum_v Pr[v] p^T s(v) under the softmax buyer; the loss is its negation.
double soft_revenue(const MechanismParams& params, const ValueGrid& grid, ValuationKind kind,
                    double lambda, int threads = 1);

/// Gradient of the loss (negative soft revenue) with respect to the raw parameters.
struct LossGradient {
  double soft_revenue = 0.0;
  std::vector<double> alloc_raw;
  std::vector<double> price_raw;
};

LossGradient gradient(const MechanismParams& params, const ValueGrid& grid, ValuationKind kind,
                      double lambda, int threads = 1);

/// Random start: allocation logits uniform in (-logit_scale, logit_scale) and
/// prices uniform in (0.1, 0.9) * max_value.
MechanismParams initial_params(std::size_t m, std::size_t k, MechanismMode mode, double max_value,
                               std::uint64_t seed, double logit_scale = 1.0);

struct TraceRow {
  std::size_t iteration = 0;
  double lambda = 0.0;
  double soft_revenue = 0.0;
  double exact_revenue = 0.0;
};

struct TrainResult {
  Menu menu;
  MechanismParams params;
  std::vector<TraceRow> trace;
  double exact_revenue = 0.0;
  std::size_t best_restart = 0;
  std::vector<double> restart_revenues;
};

/// Called once per iteration with the parameters before the update.
using IterationHook = std::function<void(std::size_t restart, std::size_t iteration,
                                         const MechanismParams& params)>;

/// Exact revenue for the trace and restart selection: region geometry when
/// the distribution is uniform and the utility additive, grid revenue otherwise.
double evaluate_menu(const Menu& menu, const DistributionSpec& spec, const ValueGrid& grid,
                     ValuationKind kind, int threads = 1);

TrainResult train(const DistributionSpec& spec, ValuationKind kind, const TrainConfig& config,
                  const IterationHook& hook = {});
TrainResult train_on_grid(const DistributionSpec& spec, const ValueGrid& grid, ValuationKind kind,
                          const TrainConfig& config, const IterationHook& hook = {});

/// Drops items no grid point chooses, then merges near-duplicate items and
/// snaps allocations within 1e-3 of {0, 1}, keeping each merge or snap only
/// if every grid point still pays the same price.
Menu extract_clean_menu(const Menu& menu, const ValueGrid& grid, ValuationKind kind);

}  // namespace menunet
