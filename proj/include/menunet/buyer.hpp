#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "menunet/core.hpp"

namespace menunet {

/// Per-point choice probabilities over menu items, point-major.
struct BuyerResponse {
  std::size_t items = 0;
  std::vector<double> probs;

  std::size_t points() const { return items == 0 ? 0 : probs.size() / items; }
  std::span<const double> row(std::size_t i) const { return {probs.data() + i * items, items}; }
};

/// Maps (menu, value, temperature) to a distribution over menu items. The
/// rational buyer below is the only shipped model; a learned behavior model
/// would implement the same interface.
class BuyerBehavior {
 public:
  virtual ~BuyerBehavior() = default;
  virtual void respond(const Menu& menu, std::span<const double> v, double lambda,
                       std::span<double> out) const = 0;
};

class RationalBuyer final : public BuyerBehavior {
 public:
  explicit RationalBuyer(ValuationKind kind) : kind_(kind) {}
  ValuationKind kind() const { return kind_; }
  void respond(const Menu& menu, std::span<const double> v, double lambda,
               std::span<double> out) const override;

 private:
  ValuationKind kind_;
};

/// out = softmax(lambda * u), computed after subtracting max(u).
void scaled_softmax(std::span<const double> u, double lambda, std::span<double> out);

BuyerResponse soft_response(const Menu& menu, const ValueGrid& grid, ValuationKind kind,
                            double lambda, int threads = 1);
BuyerResponse soft_response(const Menu& menu, const ValueGrid& grid, const BuyerBehavior& buyer,
                            double lambda, int threads = 1);

/// Expected payment under a soft response.
double expected_payment(const Menu& menu, const ValueGrid& grid, const BuyerResponse& response);

/// Index of a utility-maximizing item. Exact ties go to the highest price,
/// then the lowest index.
std::size_t hard_response(const Menu& menu, std::span<const double> v, ValuationKind kind);
std::size_t best_item(const Menu& menu, std::span<const double> utilities);

}  // namespace menunet
