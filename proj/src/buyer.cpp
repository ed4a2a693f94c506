#include "menunet/buyer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <fmt/format.h>

#include "menunet/parallel.hpp"

namespace menunet {

void scaled_softmax(std::span<const double> u, double lambda, std::span<double> out) {
  double top = -std::numeric_limits<double>::infinity();
  for (double x : u) {
    if (!std::isfinite(x)) throw std::domain_error(fmt::format("non-finite utility {}", x));
    top = std::max(top, x);
  }
  double total = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    out[j] = std::exp(lambda * (u[j] - top));
    total += out[j];
  }
  for (std::size_t j = 0; j < u.size(); ++j) out[j] /= total;
}

void RationalBuyer::respond(const Menu& menu, std::span<const double> v, double lambda,
                            std::span<double> out) const {
  std::vector<double> u(menu.size());
  menu_utility(menu, v, kind_, u);
  scaled_softmax(u, lambda, out);
}

BuyerResponse soft_response(const Menu& menu, const ValueGrid& grid, const BuyerBehavior& buyer,
                            double lambda, int threads) {
  if (!(lambda > 0.0)) throw std::invalid_argument(fmt::format("temperature must be positive, got {}", lambda));
  BuyerResponse r;
  r.items = menu.size();
  r.probs.assign(grid.size() * r.items, 0.0);
  const std::size_t blocks = block_count(grid.size());
  for_each_block(blocks, resolve_threads(threads), [&](std::size_t b) {
    const std::size_t end = std::min(grid.size(), (b + 1) * kBlockSize);
    for (std::size_t i = b * kBlockSize; i < end; ++i) {
      buyer.respond(menu, grid.point(i), lambda, {r.probs.data() + i * r.items, r.items});
    }
  });
  return r;
}

BuyerResponse soft_response(const Menu& menu, const ValueGrid& grid, ValuationKind kind,
                            double lambda, int threads) {
  return soft_response(menu, grid, RationalBuyer(kind), lambda, threads);
}

double expected_payment(const Menu& menu, const ValueGrid& grid, const BuyerResponse& response) {
  if (response.items != menu.size() || response.points() != grid.size()) {
    throw std::invalid_argument("response shape does not match menu and grid");
  }
  std::vector<double> per_point(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto row = response.row(i);
    double pay = 0.0;
    for (std::size_t j = 0; j < menu.size(); ++j) pay += row[j] * menu[j].price;
    per_point[i] = grid.mass(i) * pay;
  }
  return tree_reduce(std::move(per_point), [](double a, double b) { return a + b; });
}

std::size_t best_item(const Menu& menu, std::span<const double> u) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < u.size(); ++j) {
    if (u[j] > u[best] || (u[j] == u[best] && menu[j].price > menu[best].price)) best = j;
  }
  return best;
}

std::size_t hard_response(const Menu& menu, std::span<const double> v, ValuationKind kind) {
  std::vector<double> u(menu.size());
  menu_utility(menu, v, kind, u);
  return best_item(menu, u);
}

}  // namespace menunet
