#include "menunet/evaluator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

#include "menunet/buyer.hpp"
#include "menunet/parallel.hpp"

namespace menunet {

namespace {

void check_geometric(const Menu& menu, const DistributionSpec& spec, ValuationKind kind) {
  if (menu.dim() != 2) throw std::invalid_argument("region geometry needs a two-item menu");
  if (!spec.is_uniform()) throw std::invalid_argument("region geometry needs a uniform rectangle or triangle");
  if (kind == ValuationKind::Combinatorial) {
    throw std::invalid_argument("combinatorial best-response regions are not polygons; use grid_revenue");
  }
}

// True if item i beats item j when their utilities are equal.
bool wins_tie(const Menu& menu, std::size_t i, std::size_t j) {
  if (menu[i].price != menu[j].price) return menu[i].price > menu[j].price;
  return i < j;
}

constexpr double kFlatTol = 1e-14;

}  // namespace

std::vector<ResponseRegion> regions(const Menu& menu, const DistributionSpec& spec, ValuationKind kind) {
  check_geometric(menu, spec, kind);
  const Polygon support = spec.support();
  const double density = spec.uniform_density();
  std::vector<ResponseRegion> out(menu.size());
  for (std::size_t i = 0; i < menu.size(); ++i) {
    out[i].item = i;
    Polygon poly = support;
    const auto& xi = menu[i].allocation;
    for (std::size_t j = 0; j < menu.size() && !poly.empty(); ++j) {
      if (j == i) continue;
      const auto& xj = menu[j].allocation;
      // u_i - u_j = a . v + offset
      const double a = xi[0] - xj[0];
      const double b = xi[1] - xj[1];
      const double offset = menu[j].price - menu[i].price;
      if (std::abs(a) <= kFlatTol && std::abs(b) <= kFlatTol) {
        if (offset < 0.0 || (offset == 0.0 && !wins_tie(menu, i, j))) poly.clear();
        continue;
      }
      poly = clip_halfplane(poly, a, b, offset);
    }
    out[i].polygon = std::move(poly);
    out[i].mass = density * area(out[i].polygon);
  }
  return out;
}

double exact_revenue(const Menu& menu, const DistributionSpec& spec, ValuationKind kind) {
  double rev = 0.0;
  for (const auto& r : regions(menu, spec, kind)) rev += menu[r.item].price * r.mass;
  return rev;
}

std::vector<std::size_t> grid_choices(const Menu& menu, const ValueGrid& grid, ValuationKind kind,
                                      int threads) {
  if (grid.dim() != menu.dim()) throw std::invalid_argument("grid and menu dimensions differ");
  std::vector<std::size_t> choice(grid.size());
  for_each_block(block_count(grid.size()), resolve_threads(threads), [&](std::size_t b) {
    std::vector<double> u(menu.size());
    const std::size_t end = std::min(grid.size(), (b + 1) * kBlockSize);
    for (std::size_t i = b * kBlockSize; i < end; ++i) {
      menu_utility(menu, grid.point(i), kind, u);
      choice[i] = best_item(menu, u);
    }
  });
  return choice;
}

double grid_revenue(const Menu& menu, const ValueGrid& grid, ValuationKind kind, int threads) {
  const auto choice = grid_choices(menu, grid, kind, threads);
  std::vector<double> partial(block_count(grid.size()), 0.0);
  for (std::size_t b = 0; b < partial.size(); ++b) {
    const std::size_t end = std::min(grid.size(), (b + 1) * kBlockSize);
    double s = 0.0;
    for (std::size_t i = b * kBlockSize; i < end; ++i) s += grid.mass(i) * menu[choice[i]].price;
    partial[b] = s;
  }
  return tree_reduce(std::move(partial), [](double x, double y) { return x + y; });
}

nlohmann::json regions_to_json(const Menu& menu, const std::vector<ResponseRegion>& regs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : regs) {
    nlohmann::json verts = nlohmann::json::array();
    for (const auto& p : r.polygon) verts.push_back({p.x, p.y});
    arr.push_back({{"item", r.item},
                   {"price", menu[r.item].price},
                   {"allocation", menu[r.item].allocation},
                   {"mass", r.mass},
                   {"polygon", verts}});
  }
  return arr;
}

namespace {

struct Fill {
  std::size_t item;
  Polygon polygon;
};

// Shared renderer: filled shapes colored by item, the support outline and a
// legend line per (item, mass) entry.
std::string render_svg(const Menu& menu, const Polygon& support, const std::vector<Fill>& fills,
                       const std::vector<std::pair<std::size_t, double>>& legend, bool outline) {
  static constexpr std::array<const char*, 12> kPalette = {
      "#e6e6e6", "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2",
      "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#8cd17d"};
  double width = 0.0;
  double height = 0.0;
  for (const auto& p : support) {
    width = std::max(width, p.x);
    height = std::max(height, p.y);
  }
  const double scale = 400.0 / std::max(width, height);
  const double margin = 30.0;
  const double plot_w = width * scale;
  const double plot_h = height * scale;
  const double legend_h = 20.0 * static_cast<double>(legend.size()) + 10.0;
  const double total_w = plot_w + 2 * margin;
  const double total_h = plot_h + 2 * margin + legend_h;

  const auto sx = [&](double x) { return margin + x * scale; };
  const auto sy = [&](double y) { return margin + plot_h - y * scale; };
  const auto path = [&](const Polygon& poly) {
    std::string d;
    for (std::size_t k = 0; k < poly.size(); ++k) {
      d += fmt::format("{}{:.3f},{:.3f} ", k == 0 ? "M" : "L", sx(poly[k].x), sy(poly[k].y));
    }
    return d + "Z";
  };

  std::string svg = fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{:.0f}\" height=\"{:.0f}\" "
      "viewBox=\"0 0 {:.0f} {:.0f}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      total_w, total_h, total_w, total_h);
  for (const auto& f : fills) {
    if (outline) {
      svg += fmt::format("<path d=\"{}\" fill=\"{}\" stroke=\"#333333\" stroke-width=\"0.5\"/>\n",
                         path(f.polygon), kPalette[f.item % kPalette.size()]);
    } else {
      svg += fmt::format("<path d=\"{}\" fill=\"{}\"/>\n", path(f.polygon),
                         kPalette[f.item % kPalette.size()]);
    }
  }
  svg += fmt::format("<path d=\"{}\" fill=\"none\" stroke=\"black\" stroke-width=\"1.5\"/>\n", path(support));
  svg += fmt::format(
      "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\">v1</text>\n"
      "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\">v2</text>\n",
      sx(width) - 12, sy(0) + 16, sx(0) - 22, sy(height) + 4);
  double y = plot_h + 2 * margin;
  for (const auto& [item_index, mass] : legend) {
    const auto& item = menu[item_index];
    std::string alloc;
    for (std::size_t d = 0; d < item.allocation.size(); ++d) {
      alloc += fmt::format("{}{:.4f}", d == 0 ? "" : ", ", item.allocation[d]);
    }
    svg += fmt::format(
        "<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"12\" height=\"12\" fill=\"{}\" stroke=\"#333333\"/>\n"
        "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\">"
        "item {}: x=({}) p={:.4f} mass={:.4f}</text>\n",
        margin, y, kPalette[item_index % kPalette.size()], margin + 18, y + 10, item_index, alloc,
        item.price, mass);
    y += 20.0;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace

std::string region_svg(const Menu& menu, const DistributionSpec& spec, ValuationKind kind) {
  const auto regs = regions(menu, spec, kind);
  std::vector<Fill> fills;
  std::vector<std::pair<std::size_t, double>> legend;
  for (const auto& r : regs) {
    if (r.polygon.empty()) continue;
    fills.push_back({r.item, r.polygon});
    legend.emplace_back(r.item, r.mass);
  }
  return render_svg(menu, spec.support(), fills, legend, true);
}

std::string choice_svg(const Menu& menu, const DistributionSpec& spec, const ValueGrid& grid,
                       ValuationKind kind) {
  if (grid.dim() != 2) throw std::invalid_argument("choice_svg: two goods only");
  const auto choice = grid_choices(menu, grid, kind, 1);
  const Polygon support = spec.support();
  double width = 0.0;
  double height = 0.0;
  for (const auto& p : support) {
    width = std::max(width, p.x);
    height = std::max(height, p.y);
  }
  const double half = 0.5 / static_cast<double>(std::max<std::size_t>(grid.resolution(), 1));
  std::vector<Fill> fills;
  std::vector<double> mass(menu.size(), 0.0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto v = grid.point(i);
    // The cell around the point, clipped to the bounding box.
    Polygon cell{{v[0] - half, v[1] - half}, {v[0] + half, v[1] - half},
                 {v[0] + half, v[1] + half}, {v[0] - half, v[1] + half}};
    cell = clip_halfplane(cell, 1.0, 0.0, 0.0);
    cell = clip_halfplane(cell, 0.0, 1.0, 0.0);
    cell = clip_halfplane(cell, -1.0, 0.0, width);
    cell = clip_halfplane(cell, 0.0, -1.0, height);
    if (!cell.empty()) fills.push_back({choice[i], std::move(cell)});
    mass[choice[i]] += grid.mass(i);
  }
  std::vector<std::pair<std::size_t, double>> legend;
  for (std::size_t j = 0; j < menu.size(); ++j) {
    if (mass[j] > 0.0) legend.emplace_back(j, mass[j]);
  }
  return render_svg(menu, support, fills, legend, false);
}

void region_plot(const Menu& menu, const DistributionSpec& spec, const std::string& path,
                 ValuationKind kind) {
  const std::string svg = region_svg(menu, spec, kind);
  std::ofstream out(path);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path));
  out << svg;
  if (!out) throw std::runtime_error(fmt::format("failed writing '{}'", path));
}

}  // namespace menunet
