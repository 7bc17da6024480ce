#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "gridseg/grid.hpp"

namespace gridseg {

Grid bin_scatter_to_grid(std::span<const ScatterPoint> points, GridDims dims, int k_neighbors) {
  if (points.empty()) throw std::invalid_argument("no scatter points");
  if (k_neighbors < 1) throw std::invalid_argument("k_neighbors must be positive");
  if (points.size() < static_cast<std::size_t>(k_neighbors)) {
    throw std::invalid_argument("need at least " + std::to_string(k_neighbors) + " points, got " +
                                std::to_string(points.size()));
  }
  const std::size_t p = points.front().obs.size();
  if (p == 0) throw std::invalid_argument("scatter points carry no observations");

  double x_min = points.front().cx, x_max = x_min;
  double y_min = points.front().cy, y_max = y_min;
  for (const auto& pt : points) {
    if (pt.obs.size() != p) throw std::invalid_argument("scatter points have inconsistent dimension");
    x_min = std::min(x_min, pt.cx);
    x_max = std::max(x_max, pt.cx);
    y_min = std::min(y_min, pt.cy);
    y_max = std::max(y_max, pt.cy);
  }
  if (!(x_max > x_min) || !(y_max > y_min)) throw std::invalid_argument("degenerate bounding box");

  std::vector<std::pair<double, double>> unit(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    unit[i] = {(points[i].cx - x_min) / (x_max - x_min), (points[i].cy - y_min) / (y_max - y_min)};
  }

  Grid out(dims.tw, dims.th, static_cast<int>(p));
  std::vector<std::pair<double, std::size_t>> dist(points.size());
  const auto k = static_cast<std::ptrdiff_t>(k_neighbors);
  for (int w = 1; w <= dims.tw; ++w) {
    const double u = (w - 0.5) / dims.tw;
    for (int h = 1; h <= dims.th; ++h) {
      const double v = (h - 0.5) / dims.th;
      for (std::size_t i = 0; i < unit.size(); ++i) {
        const double du = unit[i].first - u;
        const double dv = unit[i].second - v;
        dist[i] = {du * du + dv * dv, i};
      }
      std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
      auto cell = out.at(w, h);
      for (std::ptrdiff_t n = 0; n < k; ++n) {
        const auto& obs = points[dist[static_cast<std::size_t>(n)].second].obs;
        for (std::size_t c = 0; c < p; ++c) cell[c] += obs[c];
      }
      for (std::size_t c = 0; c < p; ++c) cell[c] /= static_cast<double>(k_neighbors);
    }
  }
  return out;
}

}  // namespace gridseg
