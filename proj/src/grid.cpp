#include "gridseg/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gridseg {

bool in_bounds(GridDims dims, ChangePoint tau) {
  return tau.w >= 1 && tau.w <= dims.tw && tau.h >= 1 && tau.h <= dims.th;
}

bool is_interior(GridDims dims, ChangePoint tau) {
  return tau.w >= 1 && tau.w < dims.tw && tau.h >= 1 && tau.h < dims.th;
}

bool is_double_boundary(GridDims dims, ChangePoint tau) { return tau.w == dims.tw && tau.h == dims.th; }

namespace {

void require_dims(int tw, int th, int p) {
  if (tw <= 0 || th <= 0 || p <= 0) {
    throw std::invalid_argument("grid dimensions must be positive, got " + std::to_string(tw) + "x" +
                                std::to_string(th) + "x" + std::to_string(p));
  }
}

void require_tau(GridDims dims, ChangePoint tau) {
  if (!in_bounds(dims, tau)) {
    throw std::out_of_range("change point (" + std::to_string(tau.w) + "," + std::to_string(tau.h) +
                            ") outside grid " + std::to_string(dims.tw) + "x" + std::to_string(dims.th));
  }
}

}  // namespace

Grid::Grid(int tw, int th, int p) : tw_(tw), th_(th), p_(p) {
  require_dims(tw, th, p);
  values_.assign(cells() * static_cast<std::size_t>(p), 0.0);
}

Grid::Grid(int tw, int th, int p, std::vector<double> values) : tw_(tw), th_(th), p_(p), values_(std::move(values)) {
  require_dims(tw, th, p);
  if (values_.size() != cells() * static_cast<std::size_t>(p)) {
    throw std::invalid_argument("grid value count " + std::to_string(values_.size()) + " does not match " +
                                std::to_string(tw) + "x" + std::to_string(th) + "x" + std::to_string(p));
  }
  if (!std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); })) {
    throw std::invalid_argument("grid contains non-finite values");
  }
}

std::size_t Grid::offset(int w, int h) const {
  if (w < 1 || w > tw_ || h < 1 || h > th_) {
    throw std::out_of_range("cell (" + std::to_string(w) + "," + std::to_string(h) + ") outside grid " +
                            std::to_string(tw_) + "x" + std::to_string(th_));
  }
  return (static_cast<std::size_t>(w - 1) * static_cast<std::size_t>(th_) + static_cast<std::size_t>(h - 1)) *
         static_cast<std::size_t>(p_);
}

std::span<const double> Grid::at(int w, int h) const { return {values_.data() + offset(w, h), static_cast<std::size_t>(p_)}; }

std::span<double> Grid::at(int w, int h) { return {values_.data() + offset(w, h), static_cast<std::size_t>(p_)}; }

Eigen::Map<const Vector> Grid::vec(int w, int h) const { return {values_.data() + offset(w, h), p_}; }

Grid Grid::subgrid(const Rect& r) const {
  if (r.cells() == 0 || r.w_lo < 1 || r.h_lo < 1 || r.w_hi > tw_ || r.h_hi > th_) {
    throw std::out_of_range("subgrid rectangle outside grid");
  }
  std::vector<double> out;
  out.reserve(r.cells() * static_cast<std::size_t>(p_));
  for (int w = r.w_lo; w <= r.w_hi; ++w) {
    auto first = values_.begin() + static_cast<std::ptrdiff_t>(offset(w, r.h_lo));
    out.insert(out.end(), first, first + static_cast<std::ptrdiff_t>(r.height()) * p_);
  }
  return Grid(r.width(), r.height(), p_, std::move(out));
}

std::array<std::optional<Rect>, kQuadrants> split_rect(const Rect& domain, ChangePoint local_tau) {
  if (!in_bounds(domain.dims(), local_tau)) {
    throw std::out_of_range("change point (" + std::to_string(local_tau.w) + "," + std::to_string(local_tau.h) +
                            ") outside domain");
  }
  const int wc = domain.w_lo + local_tau.w - 1;
  const int hc = domain.h_lo + local_tau.h - 1;
  const auto make = [](int w_lo, int w_hi, int h_lo, int h_hi) -> std::optional<Rect> {
    if (w_lo > w_hi || h_lo > h_hi) return std::nullopt;
    return Rect{w_lo, w_hi, h_lo, h_hi};
  };
  return {
      make(wc + 1, domain.w_hi, hc + 1, domain.h_hi),
      make(domain.w_lo, wc, hc + 1, domain.h_hi),
      make(domain.w_lo, wc, domain.h_lo, hc),
      make(wc + 1, domain.w_hi, domain.h_lo, hc),
  };
}

QuadrantPartition quadrant_partition(GridDims dims, ChangePoint tau) {
  require_tau(dims, tau);
  QuadrantPartition part;
  part.rects = split_rect(Rect{1, dims.tw, 1, dims.th}, tau);
  for (int j = 0; j < kQuadrants; ++j) part.counts[j] = part.rects[j] ? part.rects[j]->cells() : 0;
  return part;
}

int QuadrantPartition::quadrant_of(int w, int h) const {
  for (int j = 0; j < kQuadrants; ++j) {
    if (rects[j] && rects[j]->contains(w, h)) return j;
  }
  return -1;
}

std::vector<std::pair<int, int>> QuadrantPartition::cells(int j) const {
  std::vector<std::pair<int, int>> out;
  if (!rects.at(static_cast<std::size_t>(j))) return out;
  const Rect& r = *rects[static_cast<std::size_t>(j)];
  out.reserve(r.cells());
  for (int w = r.w_lo; w <= r.w_hi; ++w)
    for (int h = r.h_lo; h <= r.h_hi; ++h) out.emplace_back(w, h);
  return out;
}

QuadrantMeans quadrant_means(const Grid& grid, ChangePoint tau) {
  const auto part = quadrant_partition(grid.dims(), tau);
  const int p = grid.p();
  QuadrantMeans means;
  std::vector<long double> acc(static_cast<std::size_t>(p));
  for (int j = 0; j < kQuadrants; ++j) {
    if (!part.rects[j]) continue;
    const Rect& r = *part.rects[j];
    std::fill(acc.begin(), acc.end(), 0.0L);
    for (int w = r.w_lo; w <= r.w_hi; ++w) {
      for (int h = r.h_lo; h <= r.h_hi; ++h) {
        const auto x = grid.at(w, h);
        for (int k = 0; k < p; ++k) acc[k] += x[k];
      }
    }
    Vector m(p);
    const long double n = static_cast<long double>(r.cells());
    for (int k = 0; k < p; ++k) m[k] = static_cast<double>(acc[k] / n);
    means[j] = std::move(m);
  }
  return means;
}

QuadrantEstimate QuadrantEstimate::from_theta(std::array<Vector, kQuadrants> theta) {
  QuadrantEstimate est;
  est.theta = std::move(theta);
  for (int j = 0; j < kQuadrants; ++j) {
    for (Eigen::Index k = 0; k < est.theta[j].size(); ++k) {
      if (est.theta[j][k] != 0.0) est.supports[j].push_back(static_cast<int>(k));
    }
  }
  return est;
}

std::vector<int> QuadrantEstimate::union_support() const {
  std::vector<int> all;
  for (const auto& s : supports) all.insert(all.end(), s.begin(), s.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return all;
}

std::size_t QuadrantEstimate::sparsity() const {
  std::size_t s = 0;
  for (const auto& sj : supports) s = std::max(s, sj.size());
  return s;
}

double squared_loss(const Grid& grid, ChangePoint tau, const QuadrantEstimate& est) {
  const auto part = quadrant_partition(grid.dims(), tau);
  const int p = grid.p();
  long double total = 0.0L;
  for (int j = 0; j < kQuadrants; ++j) {
    if (!part.rects[j]) continue;
    const Vector& th = est.theta[j];
    if (th.size() != p) throw std::invalid_argument("estimate dimension does not match grid");
    const Rect& r = *part.rects[j];
    for (int w = r.w_lo; w <= r.w_hi; ++w) {
      for (int h = r.h_lo; h <= r.h_hi; ++h) {
        const auto x = grid.at(w, h);
        for (int k = 0; k < p; ++k) {
          const long double d = static_cast<long double>(x[k]) - th[k];
          total += d * d;
        }
      }
    }
  }
  return static_cast<double>(total / static_cast<long double>(grid.cells()));
}

Grid center_grid(const Grid& grid) {
  const int p = grid.p();
  std::vector<long double> acc(static_cast<std::size_t>(p), 0.0L);
  const auto& v = grid.values();
  for (std::size_t i = 0; i < v.size(); ++i) acc[i % static_cast<std::size_t>(p)] += v[i];
  std::vector<double> mean(static_cast<std::size_t>(p));
  for (int k = 0; k < p; ++k) mean[k] = static_cast<double>(acc[k] / static_cast<long double>(grid.cells()));
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - mean[i % static_cast<std::size_t>(p)];
  return Grid(grid.tw(), grid.th(), p, std::move(out));
}

}  // namespace gridseg
