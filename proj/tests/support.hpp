#pragma once

// Fixtures and brute-force oracles shared by the unit and acceptance tests.
// Oracles recompute everything from raw cell values with plain loops and do
// not call the library routines they are checking.

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "gridseg/grid.hpp"

namespace testsupport {

using gridseg::ChangePoint;
using gridseg::Grid;
using gridseg::Vector;

inline Grid random_grid(int tw, int th, int p, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> z(0.0, scale);
  std::vector<double> v(static_cast<std::size_t>(tw) * th * p);
  for (auto& x : v) x = z(rng);
  return Grid(tw, th, p, std::move(v));
}

inline Vector random_vector(int p, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> z(0.0, scale);
  Vector v(p);
  for (int k = 0; k < p; ++k) v[k] = z(rng);
  return v;
}

// Quadrant index (0..3) by direct predicate, independent of QuadrantPartition.
inline int quadrant_by_predicate(int w, int h, ChangePoint tau) {
  const bool right = w > tau.w;
  const bool up = h > tau.h;
  if (right && up) return 0;
  if (!right && up) return 1;
  if (!right && !up) return 2;
  return 3;
}

// Piecewise-constant grid with quadrant means theta under tau.
inline Grid piecewise_grid(int tw, int th, ChangePoint tau, const std::array<Vector, 4>& theta) {
  const int p = static_cast<int>(theta[0].size());
  Grid g(tw, th, p);
  for (int w = 1; w <= tw; ++w) {
    for (int h = 1; h <= th; ++h) {
      const Vector& m = theta[static_cast<std::size_t>(quadrant_by_predicate(w, h, tau))];
      auto cell = g.at(w, h);
      for (int k = 0; k < p; ++k) cell[k] = m[k];
    }
  }
  return g;
}

inline Grid add_noise(const Grid& g, double sd, std::mt19937_64& rng) {
  std::normal_distribution<double> z(0.0, sd);
  std::vector<double> v = g.values();
  for (auto& x : v) x += z(rng);
  return Grid(g.tw(), g.th(), g.p(), std::move(v));
}

// (1/N) sum ||x - theta_j||^2 by a double loop over cells.
inline double brute_loss(const Grid& g, ChangePoint tau, const std::array<Vector, 4>& theta) {
  double total = 0.0;
  for (int w = 1; w <= g.tw(); ++w) {
    for (int h = 1; h <= g.th(); ++h) {
      const Vector& m = theta[static_cast<std::size_t>(quadrant_by_predicate(w, h, tau))];
      const auto x = g.at(w, h);
      for (int k = 0; k < g.p(); ++k) total += (x[k] - m[k]) * (x[k] - m[k]);
    }
  }
  return total / static_cast<double>(g.cells());
}

// Per-quadrant means by predicate scan; count 0 means absent.
struct BruteMeans {
  std::array<Vector, 4> mean;
  std::array<int, 4> count{};
};

inline BruteMeans brute_means(const Grid& g, ChangePoint tau) {
  BruteMeans out;
  for (auto& m : out.mean) m = Vector::Zero(g.p());
  for (int w = 1; w <= g.tw(); ++w) {
    for (int h = 1; h <= g.th(); ++h) {
      const int j = quadrant_by_predicate(w, h, tau);
      const auto x = g.at(w, h);
      for (int k = 0; k < g.p(); ++k) out.mean[j][k] += x[k];
      ++out.count[j];
    }
  }
  for (int j = 0; j < 4; ++j) {
    if (out.count[j] > 0) out.mean[j] /= out.count[j];
  }
  return out;
}

// Exhaustive scan of the loss over tau_w in [lo, hi]; smallest index wins ties.
inline int brute_argmin_width(const Grid& g, int tau_h, const std::array<Vector, 4>& theta, int lo, int hi) {
  int best = lo;
  double best_loss = brute_loss(g, {lo, tau_h}, theta);
  for (int t = lo + 1; t <= hi; ++t) {
    const double l = brute_loss(g, {t, tau_h}, theta);
    if (l < best_loss) {
      best_loss = l;
      best = t;
    }
  }
  return best;
}

inline int brute_argmin_height(const Grid& g, int tau_w, const std::array<Vector, 4>& theta, int lo, int hi) {
  int best = lo;
  double best_loss = brute_loss(g, {tau_w, lo}, theta);
  for (int t = lo + 1; t <= hi; ++t) {
    const double l = brute_loss(g, {tau_w, t}, theta);
    if (l < best_loss) {
      best_loss = l;
      best = t;
    }
  }
  return best;
}

// Mean vectors for noiseless recovery checks. Entries are drawn from
// {0, +-0.5, +-0.75, +-1}, so every nonzero magnitude exceeds any lambda in
// (0, 0.5) and every difference between entries is at least 0.25. Adjacent
// quadrants are forced to differ.
inline std::array<Vector, 4> separated_means(int p, std::mt19937_64& rng) {
  static constexpr double kLevels[] = {0.0, 0.5, -0.5, 0.75, -0.75, 1.0, -1.0};
  std::uniform_int_distribution<int> pick(0, 6);
  std::array<Vector, 4> theta;
  const auto differ = [](const Vector& a, const Vector& b) { return (a - b).cwiseAbs().maxCoeff() >= 0.25; };
  do {
    for (auto& t : theta) {
      t.resize(p);
      for (int k = 0; k < p; ++k) t[k] = kLevels[pick(rng)];
    }
  } while (!differ(theta[0], theta[1]) || !differ(theta[1], theta[2]) || !differ(theta[2], theta[3]) ||
           !differ(theta[3], theta[0]));
  return theta;
}

}  // namespace testsupport
