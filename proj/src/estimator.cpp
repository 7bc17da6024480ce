#include "gridseg/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace gridseg {

ThresholdConfig ThresholdConfig::standard() {
  ThresholdConfig c;
  c.lambda_grid.reserve(25);
  for (int i = 1; i <= 25; ++i) c.lambda_grid.push_back(i * 0.5 / 26.0);
  return c;
}

void ThresholdConfig::validate() const {
  if (lambda_grid.empty()) throw std::invalid_argument("lambda grid is empty");
  for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
    if (!std::isfinite(lambda_grid[i]) || lambda_grid[i] < 0.0) {
      throw std::invalid_argument("lambda grid values must be finite and non-negative");
    }
    if (i > 0 && lambda_grid[i] < lambda_grid[i - 1]) throw std::invalid_argument("lambda grid must be ascending");
  }
  if (dense_max_p < 0) throw std::invalid_argument("dense_max_p must be non-negative");
}

Vector soft_threshold(const Vector& x, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("soft_threshold: lambda must be non-negative");
  Vector out(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double a = std::abs(x[k]) - lambda;
    out[k] = a > 0.0 ? std::copysign(a, x[k]) : 0.0;
  }
  return out;
}

QuadrantEstimate regularized_means(const Grid& grid, ChangePoint tau, const std::array<double, kQuadrants>& lambdas) {
  const auto means = quadrant_means(grid, tau);
  std::array<Vector, kQuadrants> theta;
  for (int j = 0; j < kQuadrants; ++j) {
    theta[j] = means[j] ? soft_threshold(*means[j], lambdas[j]) : Vector::Zero(grid.p());
  }
  return QuadrantEstimate::from_theta(std::move(theta));
}

namespace {

// Sum of squared deviations from the quadrant mean, per quadrant.
std::array<long double, kQuadrants> within_sums(const Grid& grid, const QuadrantPartition& part, const QuadrantMeans& means) {
  std::array<long double, kQuadrants> out{};
  const int p = grid.p();
  for (int j = 0; j < kQuadrants; ++j) {
    if (!part.rects[j]) continue;
    const Rect& r = *part.rects[j];
    const Vector& m = *means[j];
    long double acc = 0.0L;
    for (int w = r.w_lo; w <= r.w_hi; ++w) {
      for (int h = r.h_lo; h <= r.h_hi; ++h) {
        const auto x = grid.at(w, h);
        for (int k = 0; k < p; ++k) {
          const long double d = static_cast<long double>(x[k]) - m[k];
          acc += d * d;
        }
      }
    }
    out[j] = acc;
  }
  return out;
}

std::vector<double> effective_grid(const Grid& grid, const ThresholdConfig& config) {
  if (!config.auto_scale) return config.lambda_grid;
  std::vector<long double> acc(static_cast<std::size_t>(grid.p()), 0.0L);
  const auto& v = grid.values();
  for (std::size_t i = 0; i < v.size(); ++i) acc[i % acc.size()] += v[i];
  long double peak = 0.0L;
  for (long double a : acc) peak = std::max(peak, std::abs(a / static_cast<long double>(grid.cells())));
  if (peak == 0.0L) return config.lambda_grid;
  std::vector<double> out = config.lambda_grid;
  for (double& l : out) l = static_cast<double>(l * peak / 0.5L);
  return out;
}

}  // namespace

LambdaChoice bic_select_lambda(const Grid& grid, ChangePoint tau, const ThresholdConfig& config) {
  config.validate();
  const auto part = quadrant_partition(grid.dims(), tau);
  const auto means = quadrant_means(grid, tau);
  const auto within = within_sums(grid, part, means);
  const long double log_n = std::log(static_cast<long double>(grid.cells()));
  const int p = grid.p();

  // Residual sum at lambda decomposes as within_j + n_j * ||mean_j - theta_j||^2.
  const auto shrink_cost = [&](int j, double lambda, int& support) {
    support = 0;
    if (!part.rects[j]) return 0.0L;
    const Vector& m = *means[j];
    long double acc = 0.0L;
    for (int k = 0; k < p; ++k) {
      const long double a = std::abs(m[k]);
      if (a > lambda) {
        ++support;
        acc += static_cast<long double>(lambda) * lambda;
      } else {
        acc += a * a;
      }
    }
    return within[j] + static_cast<long double>(part.counts[j]) * acc;
  };

  const auto finish = [&](const std::array<double, kQuadrants>& lambdas) {
    LambdaChoice out;
    out.lambdas = lambdas;
    out.lambda = *std::max_element(lambdas.begin(), lambdas.end());
    out.est = regularized_means(grid, tau, lambdas);
    long double sse = 0.0L;
    int unused = 0;
    for (int j = 0; j < kQuadrants; ++j) sse += shrink_cost(j, lambdas[j], unused);
    out.bic = static_cast<double>(sse + static_cast<long double>(out.est.union_support().size()) * log_n);
    return out;
  };

  if (p <= config.dense_max_p) return finish({0.0, 0.0, 0.0, 0.0});

  const auto lambdas = effective_grid(grid, config);
  if (config.shared_lambda) {
    long double best = std::numeric_limits<long double>::infinity();
    double best_lambda = lambdas.front();
    std::vector<char> in_union(static_cast<std::size_t>(p));
    for (double lambda : lambdas) {
      long double sse = 0.0L;
      int unused = 0;
      for (int j = 0; j < kQuadrants; ++j) sse += shrink_cost(j, lambda, unused);
      std::fill(in_union.begin(), in_union.end(), 0);
      for (int j = 0; j < kQuadrants; ++j) {
        if (!means[j]) continue;
        for (int k = 0; k < p; ++k) {
          if (std::abs((*means[j])[k]) > lambda) in_union[static_cast<std::size_t>(k)] = 1;
        }
      }
      const auto s = std::count(in_union.begin(), in_union.end(), 1);
      const long double bic = sse + static_cast<long double>(s) * log_n;
      if (bic <= best) {
        best = bic;
        best_lambda = lambda;
      }
    }
    return finish({best_lambda, best_lambda, best_lambda, best_lambda});
  }

  std::array<double, kQuadrants> chosen{};
  for (int j = 0; j < kQuadrants; ++j) {
    long double best = std::numeric_limits<long double>::infinity();
    chosen[j] = lambdas.front();
    for (double lambda : lambdas) {
      int support = 0;
      const long double bic = shrink_cost(j, lambda, support) + support * log_n;
      if (bic <= best) {
        best = bic;
        chosen[j] = lambda;
      }
    }
  }
  return finish(chosen);
}

namespace {

// Cumulative loss differences along one axis with the other coordinate fixed.
// cum[t] = N * (L(t) - L(0)) for t = 0..T, where L(0) places every line on the
// high side of the split. Differences are exact zero when the two sides share a mean.
struct LossProfile {
  std::vector<long double> cum;
  long double n_cells = 0.0L;
};

LossProfile profile_axis(const Grid& grid, bool along_width, int other, const QuadrantEstimate& est) {
  const int p = grid.p();
  for (const auto& t : est.theta) {
    if (t.size() != p) throw std::invalid_argument("estimate dimension does not match grid");
  }
  const int t_axis = along_width ? grid.tw() : grid.th();
  const int t_other = along_width ? grid.th() : grid.tw();
  if (other < 1 || other > t_other) throw std::out_of_range("fixed coordinate outside grid");

  // Moving a line from the high side to the low side of the split:
  // along width, upper cells go Q1 -> Q2 and lower cells Q4 -> Q3;
  // along height, right cells go Q1 -> Q4 and left cells Q2 -> Q3.
  const Vector& t1 = est.theta[0];
  const Vector& t2 = est.theta[1];
  const Vector& t3 = est.theta[2];
  const Vector& t4 = est.theta[3];
  const Vector& lo_from = along_width ? t4 : t2;  // other coordinate <= fixed
  const Vector& lo_to = t3;
  const Vector& hi_from = t1;  // other coordinate > fixed
  const Vector& hi_to = along_width ? t2 : t4;

  const auto sq = [](const Vector& v) {
    long double s = 0.0L;
    for (Eigen::Index k = 0; k < v.size(); ++k) s += static_cast<long double>(v[k]) * v[k];
    return s;
  };
  const long double lo_const = sq(lo_to) - sq(lo_from);
  const long double hi_const = sq(hi_to) - sq(hi_from);
  std::vector<long double> lo_dir(static_cast<std::size_t>(p)), hi_dir(static_cast<std::size_t>(p));
  for (int k = 0; k < p; ++k) {
    lo_dir[k] = 2.0L * (static_cast<long double>(lo_from[k]) - lo_to[k]);
    hi_dir[k] = 2.0L * (static_cast<long double>(hi_from[k]) - hi_to[k]);
  }

  LossProfile prof;
  prof.cum.assign(static_cast<std::size_t>(t_axis) + 1, 0.0L);
  prof.n_cells = static_cast<long double>(grid.cells());
  std::vector<long double> s_lo(static_cast<std::size_t>(p)), s_hi(static_cast<std::size_t>(p));
  const long double n_lo = other;
  const long double n_hi = t_other - other;
  for (int a = 1; a <= t_axis; ++a) {
    std::fill(s_lo.begin(), s_lo.end(), 0.0L);
    std::fill(s_hi.begin(), s_hi.end(), 0.0L);
    for (int b = 1; b <= t_other; ++b) {
      const auto x = along_width ? grid.at(a, b) : grid.at(b, a);
      auto& s = b <= other ? s_lo : s_hi;
      for (int k = 0; k < p; ++k) s[k] += x[k];
    }
    long double diff = n_lo * lo_const + n_hi * hi_const;
    if (n_lo > 0) {
      for (int k = 0; k < p; ++k) diff += s_lo[k] * lo_dir[k];
    }
    if (n_hi > 0) {
      for (int k = 0; k < p; ++k) diff += s_hi[k] * hi_dir[k];
    }
    prof.cum[static_cast<std::size_t>(a)] = prof.cum[static_cast<std::size_t>(a) - 1] + diff;
  }
  return prof;
}

SearchRange resolve_range(std::optional<SearchRange> search, int t_axis) {
  const SearchRange r = search.value_or(SearchRange{1, t_axis - 1});
  if (r.lo > r.hi) throw std::invalid_argument("empty search range");
  if (r.lo < 1 || r.hi > t_axis) throw std::out_of_range("search range outside grid");
  return r;
}

int argmin_profile(const LossProfile& prof, SearchRange r) {
  int best = r.lo;
  for (int t = r.lo + 1; t <= r.hi; ++t) {
    if (prof.cum[static_cast<std::size_t>(t)] < prof.cum[static_cast<std::size_t>(best)]) best = t;
  }
  return best;
}

BoundarySelection select_boundary(const LossProfile& prof, int t_axis, double gamma) {
  BoundarySelection sel;
  if (t_axis < 2) {
    sel.interior = t_axis;
    sel.selected = t_axis;
    return sel;
  }
  sel.interior = argmin_profile(prof, SearchRange{1, t_axis - 1});
  sel.gap = static_cast<double>((prof.cum[static_cast<std::size_t>(t_axis)] - prof.cum[static_cast<std::size_t>(sel.interior)]) /
                                prof.n_cells);
  sel.selected = sel.gap < gamma ? t_axis : sel.interior;
  return sel;
}

}  // namespace

int argmin_width(const Grid& grid, int tau_h, const QuadrantEstimate& est, std::optional<SearchRange> search) {
  const auto r = resolve_range(search, grid.tw());
  return argmin_profile(profile_axis(grid, true, tau_h, est), r);
}

int argmin_height(const Grid& grid, int tau_w, const QuadrantEstimate& est, std::optional<SearchRange> search) {
  const auto r = resolve_range(search, grid.th());
  return argmin_profile(profile_axis(grid, false, tau_w, est), r);
}

BoundarySelection select_boundary_width(const Grid& grid, int tau_h, const QuadrantEstimate& est, double gamma) {
  return select_boundary(profile_axis(grid, true, tau_h, est), grid.tw(), gamma);
}

BoundarySelection select_boundary_height(const Grid& grid, int tau_w, const QuadrantEstimate& est, double gamma) {
  return select_boundary(profile_axis(grid, false, tau_w, est), grid.th(), gamma);
}

ChangePoint coarse_init(const Grid& grid, const ThresholdConfig& config) {
  if (grid.tw() < 4 || grid.th() < 4) {
    throw std::invalid_argument("coarse_init needs at least a 4x4 grid, got " + std::to_string(grid.tw()) + "x" +
                                std::to_string(grid.th()));
  }
  const auto candidates = [](int t) {
    return std::array<int, 3>{t / 4, t / 2, (3 * t) / 4};
  };
  // Candidates are ranked by their tuned BIC value, i.e. N times the squared
  // loss plus the support penalty. Raw loss favours whichever candidate BIC
  // happened to tune to a near-zero lambda.
  ChangePoint best{};
  double best_bic = std::numeric_limits<double>::infinity();
  for (int w : candidates(grid.tw())) {
    for (int h : candidates(grid.th())) {
      const ChangePoint c{w, h};
      const double bic = bic_select_lambda(grid, c, config).bic;
      if (bic < best_bic) {
        best_bic = bic;
        best = c;
      }
    }
  }
  return best;
}

double boundary_gamma(GridDims dims, int p_eff, double c_bic) {
  if (p_eff < 1) throw std::invalid_argument("p_eff must be at least 1");
  if (!(c_bic >= 0.0)) throw std::invalid_argument("c_bic must be non-negative");
  const double n = static_cast<double>(dims.cells());
  return (2.0 * p_eff + 1.0) * c_bic * std::log(n) / n;
}

namespace {

void require_estimable(const Grid& grid, ChangePoint init) {
  if (grid.tw() < 2 || grid.th() < 2) throw std::invalid_argument("grid must be at least 2x2");
  if (!in_bounds(grid.dims(), init)) throw std::out_of_range("initial change point outside grid");
}

}  // namespace

EstimationTrace algorithm1(const Grid& grid, ChangePoint init, const ThresholdConfig& config) {
  require_estimable(grid, init);
  EstimationTrace tr;
  tr.init = init;
  auto step1 = bic_select_lambda(grid, init, config);
  tr.lambda_used[0] = step1.lambda;
  tr.step1_means = std::move(step1.est);
  tr.step1_cp = {argmin_width(grid, init.h, tr.step1_means), argmin_height(grid, init.w, tr.step1_means)};

  auto step2 = bic_select_lambda(grid, tr.step1_cp, config);
  tr.lambda_used[1] = step2.lambda;
  tr.step2_means = std::move(step2.est);
  tr.final_cp = {argmin_width(grid, tr.step1_cp.h, tr.step2_means), argmin_height(grid, tr.step1_cp.w, tr.step2_means)};
  return tr;
}

EstimationTrace algorithm2(const Grid& grid, ChangePoint init, const ThresholdConfig& config, double c_bic) {
  require_estimable(grid, init);
  EstimationTrace tr;
  tr.init = init;
  auto step1 = bic_select_lambda(grid, init, config);
  tr.lambda_used[0] = step1.lambda;
  tr.step1_means = std::move(step1.est);

  const int p_eff = std::max<int>(1, static_cast<int>(tr.step1_means.union_support().size()));
  const double gamma = boundary_gamma(grid.dims(), p_eff, c_bic);
  tr.gamma_used = std::array<double, 2>{gamma, gamma};
  const auto sel_w = select_boundary_width(grid, init.h, tr.step1_means, gamma);
  const auto sel_h = select_boundary_height(grid, init.w, tr.step1_means, gamma);
  tr.boundary_gap = std::array<double, 2>{sel_w.gap, sel_h.gap};
  tr.step1_cp = {sel_w.interior, sel_h.interior};
  const ChangePoint star{sel_w.selected, sel_h.selected};
  tr.step1_boundary_cp = star;

  auto step2 = bic_select_lambda(grid, tr.step1_cp, config);
  tr.lambda_used[1] = step2.lambda;
  tr.step2_means = std::move(step2.est);
  tr.final_cp.w = star.w == grid.tw() ? grid.tw() : argmin_width(grid, star.h, tr.step2_means);
  tr.final_cp.h = star.h == grid.th() ? grid.th() : argmin_height(grid, star.w, tr.step2_means);
  return tr;
}

}  // namespace gridseg
