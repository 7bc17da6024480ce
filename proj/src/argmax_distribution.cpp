#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include <boost/math/tools/roots.hpp>
#include <boost/random/normal_distribution.hpp>

#include "gridseg/inference.hpp"

namespace gridseg {

namespace {

// Standard normal lower tail, log scale for large arguments.
double log_phi_lower(double z) { return std::log(0.5 * std::erfc(-z / std::sqrt(2.0))); }

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
}

constexpr long long kMaxHorizon = 5'000'000;

}  // namespace

double yao_cdf(double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("yao_cdf is defined for x >= 0");
  constexpr double kPi = 3.14159265358979323846;
  const double r = std::sqrt(x);
  const double t1 = std::sqrt(x / (2.0 * kPi)) * std::exp(-x / 8.0);
  const double t2 = 0.5 * (x + 5.0) * std::exp(log_phi_lower(-r / 2.0));
  const double t3 = 1.5 * std::exp(x + log_phi_lower(-1.5 * r));
  return 1.0 + t1 - t2 + t3;
}

double yao_quantile(double alpha) {
  require_alpha(alpha);
  const double target = 1.0 - alpha / 2.0;
  const auto f = [target](double x) { return yao_cdf(x) - target; };
  double hi = 1.0;
  while (f(hi) < 0.0) {
    hi *= 2.0;
    if (hi > 600.0) throw std::invalid_argument("alpha too small for the argmax distribution");
  }
  std::uintmax_t iters = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(f, 0.0, hi, f(0.0), f(hi),
                                                        boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (a + b);
}

long long rw_horizon(double xi_inf, double sigma2_inf) {
  if (!(xi_inf > 0.0) || !(sigma2_inf > 0.0) || !std::isfinite(xi_inf) || !std::isfinite(sigma2_inf)) {
    throw std::invalid_argument("random walk parameters must be positive and finite");
  }
  const double h = std::ceil(400.0 * sigma2_inf / (xi_inf * xi_inf));
  if (h > static_cast<double>(kMaxHorizon)) {
    throw std::invalid_argument("random walk horizon " + std::to_string(h) + " is too long; jump is too small relative to noise");
  }
  return static_cast<long long>(h) + 50;
}

std::vector<long long> rw_argmax_draws(double xi_inf, double sigma2_inf, int n_draws, std::uint64_t seed) {
  if (n_draws < 1) throw std::invalid_argument("n_draws must be positive");
  const long long horizon = rw_horizon(xi_inf, sigma2_inf);
  const double xi2 = xi_inf * xi_inf;
  boost::random::normal_distribution<double> step(-xi2, 2.0 * xi_inf * std::sqrt(sigma2_inf));
  std::vector<long long> out(static_cast<std::size_t>(n_draws));
  for (int i = 0; i < n_draws; ++i) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(i)};
    std::mt19937_64 eng(seq);
    step.reset();
    // Branches are walked in lockstep so that at equal |zeta| the negative side is seen first.
    double neg = 0.0, pos = 0.0, best = 0.0;
    long long arg = 0;
    for (long long k = 1; k <= horizon; ++k) {
      neg += step(eng);
      pos += step(eng);
      if (neg > best) {
        best = neg;
        arg = -k;
      }
      if (pos > best) {
        best = pos;
        arg = k;
      }
    }
    out[static_cast<std::size_t>(i)] = arg;
  }
  return out;
}

long long rw_argmax_quantile(double xi_inf, double sigma2_inf, double alpha, int n_draws, std::uint64_t seed) {
  require_alpha(alpha);
  auto draws = rw_argmax_draws(xi_inf, sigma2_inf, n_draws, seed);
  for (auto& d : draws) d = d < 0 ? -d : d;
  std::sort(draws.begin(), draws.end());
  const double pos = std::ceil((1.0 - alpha) * n_draws - 1e-9);
  const auto idx = static_cast<std::size_t>(std::clamp(pos, 1.0, static_cast<double>(n_draws))) - 1;
  return draws[idx];
}

}  // namespace gridseg
