#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridseg/estimator.hpp"
#include "gridseg/grid.hpp"

namespace gridseg {

/// Raised when confidence intervals are undefined: a boundary change point or a zero directional jump.
class InferenceRefused : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Quadrant means at `tau` restricted to the given supports (0-based component indices).
QuadrantEstimate refit_means(const Grid& grid, ChangePoint tau, const std::array<std::vector<int>, kQuadrants>& supports);

struct JumpProfile {
  /// eta_1 = theta_2 - theta_1, eta_2 = theta_3 - theta_2, eta_3 = theta_3 - theta_4, eta_4 = theta_1 - theta_4.
  std::array<Vector, kQuadrants> eta;
  std::array<double, kQuadrants> xi{};
  double omega_w = 0.0;
  double omega_h = 0.0;
  /// omega_h xi_1^2 + (1 - omega_h) xi_3^2
  double xi_w2 = 0.0;
  /// omega_w xi_4^2 + (1 - omega_w) xi_2^2
  double xi_h2 = 0.0;
  /// max_j ||eta_j||_inf
  double psi = 0.0;
};

/// Throws InferenceRefused at a boundary change point.
JumpProfile jump_profile(const QuadrantEstimate& est, ChangePoint tau, GridDims dims);

/// (1/N) sum_j sum_{Q_j} (x - theta_j)(x - theta_j)^T.
Matrix sample_covariance(const Grid& grid, ChangePoint tau, const QuadrantEstimate& est);

struct AsymptoticVariances {
  double sigma2_w = 0.0;
  double sigma2_h = 0.0;
  Matrix cov_hat;
};

/// Throws InferenceRefused when a directional jump is zero.
AsymptoticVariances asymptotic_variances(const JumpProfile& profile, const Matrix& cov);

/// Distribution function of argmax_z {2W(z) - |z|} for a two-sided Brownian motion W, at x >= 0.
double yao_cdf(double x);

/// q with P(|argmax| <= q) = 1 - alpha.
double yao_quantile(double alpha);

/// Truncation horizon for each branch of the negative drift walk:
/// ceil(400 sigma2 / xi^2) + 50, where drift outweighs ten standard deviations.
long long rw_horizon(double xi_inf, double sigma2_inf);

/// argmax over zeta in [-H, H] of a two-sided walk started at 0 with i.i.d.
/// Normal(-xi^2, 4 xi^2 sigma2) increments on both branches. Ties go toward 0,
/// then toward negative zeta. Draw i uses its own stream seeded by (seed, i).
std::vector<long long> rw_argmax_draws(double xi_inf, double sigma2_inf, int n_draws, std::uint64_t seed);

/// Empirical (1 - alpha) quantile of |argmax|, i.e. the symmetric 1 - alpha/2 quantile.
long long rw_argmax_quantile(double xi_inf, double sigma2_inf, double alpha, int n_draws, std::uint64_t seed);

struct MonteCarloConfig {
  int n_draws = 4000;
  std::uint64_t seed = 0;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double margin = 0.0;
};

struct ConfidenceIntervals {
  double alpha = 0.05;
  Interval vanishing_w;
  Interval vanishing_h;
  Interval nonvanishing_w;
  Interval nonvanishing_h;
  /// sqrt(T_h) xi_w and sqrt(T_w) xi_h
  double xi_w_inf = 0.0;
  double xi_h_inf = 0.0;
  double q_vanishing = 0.0;
};

/// Both regimes, both axes. The width walk uses mc.seed and the height walk mc.seed + 1.
ConfidenceIntervals confidence_intervals(ChangePoint tau_tilde, const JumpProfile& profile,
                                         const AsymptoticVariances& variances, GridDims dims, double alpha,
                                         const MonteCarloConfig& mc);

struct InferenceReport {
  ChangePoint tau;
  QuadrantEstimate refit;
  JumpProfile profile;
  AsymptoticVariances variances;
  ConfidenceIntervals intervals;
  MonteCarloConfig mc;
};

/// Refit at the trace's final change point with its Step 2 supports, then build intervals.
InferenceReport infer(const Grid& grid, const EstimationTrace& trace, double alpha, const MonteCarloConfig& mc);

}  // namespace gridseg
