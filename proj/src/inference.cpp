#include "gridseg/inference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gridseg {

QuadrantEstimate refit_means(const Grid& grid, ChangePoint tau, const std::array<std::vector<int>, kQuadrants>& supports) {
  const auto means = quadrant_means(grid, tau);
  std::array<Vector, kQuadrants> theta;
  for (int j = 0; j < kQuadrants; ++j) {
    theta[j] = Vector::Zero(grid.p());
    if (supports[j].empty()) continue;
    if (!means[j]) {
      throw std::invalid_argument("quadrant " + std::to_string(j + 1) + " is empty but has a nonempty support");
    }
    for (int k : supports[j]) {
      if (k < 0 || k >= grid.p()) throw std::out_of_range("support index outside 0..p-1");
      theta[j][k] = (*means[j])[k];
    }
  }
  return QuadrantEstimate::from_theta(std::move(theta));
}

JumpProfile jump_profile(const QuadrantEstimate& est, ChangePoint tau, GridDims dims) {
  if (!is_interior(dims, tau)) {
    throw InferenceRefused("change point (" + std::to_string(tau.w) + "," + std::to_string(tau.h) +
                           ") is on the boundary; jump sizes are undefined");
  }
  const auto& t = est.theta;
  JumpProfile jp;
  jp.eta = {t[1] - t[0], t[2] - t[1], t[2] - t[3], t[0] - t[3]};
  for (int j = 0; j < kQuadrants; ++j) {
    jp.xi[j] = jp.eta[j].norm();
    if (jp.eta[j].size() > 0) jp.psi = std::max(jp.psi, jp.eta[j].cwiseAbs().maxCoeff());
  }
  jp.omega_w = static_cast<double>(dims.tw - tau.w) / dims.tw;
  jp.omega_h = static_cast<double>(dims.th - tau.h) / dims.th;
  jp.xi_w2 = jp.omega_h * jp.xi[0] * jp.xi[0] + (1.0 - jp.omega_h) * jp.xi[2] * jp.xi[2];
  jp.xi_h2 = jp.omega_w * jp.xi[3] * jp.xi[3] + (1.0 - jp.omega_w) * jp.xi[1] * jp.xi[1];
  return jp;
}

Matrix sample_covariance(const Grid& grid, ChangePoint tau, const QuadrantEstimate& est) {
  const auto part = quadrant_partition(grid.dims(), tau);
  const int p = grid.p();
  Matrix acc = Matrix::Zero(p, p);
  Vector r(p);
  for (int j = 0; j < kQuadrants; ++j) {
    if (!part.rects[j]) continue;
    if (est.theta[j].size() != p) throw std::invalid_argument("estimate dimension does not match grid");
    const Rect& rect = *part.rects[j];
    for (int w = rect.w_lo; w <= rect.w_hi; ++w) {
      for (int h = rect.h_lo; h <= rect.h_hi; ++h) {
        r = grid.vec(w, h) - est.theta[j];
        acc.selfadjointView<Eigen::Lower>().rankUpdate(r);
      }
    }
  }
  Matrix cov = acc.selfadjointView<Eigen::Lower>();
  cov /= static_cast<double>(grid.cells());
  return cov;
}

AsymptoticVariances asymptotic_variances(const JumpProfile& profile, const Matrix& cov) {
  if (!(profile.xi_w2 > 0.0) || !(profile.xi_h2 > 0.0)) {
    throw InferenceRefused("directional jump is zero; asymptotic variance is undefined");
  }
  const auto p = profile.eta[0].size();
  if (cov.rows() != p || cov.cols() != p) throw std::invalid_argument("covariance dimension does not match jumps");
  const auto quad = [&](const Vector& v) { return v.dot(cov * v); };
  AsymptoticVariances av;
  av.cov_hat = cov;
  av.sigma2_w = (profile.omega_h * quad(profile.eta[0]) + (1.0 - profile.omega_h) * quad(profile.eta[2])) / profile.xi_w2;
  av.sigma2_h = (profile.omega_w * quad(profile.eta[3]) + (1.0 - profile.omega_w) * quad(profile.eta[1])) / profile.xi_h2;
  return av;
}

namespace {

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
}

Interval around(double center, double margin) { return {center - margin, center + margin, margin}; }

}  // namespace

ConfidenceIntervals confidence_intervals(ChangePoint tau_tilde, const JumpProfile& profile,
                                         const AsymptoticVariances& variances, GridDims dims, double alpha,
                                         const MonteCarloConfig& mc) {
  require_alpha(alpha);
  if (!is_interior(dims, tau_tilde)) throw InferenceRefused("confidence intervals need an interior change point");
  if (!(profile.xi_w2 > 0.0) || !(profile.xi_h2 > 0.0)) throw InferenceRefused("directional jump is zero");

  ConfidenceIntervals ci;
  ci.alpha = alpha;
  ci.q_vanishing = yao_quantile(alpha);
  ci.xi_w_inf = std::sqrt(dims.th * profile.xi_w2);
  ci.xi_h_inf = std::sqrt(dims.tw * profile.xi_h2);

  ci.vanishing_w = around(tau_tilde.w, ci.q_vanishing * variances.sigma2_w / (dims.th * profile.xi_w2));
  ci.vanishing_h = around(tau_tilde.h, ci.q_vanishing * variances.sigma2_h / (dims.tw * profile.xi_h2));

  // With no noise the walk has a deterministic negative drift and peaks at 0.
  const auto nv = [&](double xi_inf, double sigma2, std::uint64_t seed) -> double {
    if (!(sigma2 > 0.0)) return 0.0;
    return static_cast<double>(rw_argmax_quantile(xi_inf, sigma2, alpha, mc.n_draws, seed));
  };
  ci.nonvanishing_w = around(tau_tilde.w, nv(ci.xi_w_inf, variances.sigma2_w, mc.seed));
  ci.nonvanishing_h = around(tau_tilde.h, nv(ci.xi_h_inf, variances.sigma2_h, mc.seed + 1));
  return ci;
}

InferenceReport infer(const Grid& grid, const EstimationTrace& trace, double alpha, const MonteCarloConfig& mc) {
  require_alpha(alpha);
  if (mc.n_draws < 1) throw std::invalid_argument("n_draws must be positive");
  InferenceReport rep;
  rep.tau = trace.final_cp;
  rep.mc = mc;
  if (!is_interior(grid.dims(), rep.tau)) {
    throw InferenceRefused("estimated change point (" + std::to_string(rep.tau.w) + "," + std::to_string(rep.tau.h) +
                           ") is on the boundary; inference is only defined for interior changes");
  }
  rep.refit = refit_means(grid, rep.tau, trace.step2_means.supports);
  rep.profile = jump_profile(rep.refit, rep.tau, grid.dims());
  rep.variances = asymptotic_variances(rep.profile, sample_covariance(grid, rep.tau, rep.refit));
  rep.intervals = confidence_intervals(rep.tau, rep.profile, rep.variances, grid.dims(), alpha, mc);
  return rep;
}

}  // namespace gridseg
