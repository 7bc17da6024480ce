#pragma once

#include <array>
#include <optional>
#include <vector>

#include "gridseg/grid.hpp"

namespace gridseg {

struct ThresholdConfig {
  /// Ascending candidate values for lambda.
  std::vector<double> lambda_grid;
  /// One lambda for all four quadrants. When false each quadrant picks its own.
  bool shared_lambda = true;
  /// For p <= dense_max_p thresholding is skipped and plain sample means are used.
  int dense_max_p = 3;
  /// Stretch lambda_grid so that 0.5 maps to the largest absolute component
  /// of the global mean. For data not on the unit scale. Off by default.
  bool auto_scale = false;

  /// 25 evenly spaced values strictly inside (0, 0.5).
  static ThresholdConfig standard();
  void validate() const;
};

/// sign(x) * max(|x| - lambda, 0), componentwise.
Vector soft_threshold(const Vector& x, double lambda);

/// Soft-thresholded quadrant means. Empty quadrants get a zero vector with empty support.
QuadrantEstimate regularized_means(const Grid& grid, ChangePoint tau, const std::array<double, kQuadrants>& lambdas);

struct LambdaChoice {
  /// The shared lambda, or the largest per-quadrant lambda when not shared.
  double lambda = 0.0;
  std::array<double, kQuadrants> lambdas{};
  QuadrantEstimate est;
  /// Unnormalized residual sum of squares plus |union support| * log(T_w T_h).
  double bic = 0.0;
};

/// BIC-tuned regularized means at `tau`. Ties go to the larger lambda.
LambdaChoice bic_select_lambda(const Grid& grid, ChangePoint tau, const ThresholdConfig& config);

/// Inclusive 1-based search range.
struct SearchRange {
  int lo = 1;
  int hi = 0;
};

/// Minimizer of squared_loss over tau_w in `search` (default 1..T_w-1) with tau_h fixed.
/// Ties go to the smallest index.
int argmin_width(const Grid& grid, int tau_h, const QuadrantEstimate& est, std::optional<SearchRange> search = {});
int argmin_height(const Grid& grid, int tau_w, const QuadrantEstimate& est, std::optional<SearchRange> search = {});

struct BoundarySelection {
  /// Interior minimizer over 1..T-1.
  int interior = 0;
  /// L(T) - L(interior); negative when the boundary fits better.
  double gap = 0.0;
  /// T if gap < gamma, otherwise `interior`.
  int selected = 0;
};

BoundarySelection select_boundary_width(const Grid& grid, int tau_h, const QuadrantEstimate& est, double gamma);
BoundarySelection select_boundary_height(const Grid& grid, int tau_w, const QuadrantEstimate& est, double gamma);

/// Best of the 3x3 candidates {floor(.25T), floor(.5T), floor(.75T)} per axis,
/// scored by the BIC of the tuned means at each candidate. Ties go to the first
/// candidate in row-major order with w outer. Requires T_w, T_h >= 4.
ChangePoint coarse_init(const Grid& grid, const ThresholdConfig& config);

/// (2 p_eff + 1) c_bic log(T_w T_h) / (T_w T_h).
double boundary_gamma(GridDims dims, int p_eff, double c_bic);

struct EstimationTrace {
  ChangePoint init;
  QuadrantEstimate step1_means;
  ChangePoint step1_cp;
  /// Algorithm 2 only.
  std::optional<ChangePoint> step1_boundary_cp;
  QuadrantEstimate step2_means;
  ChangePoint final_cp;
  std::array<double, 2> lambda_used{};
  /// (gamma_w, gamma_h), Algorithm 2 only.
  std::optional<std::array<double, 2>> gamma_used;
  /// Boundary loss gaps (width, height), Algorithm 2 only.
  std::optional<std::array<double, 2>> boundary_gap;
};

/// Two-step plug-in estimator.
EstimationTrace algorithm1(const Grid& grid, ChangePoint init, const ThresholdConfig& config);

/// Two-step estimator with boundary selection.
EstimationTrace algorithm2(const Grid& grid, ChangePoint init, const ThresholdConfig& config, double c_bic);

}  // namespace gridseg
