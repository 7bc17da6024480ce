#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridseg/estimator.hpp"
#include "gridseg/grid.hpp"
#include "gridseg/inference.hpp"

namespace gridseg {

enum class NoiseFamily { gaussian, laplace, centered_exponential };

NoiseFamily parse_noise_family(const std::string& name);
std::string to_string(NoiseFamily family);

/// Sigma_ij = rho^|i-j|.
Matrix toeplitz_covariance(int p, double rho);

struct SimDesign {
  int tw = 30;
  int th = 30;
  int p = 10;
  int s = 5;
  std::array<double, 2> tau0_frac{0.2, 0.2};
  /// Overrides the default pattern theta_1 = theta_3 = (0.75, ..., 0.25, 0, ..., 0), theta_2 = theta_4 = 0.
  std::optional<std::array<Vector, kQuadrants>> custom_theta;
  double rho = 0.5;
  NoiseFamily noise = NoiseFamily::gaussian;
  /// Multiplies the unit-variance noise; 0 gives noiseless data.
  double noise_scale = 1.0;
  int n_reps = 500;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  int mc_draws = 4000;
  int threads = 1;
  ThresholdConfig threshold = ThresholdConfig::standard();

  ChangePoint tau0() const;
  std::array<Vector, kQuadrants> theta0() const;
  void validate() const;
};

struct SimulatedGrid {
  Grid grid;
  ChangePoint tau0;
  QuadrantEstimate theta0;
};

/// Deterministic in (design.seed, rep_index).
SimulatedGrid generate_grid(const SimDesign& design, int rep_index);

struct ReplicationRecord {
  int rep = 0;
  ChangePoint init;
  ChangePoint estimate;
  /// Empty when intervals were produced.
  std::string refused;
  ConfidenceIntervals intervals;
  std::array<double, 2> sigma2{};
  std::array<bool, 4> covered{};  // vanishing w, vanishing h, nonvanishing w, nonvanishing h
};

struct ReplicationMetrics {
  double bias_w = 0.0;
  double bias_h = 0.0;
  double rmse_w = 0.0;
  double rmse_h = 0.0;
  double coverage_v_w = 0.0;
  double coverage_v_h = 0.0;
  double coverage_nv_w = 0.0;
  double coverage_nv_h = 0.0;
  double avg_me_v_w = 0.0;
  double avg_me_v_h = 0.0;
  double avg_me_nv_w = 0.0;
  double avg_me_nv_h = 0.0;
  int n_reps = 0;
  /// Replications whose estimate was on the boundary; excluded from coverage and margins.
  int n_refused = 0;
  std::vector<ReplicationRecord> records;
};

/// Seed of the interval Monte Carlo for one replication.
std::uint64_t replication_mc_seed(std::uint64_t seed, int rep_index);

/// generate -> coarse_init -> algorithm1 -> infer, per replication.
ReplicationMetrics run_replications(const SimDesign& design);

}  // namespace gridseg
