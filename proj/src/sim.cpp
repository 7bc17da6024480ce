#include "gridseg/sim.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <random>
#include <stdexcept>
#include <thread>

#include <Eigen/Cholesky>
#include <boost/random/exponential_distribution.hpp>
#include <boost/random/laplace_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

namespace gridseg {

NoiseFamily parse_noise_family(const std::string& name) {
  if (name == "gaussian") return NoiseFamily::gaussian;
  if (name == "laplace") return NoiseFamily::laplace;
  if (name == "exponential" || name == "centered_exponential") return NoiseFamily::centered_exponential;
  throw std::invalid_argument("unknown noise family '" + name + "' (gaussian, laplace, exponential)");
}

std::string to_string(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::gaussian: return "gaussian";
    case NoiseFamily::laplace: return "laplace";
    case NoiseFamily::centered_exponential: return "exponential";
  }
  return "gaussian";
}

Matrix toeplitz_covariance(int p, double rho) {
  if (p < 1) throw std::invalid_argument("p must be positive");
  if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("toeplitz rho must satisfy |rho| < 1");
  Matrix s(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = 0; j < p; ++j) s(i, j) = std::pow(rho, std::abs(i - j));
  return s;
}

ChangePoint SimDesign::tau0() const {
  return {static_cast<int>(std::floor(tau0_frac[0] * tw)), static_cast<int>(std::floor(tau0_frac[1] * th))};
}

std::array<Vector, kQuadrants> SimDesign::theta0() const {
  if (custom_theta) return *custom_theta;
  Vector v = Vector::Zero(p);
  for (int k = 0; k < s; ++k) v[k] = s == 1 ? 0.75 : 0.75 - 0.5 * k / (s - 1);
  return {v, Vector::Zero(p), v, Vector::Zero(p)};
}

void SimDesign::validate() const {
  if (tw < 4 || th < 4) throw std::invalid_argument("grid must be at least 4x4");
  if (p < 1) throw std::invalid_argument("p must be positive");
  if (s < 0 || s > p) throw std::invalid_argument("s must lie in 0..p");
  for (double f : tau0_frac) {
    if (!(f > 0.0 && f <= 1.0)) throw std::invalid_argument("tau fractions must lie in (0, 1]");
  }
  if (!in_bounds({tw, th}, tau0())) throw std::invalid_argument("tau0 falls outside the grid");
  if (custom_theta) {
    for (const auto& t : *custom_theta) {
      if (t.size() != p) throw std::invalid_argument("custom theta dimension does not match p");
    }
  }
  if (!(std::abs(rho) < 1.0)) throw std::invalid_argument("rho must satisfy |rho| < 1");
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) throw std::invalid_argument("noise scale must be >= 0");
  if (n_reps < 1) throw std::invalid_argument("reps must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
  if (mc_draws < 1) throw std::invalid_argument("mc draws must be positive");
  if (threads < 1) throw std::invalid_argument("threads must be positive");
  threshold.validate();
}

namespace {

std::mt19937_64 rep_engine(std::uint64_t seed, int rep) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(rep)};
  return std::mt19937_64(seq);
}

}  // namespace

SimulatedGrid generate_grid(const SimDesign& design, int rep_index) {
  design.validate();
  const int p = design.p;
  const ChangePoint tau0 = design.tau0();
  const auto theta = design.theta0();
  const Matrix chol = toeplitz_covariance(p, design.rho).llt().matrixL();

  auto eng = rep_engine(design.seed, rep_index);
  boost::random::normal_distribution<double> gauss(0.0, 1.0);
  boost::random::laplace_distribution<double> laplace(0.0, 1.0 / std::sqrt(2.0));
  boost::random::exponential_distribution<double> expo(1.0);
  const auto draw = [&]() -> double {
    switch (design.noise) {
      case NoiseFamily::gaussian: return gauss(eng);
      case NoiseFamily::laplace: return laplace(eng);
      case NoiseFamily::centered_exponential: return expo(eng) - 1.0;
    }
    return 0.0;
  };

  const auto part = quadrant_partition({design.tw, design.th}, tau0);
  Grid grid(design.tw, design.th, p);
  Vector z(p);
  for (int w = 1; w <= design.tw; ++w) {
    for (int h = 1; h <= design.th; ++h) {
      const Vector& mean = theta[static_cast<std::size_t>(part.quadrant_of(w, h))];
      auto cell = grid.at(w, h);
      if (design.noise_scale == 0.0) {
        for (int k = 0; k < p; ++k) cell[k] = mean[k];
        continue;
      }
      for (int k = 0; k < p; ++k) z[k] = draw();
      const Vector x = mean + design.noise_scale * (chol * z);
      for (int k = 0; k < p; ++k) cell[k] = x[k];
    }
  }
  return {std::move(grid), tau0, QuadrantEstimate::from_theta(theta)};
}

std::uint64_t replication_mc_seed(std::uint64_t seed, int rep_index) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(rep_index) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

ReplicationRecord run_one(const SimDesign& design, int rep) {
  const auto sim = generate_grid(design, rep);
  ReplicationRecord rec;
  rec.rep = rep;
  rec.init = coarse_init(sim.grid, design.threshold);
  const auto trace = algorithm1(sim.grid, rec.init, design.threshold);
  rec.estimate = trace.final_cp;
  try {
    const auto report = infer(sim.grid, trace, design.alpha, {design.mc_draws, replication_mc_seed(design.seed, rep)});
    rec.intervals = report.intervals;
    rec.sigma2 = {report.variances.sigma2_w, report.variances.sigma2_h};
    const auto contains = [](const Interval& iv, int t) { return iv.lo <= t && t <= iv.hi; };
    rec.covered = {contains(rec.intervals.vanishing_w, sim.tau0.w), contains(rec.intervals.vanishing_h, sim.tau0.h),
                   contains(rec.intervals.nonvanishing_w, sim.tau0.w),
                   contains(rec.intervals.nonvanishing_h, sim.tau0.h)};
  } catch (const InferenceRefused& e) {
    rec.refused = e.what();
  }
  return rec;
}

}  // namespace

ReplicationMetrics run_replications(const SimDesign& design) {
  design.validate();
  ReplicationMetrics m;
  m.n_reps = design.n_reps;
  m.records.resize(static_cast<std::size_t>(design.n_reps));

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  const auto worker = [&]() {
    for (int r = next++; r < design.n_reps && !failed; r = next++) {
      try {
        m.records[static_cast<std::size_t>(r)] = run_one(design, r);
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  const int n_threads = std::min(design.threads, design.n_reps);
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  // Reduction in replication order so results do not depend on scheduling.
  const ChangePoint tau0 = design.tau0();
  long double err_w = 0, err_h = 0, sq_w = 0, sq_h = 0;
  std::array<long double, 4> cover{}, margin{};
  int used = 0;
  for (const auto& rec : m.records) {
    const long double dw = rec.estimate.w - tau0.w;
    const long double dh = rec.estimate.h - tau0.h;
    err_w += dw;
    err_h += dh;
    sq_w += dw * dw;
    sq_h += dh * dh;
    if (!rec.refused.empty()) {
      ++m.n_refused;
      continue;
    }
    ++used;
    for (int i = 0; i < 4; ++i) cover[i] += rec.covered[i] ? 1 : 0;
    margin[0] += rec.intervals.vanishing_w.margin;
    margin[1] += rec.intervals.vanishing_h.margin;
    margin[2] += rec.intervals.nonvanishing_w.margin;
    margin[3] += rec.intervals.nonvanishing_h.margin;
  }
  const long double n = design.n_reps;
  m.bias_w = static_cast<double>(err_w / n);
  m.bias_h = static_cast<double>(err_h / n);
  m.rmse_w = static_cast<double>(std::sqrt(sq_w / n));
  m.rmse_h = static_cast<double>(std::sqrt(sq_h / n));
  if (used > 0) {
    m.coverage_v_w = static_cast<double>(cover[0] / used);
    m.coverage_v_h = static_cast<double>(cover[1] / used);
    m.coverage_nv_w = static_cast<double>(cover[2] / used);
    m.coverage_nv_h = static_cast<double>(cover[3] / used);
    m.avg_me_v_w = static_cast<double>(margin[0] / used);
    m.avg_me_v_h = static_cast<double>(margin[1] / used);
    m.avg_me_nv_w = static_cast<double>(margin[2] / used);
    m.avg_me_nv_h = static_cast<double>(margin[3] / used);
  }
  return m;
}

}  // namespace gridseg
