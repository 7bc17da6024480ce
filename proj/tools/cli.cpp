#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "gridseg/csv_io.hpp"
#include "gridseg/estimator.hpp"
#include "gridseg/image.hpp"
#include "gridseg/inference.hpp"
#include "gridseg/json_io.hpp"
#include "gridseg/segtree.hpp"
#include "gridseg/sim.hpp"

namespace gridseg::cli {

namespace {

using nlohmann::ordered_json;

// Writes to `path`, or to `fallback` when the path is empty or "-".
void emit(const std::string& path, std::ostream& fallback, const std::string& text) {
  if (path.empty() || path == "-") {
    fallback << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("cannot write " + path);
  f << text;
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

template <typename T>
std::array<T, 2> parse_pair(const std::string& text, const std::string& flag) {
  std::array<T, 2> out{};
  char comma = 0;
  std::istringstream in(text);
  if (!(in >> out[0] >> comma >> out[1]) || comma != ',' || !(in >> std::ws).eof()) {
    throw std::invalid_argument(flag + " expects two comma-separated values, got '" + text + "'");
  }
  return out;
}

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct ThresholdFlags {
  bool lambda_auto = false;
  bool per_quadrant = false;
  int dense_max_p = 3;

  void add(CLI::App* app) {
    app->add_flag("--lambda-auto", lambda_auto, "Scale the lambda grid to the data's mean magnitude");
    app->add_flag("--per-quadrant-lambda", per_quadrant, "Tune lambda separately in each quadrant");
    app->add_option("--dense-max-p", dense_max_p, "Skip thresholding when p is at most this")->capture_default_str();
  }

  ThresholdConfig config() const {
    auto c = ThresholdConfig::standard();
    c.auto_scale = lambda_auto;
    c.shared_lambda = !per_quadrant;
    c.dense_max_p = dense_max_p;
    return c;
  }
};

struct EstimateFlags {
  std::string input;
  std::string out;
  int algorithm = 1;
  double c_bic = 1.0;
  std::string init;
  ThresholdFlags threshold;

  void add(CLI::App* app) {
    app->add_option("--input", input, "Grid CSV (w,h,x1..xp)")->required();
    app->add_option("--out", out, "Output JSON path (default stdout)");
    app->add_option("--algorithm", algorithm, "1: two-step, 2: with boundary selection")
        ->check(CLI::IsMember({1, 2}))
        ->capture_default_str();
    app->add_option("--cbic", c_bic, "Boundary penalty constant for algorithm 2")->capture_default_str();
    app->add_option("--init", init, "Initial change point w,h (default: coarse grid search)");
    threshold.add(app);
  }

  EstimationTrace run(const Grid& grid) const {
    const auto cfg = threshold.config();
    ChangePoint start;
    if (init.empty()) {
      start = coarse_init(grid, cfg);
    } else {
      const auto p = parse_pair<int>(init, "--init");
      start = {p[0], p[1]};
      if (!in_bounds(grid.dims(), start)) throw std::invalid_argument("--init lies outside the grid");
    }
    return algorithm == 2 ? algorithm2(grid, start, cfg, c_bic) : algorithm1(grid, start, cfg);
  }

  std::string name() const { return algorithm == 2 ? "algorithm2" : "algorithm1"; }
};

// Affine map from cell index to the scatter coordinate of the cell center.
ordered_json map_intervals(const InferenceReport& rep, GridDims dims, const std::string& mapping_path) {
  std::ifstream f(mapping_path);
  if (!f) throw std::invalid_argument("cannot open " + mapping_path);
  ordered_json m;
  try {
    m = ordered_json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("bad mapping JSON: " + std::string(e.what()));
  }
  const auto get = [&](const char* key) {
    if (!m.contains(key) || !m[key].is_number()) throw std::invalid_argument(std::string("mapping lacks '") + key + "'");
    return m[key].get<double>();
  };
  const double x0 = get("x_min"), x1 = get("x_max"), y0 = get("y_min"), y1 = get("y_max");
  if (get("tw") != dims.tw || get("th") != dims.th) throw std::invalid_argument("mapping dimensions differ from grid");
  const auto axis = [](const Interval& iv, double lo, double hi, int t) {
    const double step = (hi - lo) / t;
    const double center = lo + (iv.lo + iv.margin - 0.5) * step;
    return ordered_json{{"lo", center - iv.margin * step}, {"hi", center + iv.margin * step}, {"margin", iv.margin * step}};
  };
  const auto& ci = rep.intervals;
  return {{"vanishing", {{"w", axis(ci.vanishing_w, x0, x1, dims.tw)}, {"h", axis(ci.vanishing_h, y0, y1, dims.th)}}},
          {"nonvanishing",
           {{"w", axis(ci.nonvanishing_w, x0, x1, dims.tw)}, {"h", axis(ci.nonvanishing_h, y0, y1, dims.th)}}}};
}

Grid read_grid_or_image(const std::string& path) {
  if (has_suffix(path, ".csv")) return io::read_grid_csv_file(path);
  return image::to_grid(image::read_image(path));
}

void write_grid_or_image(const std::string& path, const Grid& grid) {
  if (has_suffix(path, ".csv")) {
    std::ofstream f(path);
    if (!f) throw std::invalid_argument("cannot write " + path);
    io::write_grid_csv(f, grid);
    return;
  }
  image::write_image(path, image::from_grid(grid));
}

struct TreeFlags {
  double c_bic = 1.0;
  int min_cells = 16;
  int max_level = 20;
  ThresholdFlags threshold;

  void add(CLI::App* app) {
    app->add_option("--cbic", c_bic, "Boundary penalty constant")->capture_default_str();
    app->add_option("--min-cells", min_cells, "Smallest rectangle that is split further")->capture_default_str();
    app->add_option("--max-level", max_level, "Deepest level that is estimated")->capture_default_str();
    threshold.add(app);
  }

  SegmentationConfig config() const {
    SegmentationConfig c;
    c.threshold = threshold.config();
    c.c_bic = c_bic;
    c.min_cells = min_cells;
    c.max_level = max_level;
    return c;
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Two-dimensional change point estimation, inference and segmentation on grids", "gridseg"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  std::function<void()> action;

  // simulate
  SimDesign design;
  std::string tau_text = "0.2,0.2", noise_text = "gaussian", sim_out, reps_out;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo replications of the simulation design");
  sim->add_option("--tw", design.tw, "Grid width")->capture_default_str();
  sim->add_option("--th", design.th, "Grid height")->capture_default_str();
  sim->add_option("--p", design.p, "Dimension")->capture_default_str();
  sim->add_option("--s", design.s, "Nonzero mean components")->capture_default_str();
  sim->add_option("--tau", tau_text, "Change point as fractions of T_w,T_h")->capture_default_str();
  sim->add_option("--rho", design.rho, "Toeplitz correlation")->capture_default_str();
  sim->add_option("--noise", noise_text, "gaussian, laplace or exponential")->capture_default_str();
  sim->add_option("--noise-scale", design.noise_scale, "Noise multiplier (0 = noiseless)")->capture_default_str();
  sim->add_option("--reps", design.n_reps, "Replications")->capture_default_str();
  sim->add_option("--alpha", design.alpha, "Interval level")->capture_default_str();
  sim->add_option("--seed", design.seed, "Random seed")->capture_default_str();
  sim->add_option("--mc-draws", design.mc_draws, "Random walk draws per interval")->capture_default_str();
  sim->add_option("--threads", design.threads, "Worker threads")->capture_default_str();
  sim->add_option("--out", sim_out, "Metrics CSV path (default stdout)");
  sim->add_option("--reps-out", reps_out, "Per-replication JSON lines");
  ThresholdFlags sim_threshold;
  sim_threshold.add(sim);
  sim->callback([&] {
    action = [&] {
      const auto frac = parse_pair<double>(tau_text, "--tau");
      design.tau0_frac = frac;
      design.noise = parse_noise_family(noise_text);
      design.threshold = sim_threshold.config();
      const auto metrics = run_replications(design);
      std::ostringstream csv;
      io::write_metrics_csv(csv, design, metrics);
      emit(sim_out, out, csv.str());
      if (!reps_out.empty()) {
        std::ostringstream lines;
        for (const auto& rec : metrics.records) lines << io::replication_json(rec, design).dump() << '\n';
        emit(reps_out, out, lines.str());
      }
    };
  });

  // estimate
  EstimateFlags est_flags;
  auto* est = app.add_subcommand("estimate", "Estimate a single change point and print the trace");
  est_flags.add(est);
  est->callback([&] {
    action = [&] {
      const Grid grid = io::read_grid_csv_file(est_flags.input);
      const auto trace = est_flags.run(grid);
      emit(est_flags.out, out, dump(io::trace_json(trace, grid.dims(), est_flags.name())));
    };
  });

  // infer
  EstimateFlags inf_flags;
  double alpha = 0.05;
  int mc_draws = 4000;
  std::uint64_t seed = 0;
  std::string mapping;
  auto* inf = app.add_subcommand("infer", "Estimate and build confidence intervals in both regimes");
  inf_flags.add(inf);
  inf->add_option("--alpha", alpha, "Interval level")->capture_default_str();
  inf->add_option("--mc-draws", mc_draws, "Random walk draws")->capture_default_str();
  inf->add_option("--seed", seed, "Random seed for the walk quantile")->required();
  inf->add_option("--mapping", mapping, "Mapping JSON from bin-grid to report intervals in scatter coordinates");
  inf->callback([&] {
    action = [&] {
      const Grid grid = io::read_grid_csv_file(inf_flags.input);
      const auto trace = inf_flags.run(grid);
      const auto report = infer(grid, trace, alpha, {mc_draws, seed});
      ordered_json j;
      j["schema"] = io::kSchema;
      j["trace"] = io::trace_json(trace, grid.dims(), inf_flags.name());
      j["inference"] = io::inference_json(report, grid.dims());
      if (!mapping.empty()) j["mapped"] = map_intervals(report, grid.dims(), mapping);
      emit(inf_flags.out, out, dump(j));
    };
  });

  // segment-tree
  TreeFlags seg_flags;
  std::string seg_input, seg_out, seg_recon;
  auto* seg = app.add_subcommand("segment-tree", "Quarterly segmentation into a hierarchical tree");
  seg->add_option("--input", seg_input, "Grid CSV, or a PPM/PNG image")->required();
  seg->add_option("--out", seg_out, "Tree JSON path (default stdout)");
  seg->add_option("--reconstruct-out", seg_recon, "Piecewise-constant reconstruction (.csv or image)");
  seg_flags.add(seg);
  seg->callback([&] {
    action = [&] {
      const Grid grid = read_grid_or_image(seg_input);
      const auto tree = quarterly_segmentation(grid, seg_flags.config());
      emit(seg_out, out, dump(io::tree_json(tree)));
      if (!seg_recon.empty()) write_grid_or_image(seg_recon, reconstruct_means(grid, tree));
    };
  });

  // denoise
  TreeFlags dn_flags;
  std::string dn_input, dn_output, dn_tree, dn_noisy;
  double add_noise = 0.0;
  std::uint64_t dn_seed = 0;
  auto* dn = app.add_subcommand("denoise", "Replace each pixel by the mean of its segment");
  dn->add_option("--input", dn_input, "PPM or PNG image")->required();
  dn->add_option("--output", dn_output, "Denoised image (.png or .ppm)")->required();
  dn->add_option("--tree-out", dn_tree, "Tree JSON path (default stdout)");
  dn->add_option("--add-noise", add_noise, "Add Normal(0, v) noise to each channel first")->capture_default_str();
  dn->add_option("--seed", dn_seed, "Seed for --add-noise")->capture_default_str();
  dn->add_option("--noisy-out", dn_noisy, "Write the noisy input image");
  dn_flags.add(dn);
  dn->callback([&] {
    action = [&] {
      Grid grid = image::to_grid(image::read_image(dn_input));
      if (add_noise > 0.0) grid = image::add_gaussian_noise(grid, add_noise, dn_seed);
      if (!dn_noisy.empty()) image::write_image(dn_noisy, image::from_grid(grid));
      const auto tree = quarterly_segmentation(grid, dn_flags.config());
      image::write_image(dn_output, image::from_grid(reconstruct_means(grid, tree)));
      emit(dn_tree, out, dump(io::tree_json(tree)));
    };
  });

  // bin-grid
  std::string bin_input, bin_out, bin_mapping;
  int bin_tw = 25, bin_th = 25, bin_k = 10;
  auto* bin = app.add_subcommand("bin-grid", "Bin scattered observations onto a uniform grid");
  bin->add_option("--input", bin_input, "Scatter CSV (cx,cy,x1..xp)")->required();
  bin->add_option("--tw", bin_tw, "Grid width")->capture_default_str();
  bin->add_option("--th", bin_th, "Grid height")->capture_default_str();
  bin->add_option("--k", bin_k, "Nearest neighbours per cell")->capture_default_str();
  bin->add_option("--out", bin_out, "Grid CSV path (default stdout)");
  bin->add_option("--mapping-out", bin_mapping, "Write the cell-to-coordinate mapping JSON");
  bin->callback([&] {
    action = [&] {
      const auto points = io::read_scatter_csv_file(bin_input);
      const Grid grid = bin_scatter_to_grid(points, {bin_tw, bin_th}, bin_k);
      std::ostringstream csv;
      io::write_grid_csv(csv, grid);
      emit(bin_out, out, csv.str());
      if (!bin_mapping.empty()) {
        const auto [xmin, xmax] = std::minmax_element(points.begin(), points.end(),
                                                      [](const auto& a, const auto& b) { return a.cx < b.cx; });
        const auto [ymin, ymax] = std::minmax_element(points.begin(), points.end(),
                                                      [](const auto& a, const auto& b) { return a.cy < b.cy; });
        ordered_json m{{"schema", io::kSchema}, {"tw", bin_tw},      {"th", bin_th},      {"x_min", xmin->cx},
                       {"x_max", xmax->cx},     {"y_min", ymin->cy}, {"y_max", ymax->cy}};
        emit(bin_mapping, out, dump(m));
      }
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }

  try {
    if (action) action();
    return kExitOk;
  } catch (const InferenceRefused& e) {
    err << "inference refused: " << e.what() << "\n";
    return kExitRefused;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace gridseg::cli
