#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "gridseg/csv_io.hpp"
#include "gridseg/image.hpp"
#include "gridseg/json_io.hpp"
#include "support.hpp"

using namespace gridseg;
namespace ts = testsupport;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "gridseg_unit";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("grid CSV round trip is exact") {
  std::mt19937_64 rng(101);
  const Grid g = ts::random_grid(5, 4, 3, rng, 1e3);
  std::stringstream ss;
  io::write_grid_csv(ss, g);
  const Grid back = io::read_grid_csv(ss);
  CHECK(back.dims() == g.dims());
  CHECK(back.values() == g.values());
}

TEST_CASE("grid CSV accepts any row order") {
  std::istringstream in("w,h,x1\n2,1,4\n1,2,2\n1,1,1\n2,2,8\n");
  const Grid g = io::read_grid_csv(in);
  CHECK(g.at(2, 1)[0] == 4.0);
  CHECK(g.at(1, 2)[0] == 2.0);
}

TEST_CASE("grid CSV errors") {
  const auto bad = [](const std::string& text) {
    std::istringstream in(text);
    CHECK_THROWS_AS(io::read_grid_csv(in), std::invalid_argument);
  };
  bad("");
  bad("a,b,x1\n1,1,0\n");
  bad("w,h\n1,1\n");
  bad("w,h,x1\n1,1,0\n1,1,0\n");
  bad("w,h,x1\n1,1,0\n2,2,0\n");
  bad("w,h,x1\n1,1,abc\n");
  bad("w,h,x1\n0,1,3\n");
  bad("w,h,x1,x2\n1,1,3\n");
  CHECK_THROWS(io::read_grid_csv_file("/nonexistent/grid.csv"));
}

TEST_CASE("scatter CSV") {
  std::istringstream in("cx,cy,x1,x2\n0.5,1.5,1,2\n-1,2,3,4\n");
  const auto pts = io::read_scatter_csv(in);
  REQUIRE(pts.size() == 2);
  CHECK(pts[1].cx == -1.0);
  CHECK(pts[1].obs == std::vector<double>{3.0, 4.0});
  std::istringstream missing("cx,x1\n1,2\n");
  CHECK_THROWS_AS(io::read_scatter_csv(missing), std::invalid_argument);
}

TEST_CASE("format_double is shortest round-trip") {
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_double(2.0) == "2");
  CHECK(std::stod(io::format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("PPM round trip and pixel mapping") {
  image::RgbImage img{3, 2, {0, 0, 0, 10, 20, 30, 255, 255, 255, 1, 2, 3, 4, 5, 6, 7, 8, 9}};
  std::stringstream ss;
  image::write_ppm(ss, img);
  const auto back = image::read_ppm(ss);
  CHECK(back.width == 3);
  CHECK(back.height == 2);
  CHECK(back.rgb == img.rgb);

  const Grid g = image::to_grid(img);
  CHECK(g.tw() == 3);
  CHECK(g.th() == 2);
  CHECK(g.at(2, 2)[0] == doctest::Approx(10.0 / 255.0));
  CHECK(g.at(1, 1)[2] == doctest::Approx(3.0 / 255.0));
  CHECK(image::from_grid(g).rgb == img.rgb);

  std::istringstream ascii("P3\n# comment\n2 1\n255\n1 2 3 4 5 6\n");
  CHECK(image::read_ppm(ascii).rgb == std::vector<std::uint8_t>{1, 2, 3, 4, 5, 6});
  std::istringstream bogus("P7\n1 1\n255\n");
  CHECK_THROWS(image::read_ppm(bogus));
}

TEST_CASE("PNG files round trip") {
  image::RgbImage img{4, 3, {}};
  for (int i = 0; i < 36; ++i) img.rgb.push_back(static_cast<std::uint8_t>(i * 7));
  const fs::path png = scratch("rt.png"), ppm = scratch("rt.ppm");
  image::write_image(png.string(), img);
  image::write_image(ppm.string(), img);
  CHECK(image::read_image(png.string()).rgb == img.rgb);
  CHECK(image::read_image(ppm.string()).rgb == img.rgb);
  CHECK_THROWS(image::read_image(scratch("missing.png").string()));
}

TEST_CASE("noise injection and clamping") {
  const Grid g(4, 4, 3, std::vector<double>(48, 0.5));
  const Grid a = image::add_gaussian_noise(g, 0.05, 3), b = image::add_gaussian_noise(g, 0.05, 3);
  CHECK(a.values() == b.values());
  CHECK(a.values() != g.values());
  CHECK(image::add_gaussian_noise(g, 0.0, 3).values() == g.values());
  const Grid wild(1, 1, 3, {-0.5, 0.5, 1.7});
  CHECK(image::from_grid(wild).rgb == std::vector<std::uint8_t>{0, 128, 255});
}

TEST_CASE("JSON documents") {
  std::mt19937_64 rng(102);
  const auto theta = ts::separated_means(4, rng);
  const Grid g = ts::piecewise_grid(16, 12, {5, 7}, theta);
  const auto cfg = ThresholdConfig::standard();
  const auto trace = algorithm2(g, coarse_init(g, cfg), cfg, 1.0);
  const auto j = io::trace_json(trace, g.dims(), "2");
  CHECK(j["schema"] == "gridseg/v1");
  CHECK(j["final_cp"] == nlohmann::json::array({5, 7}));
  CHECK(j["step1"].contains("gamma"));
  const auto supports = j["step2"]["supports"];
  for (int q = 0; q < 4; ++q) {
    std::vector<int> want;
    for (int k : trace.step2_means.supports[q]) want.push_back(k + 1);
    CHECK(supports[q].get<std::vector<int>>() == want);
  }
  const auto reparsed = nlohmann::ordered_json::parse(j.dump());
  CHECK(reparsed == j);

  SegmentationConfig scfg;
  const auto tree = quarterly_segmentation(g, scfg);
  const auto tj = io::tree_json(tree);
  CHECK(tj["leaf_count"] == 4);
  CHECK(tj["cp_count"] == 1);
  CHECK(tj["nodes"][0]["index"] == "");
  CHECK(tj["nodes"][0]["cp"] == nlohmann::json::array({5, 7}));
  CHECK(tj["nodes"][0]["domain"] == nlohmann::json::array({1, 16, 1, 12}));
}

TEST_CASE("metrics CSV layout") {
  SimDesign d;
  ReplicationMetrics m;
  m.n_reps = 3;
  m.bias_w = 0.5;
  std::ostringstream out;
  io::write_metrics_csv(out, d, m);
  const std::string text = out.str();
  const auto nl = text.find('\n');
  CHECK(text.substr(0, nl).rfind("tw,th,p,s,tau_w,tau_h,rho,noise,reps,alpha,seed,bias_w", 0) == 0);
  CHECK(text.substr(nl + 1).rfind("30,30,10,5,6,6,0.5,gaussian,3,0.05,0,0.500000,", 0) == 0);
}
