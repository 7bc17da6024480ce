#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "gridseg/grid.hpp"
#include "support.hpp"

using namespace gridseg;
namespace ts = testsupport;

TEST_CASE("grid access is 1-based and bounds checked") {
  Grid g(3, 2, 2);
  g.at(3, 2)[1] = 7.0;
  CHECK(g.vec(3, 2)[1] == 7.0);
  CHECK_THROWS_AS(g.at(0, 1), std::out_of_range);
  CHECK_THROWS_AS(g.at(4, 1), std::out_of_range);
  CHECK_THROWS_AS(g.at(1, 3), std::out_of_range);
  CHECK_THROWS_AS(Grid(2, 2, 1, std::vector<double>(3)), std::invalid_argument);
  CHECK_THROWS(Grid(2, 2, 1, {1.0, 2.0, std::nan(""), 4.0}));
}

TEST_CASE("subgrid copies cells into local coordinates") {
  std::mt19937_64 rng(1);
  const Grid g = ts::random_grid(6, 5, 2, rng);
  const Grid s = g.subgrid(Rect{2, 4, 3, 5});
  REQUIRE(s.tw() == 3);
  REQUIRE(s.th() == 3);
  for (int w = 1; w <= 3; ++w)
    for (int h = 1; h <= 3; ++h)
      for (int k = 0; k < 2; ++k) CHECK(s.at(w, h)[k] == g.at(w + 1, h + 2)[k]);
}

TEST_CASE("quadrant_partition counts") {
  CHECK(quadrant_partition({6, 6}, {2, 2}).counts == std::array<std::size_t, 4>{16, 8, 4, 8});
  const auto full = quadrant_partition({6, 6}, {6, 6});
  CHECK(full.counts == std::array<std::size_t, 4>{0, 0, 36, 0});
  CHECK_FALSE(full.rects[0]);
  CHECK_FALSE(full.rects[3]);

  std::array<std::size_t, 4> brute{};
  for (int w = 1; w <= 50; ++w)
    for (int h = 1; h <= 50; ++h) ++brute[static_cast<std::size_t>(ts::quadrant_by_predicate(w, h, {14, 18}))];
  CHECK(quadrant_partition({50, 50}, {14, 18}).counts == brute);

  CHECK_THROWS_AS(quadrant_partition({6, 6}, {7, 2}), std::out_of_range);
  CHECK_THROWS_AS(quadrant_partition({6, 6}, {0, 2}), std::out_of_range);
}

TEST_CASE("width boundary empties Q1 and Q4") {
  const auto part = quadrant_partition({5, 4}, {5, 2});
  CHECK(part.counts == std::array<std::size_t, 4>{0, 10, 10, 0});
  CHECK(part.cells(1).size() == 10);
  CHECK(part.quadrant_of(6, 1) == -1);
}

TEST_CASE("quadrant_means") {
  SUBCASE("constant grid") {
    const Grid g(5, 4, 2, std::vector<double>(40, 1.5));
    const auto m = quadrant_means(g, {2, 3});
    for (const auto& q : m) {
      REQUIRE(q);
      CHECK((*q - Vector::Constant(2, 1.5)).norm() == doctest::Approx(0.0));
    }
  }
  SUBCASE("double boundary gives the global mean in Q3 only") {
    std::mt19937_64 rng(2);
    const Grid g = ts::random_grid(4, 3, 2, rng);
    const auto m = quadrant_means(g, {4, 3});
    CHECK_FALSE(m[0]);
    CHECK_FALSE(m[1]);
    CHECK_FALSE(m[3]);
    REQUIRE(m[2]);
    const auto b = ts::brute_means(g, {4, 3});
    CHECK((*m[2] - b.mean[2]).norm() < 1e-14);
  }
  SUBCASE("random 4x4x2 against an accumulation loop") {
    std::mt19937_64 rng(3);
    const Grid g = ts::random_grid(4, 4, 2, rng);
    const auto m = quadrant_means(g, {2, 2});
    const auto b = ts::brute_means(g, {2, 2});
    for (int j = 0; j < 4; ++j) CHECK((*m[j] - b.mean[j]).norm() < 1e-14);
  }
  SUBCASE("index sets and predicate scan agree") {
    std::mt19937_64 rng(4);
    const Grid g = ts::random_grid(7, 5, 3, rng);
    const auto part = quadrant_partition(g.dims(), {3, 4});
    const auto m = quadrant_means(g, {3, 4});
    for (int j = 0; j < 4; ++j) {
      Vector acc = Vector::Zero(3);
      for (auto [w, h] : part.cells(j)) acc += g.vec(w, h);
      CHECK((*m[j] - acc / static_cast<double>(part.counts[j])).norm() < 1e-14);
    }
  }
}

TEST_CASE("squared_loss") {
  std::mt19937_64 rng(5);
  SUBCASE("zero at the generating parameters") {
    const auto theta = ts::separated_means(4, rng);
    const Grid g = ts::piecewise_grid(9, 7, {3, 5}, theta);
    CHECK(squared_loss(g, {3, 5}, QuadrantEstimate::from_theta(theta)) == 0.0);
  }
  SUBCASE("zero grid against e1") {
    Vector e1 = Vector::Zero(3);
    e1[0] = 1.0;
    const Grid g(4, 5, 3);
    CHECK(squared_loss(g, {2, 2}, QuadrantEstimate::from_theta({e1, e1, e1, e1})) == doctest::Approx(1.0));
  }
  SUBCASE("random 5x5x3 against a double loop") {
    const Grid g = ts::random_grid(5, 5, 3, rng);
    std::array<Vector, 4> theta;
    for (auto& t : theta) t = ts::random_vector(3, rng);
    CHECK(squared_loss(g, {2, 3}, QuadrantEstimate::from_theta(theta)) ==
          doctest::Approx(ts::brute_loss(g, {2, 3}, theta)).epsilon(1e-12));
  }
  SUBCASE("means minimise the loss for a fixed split") {
    const Grid g = ts::random_grid(6, 6, 2, rng);
    const auto m = quadrant_means(g, {4, 2});
    std::array<Vector, 4> theta{*m[0], *m[1], *m[2], *m[3]};
    const double base = squared_loss(g, {4, 2}, QuadrantEstimate::from_theta(theta));
    std::normal_distribution<double> delta(0.0, 0.1);
    for (int trial = 0; trial < 200; ++trial) {
      auto moved = theta;
      moved[static_cast<std::size_t>(trial % 4)][trial % 2] += delta(rng);
      CHECK(squared_loss(g, {4, 2}, QuadrantEstimate::from_theta(moved)) >= base);
    }
  }
  SUBCASE("visit order does not matter") {
    const Grid g = ts::random_grid(6, 5, 2, rng);
    std::array<Vector, 4> theta;
    for (auto& t : theta) t = ts::random_vector(2, rng);
    std::vector<std::pair<int, int>> cells;
    for (int w = 1; w <= 6; ++w)
      for (int h = 1; h <= 5; ++h) cells.emplace_back(w, h);
    std::shuffle(cells.begin(), cells.end(), rng);
    double total = 0.0;
    for (auto [w, h] : cells)
      total += (g.vec(w, h) - theta[static_cast<std::size_t>(ts::quadrant_by_predicate(w, h, {3, 2}))]).squaredNorm();
    CHECK(squared_loss(g, {3, 2}, QuadrantEstimate::from_theta(theta)) == doctest::Approx(total / 30.0).epsilon(1e-9));
  }
  SUBCASE("dimension mismatch") {
    const Grid g = ts::random_grid(3, 3, 2, rng);
    const Vector v = Vector::Zero(3);
    CHECK_THROWS_AS(squared_loss(g, {1, 1}, QuadrantEstimate::from_theta({v, v, v, v})), std::invalid_argument);
  }
}

TEST_CASE("QuadrantEstimate supports are the exact nonzero sets") {
  Vector a(4), b(4);
  a << 0.0, 1.0, 0.0, -2.0;
  b << 0.5, 0.0, 0.0, 0.0;
  const auto est = QuadrantEstimate::from_theta({a, b, Vector::Zero(4), a});
  CHECK(est.supports[0] == std::vector<int>{1, 3});
  CHECK(est.supports[1] == std::vector<int>{0});
  CHECK(est.supports[2].empty());
  CHECK(est.union_support() == std::vector<int>{0, 1, 3});
  CHECK(est.sparsity() == 2);
}

TEST_CASE("center_grid") {
  std::mt19937_64 rng(6);
  SUBCASE("constant grid becomes zero") {
    const Grid c = center_grid(Grid(3, 4, 2, std::vector<double>(24, 3.25)));
    for (double v : c.values()) CHECK(v == 0.0);
  }
  SUBCASE("random grid has zero column means and centering is idempotent") {
    const Grid g = ts::random_grid(9, 8, 3, rng, 5.0);
    const Grid c = center_grid(g);
    const auto m = ts::brute_means(c, {9, 8});
    CHECK(m.mean[2].cwiseAbs().maxCoeff() < 1e-10 * 5.0);
    const Grid cc = center_grid(c);
    for (std::size_t i = 0; i < c.values().size(); ++i) CHECK(cc.values()[i] == doctest::Approx(c.values()[i]));
  }
}

TEST_CASE("bin_scatter_to_grid") {
  SUBCASE("lattice points with k = 1 are reproduced") {
    std::vector<ScatterPoint> pts;
    for (int w = 1; w <= 4; ++w)
      for (int h = 1; h <= 3; ++h) pts.push_back({static_cast<double>(w), 10.0 * h, {w * 10.0 + h}});
    const Grid g = bin_scatter_to_grid(pts, {4, 3}, 1);
    for (int w = 1; w <= 4; ++w)
      for (int h = 1; h <= 3; ++h) CHECK(g.at(w, h)[0] == w * 10.0 + h);
  }
  SUBCASE("identical observations") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::vector<ScatterPoint> pts;
    for (int i = 0; i < 30; ++i) pts.push_back({u(rng), u(rng), {2.5, -1.0}});
    const Grid g = bin_scatter_to_grid(pts, {5, 6}, 4);
    for (int w = 1; w <= 5; ++w)
      for (int h = 1; h <= 6; ++h) {
        CHECK(g.at(w, h)[0] == doctest::Approx(2.5));
        CHECK(g.at(w, h)[1] == doctest::Approx(-1.0));
      }
  }
  SUBCASE("random points against an all-pairs sort") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> ux(0.0, 24.0), uy(-90.0, 90.0), uo(0.0, 1.0);
    std::vector<ScatterPoint> pts;
    for (int i = 0; i < 40; ++i) pts.push_back({ux(rng), uy(rng), {uo(rng), uo(rng)}});
    const Grid g = bin_scatter_to_grid(pts, {5, 5}, 3);
    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& p : pts) {
      x0 = std::min(x0, p.cx);
      x1 = std::max(x1, p.cx);
      y0 = std::min(y0, p.cy);
      y1 = std::max(y1, p.cy);
    }
    for (int w = 1; w <= 5; ++w)
      for (int h = 1; h <= 5; ++h) {
        const double cx = x0 + (w - 0.5) / 5.0 * (x1 - x0), cy = y0 + (h - 0.5) / 5.0 * (y1 - y0);
        std::vector<std::size_t> order(pts.size());
        std::iota(order.begin(), order.end(), 0);
        const auto d = [&](std::size_t i) {
          const double dx = (pts[i].cx - cx) / (x1 - x0), dy = (pts[i].cy - cy) / (y1 - y0);
          return dx * dx + dy * dy;
        };
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return d(a) < d(b); });
        for (int k = 0; k < 2; ++k) {
          const double want = (pts[order[0]].obs[k] + pts[order[1]].obs[k] + pts[order[2]].obs[k]) / 3.0;
          CHECK(g.at(w, h)[k] == doctest::Approx(want).epsilon(1e-12));
        }
      }
  }
  SUBCASE("errors") {
    std::vector<ScatterPoint> pts{{0.0, 0.0, {1.0}}, {1.0, 1.0, {1.0}}};
    CHECK_THROWS_AS(bin_scatter_to_grid(pts, {2, 2}, 3), std::invalid_argument);
    CHECK_THROWS_AS(bin_scatter_to_grid({}, {2, 2}, 1), std::invalid_argument);
    std::vector<ScatterPoint> flat{{0.0, 1.0, {1.0}}, {1.0, 1.0, {1.0}}};
    CHECK_THROWS_AS(bin_scatter_to_grid(flat, {2, 2}, 1), std::invalid_argument);
  }
}

TEST_CASE("split_rect keeps global coordinates") {
  const auto q = split_rect(Rect{11, 20, 5, 12}, {3, 2});
  REQUIRE(q[2]);
  CHECK(*q[2] == Rect{11, 13, 5, 6});
  CHECK(*q[0] == Rect{14, 20, 7, 12});
  const auto b = split_rect(Rect{11, 20, 5, 12}, {10, 8});
  CHECK(b[2]);
  CHECK_FALSE(b[0]);
  CHECK_FALSE(b[1]);
  CHECK_FALSE(b[3]);
}
