#include <doctest.h>

#include <cmath>
#include <random>

#include "anisoflow/errors.hpp"
#include "anisoflow/grid.hpp"
#include "oracles.hpp"

using namespace anisoflow;
using doctest::Approx;

TEST_CASE("grid geometry") {
  const Grid g(Eigen::Vector2d(2.0, 1.0), Eigen::Vector2i(21, 17));
  CHECK(g.dim() == 2);
  CHECK(g.size() == 21 * 17);
  CHECK(g.spacing(0) == Approx(0.2));
  CHECK(g.spacing(1) == Approx(0.125));
  CHECK(g.cell_volume() == Approx(0.025));
  CHECK(g.coordinate(0, 0) == -2.0);
  CHECK(g.coordinate(0, 20) == 2.0);
  CHECK(g.coordinate(0, 10) == 0.0);
  CHECK(g.stride(1) == 1);
  CHECK(g.stride(0) == 17);
  for (int i = 0; i < 21; ++i) CHECK(g.coordinate(0, i) == -g.coordinate(0, 20 - i));
}

TEST_CASE("grid rejects too few nodes and non-positive extents") {
  CHECK_THROWS_AS(Grid::uniform(1, 1.0, 15), ValidationError);
  CHECK_THROWS_AS(Grid::uniform(1, 0.0, 20), ValidationError);
  CHECK_THROWS_AS(Grid(Eigen::Vector2d(1.0, 1.0), Eigen::Vector3i(20, 20, 20)), ValidationError);
}

TEST_CASE("flat and multi index round trip") {
  const Grid g(Eigen::Vector3d(1.0, 2.0, 3.0), Eigen::Vector3i(16, 17, 19));
  auto gen = oracle::rng(3);
  std::uniform_int_distribution<Eigen::Index> d(0, g.size() - 1);
  for (int trial = 0; trial < 500; ++trial) {
    const Eigen::Index k = d(gen);
    const Eigen::VectorXi idx = g.multi_index(k);
    CHECK(g.flat_index(idx) == k);
    const Eigen::VectorXd x = g.point(k);
    for (int a = 0; a < 3; ++a) CHECK(x[a] == g.coordinate(a, idx[a]));
  }
}

TEST_CASE("mass of a sampled constant and of a separable polynomial") {
  const Grid g(Eigen::Vector2d(1.0, 2.0), Eigen::Vector2i(41, 81));
  const GridField one = sample(g, [](const Eigen::VectorXd&, double) { return 1.0; }, 0.0);
  // Riemann sum over nodes: n_i h_i per axis.
  CHECK(mass(one) == Approx(41 * 0.05 * 81 * 0.05));
  const GridField neg(g, Eigen::ArrayXd::Constant(g.size(), -2.0), 0.0);
  CHECK(l1_norm(neg) == Approx(2 * mass(one)));
  CHECK(mass(neg) == Approx(-2 * mass(one)));
}

TEST_CASE("support box of a compactly supported field") {
  const Grid g = Grid::uniform(2, 4.0, 81);
  const GridField f = sample(
      g, [](const Eigen::VectorXd& x, double) { return std::abs(x[0]) <= 1.0 && std::abs(x[1]) <= 0.5 ? 1.0 : 0.0; },
      0.0);
  const SupportBox box = support_box(f, 0.5);
  REQUIRE_FALSE(box.empty);
  CHECK(box.half_width[0] == Approx(1.0));
  CHECK(box.half_width[1] == Approx(0.5));
  CHECK(box.cells_to_boundary(g) == 30);
  CHECK(support_box_relative(GridField(g, 0.0)).empty);
}

TEST_CASE("multilinear interpolation is exact on bilinear functions and zero outside") {
  const Grid g(Eigen::Vector2d(1.0, 1.0), Eigen::Vector2i(17, 23));
  auto bilinear = [](const Eigen::VectorXd& x, double) { return 1.0 + 2.0 * x[0] - x[1] + 0.5 * x[0] * x[1]; };
  const GridField f = sample(g, bilinear, 0.0);
  auto gen = oracle::rng(9);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const Eigen::Vector2d x(d(gen), d(gen));
    CHECK(interpolate(f, x) == Approx(bilinear(x, 0.0)).epsilon(1e-12));
  }
  CHECK(interpolate(f, Eigen::Vector2d(1.5, 0.0)) == 0.0);
  CHECK(interpolate(f, Eigen::Vector2d(1.0, 1.0)) == Approx(bilinear(Eigen::Vector2d(1.0, 1.0), 0.0)));
}

TEST_CASE("scaled grid keeps node counts") {
  const Grid g(Eigen::Vector2d(1.0, 2.0), Eigen::Vector2i(20, 30));
  const Grid s = g.scaled(Eigen::Vector2d(2.0, 0.5));
  CHECK(s.nodes() == g.nodes());
  CHECK(s.half_width()[0] == Approx(2.0));
  CHECK(s.half_width()[1] == Approx(1.0));
  CHECK_FALSE(s == g);
  CHECK(g.scaled(Eigen::Vector2d(1.0, 1.0)) == g);
}
