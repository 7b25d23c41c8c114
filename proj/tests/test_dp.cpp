#include "doctest.h"

#include <cmath>
#include <numbers>

#include "changeprop/dp.hpp"
#include "changeprop/error.hpp"
#include "changeprop/quadrature.hpp"

using namespace changeprop;

TEST_CASE("Gauss-Hermite moments") {
  auto gh = gauss_hermite(32);
  REQUIRE(gh.nodes.size() == 32);
  double m0 = 0, m2 = 0, m4 = 0, m1 = 0;
  for (std::size_t i = 0; i < 32; ++i) {
    m0 += gh.weights[i];
    m1 += gh.weights[i] * gh.nodes[i];
    m2 += gh.weights[i] * gh.nodes[i] * gh.nodes[i];
    m4 += gh.weights[i] * std::pow(gh.nodes[i], 4);
  }
  const double sp = std::sqrt(std::numbers::pi);
  CHECK(m0 == doctest::Approx(sp).epsilon(1e-13));
  CHECK(std::abs(m1) < 1e-13);
  CHECK(m2 == doctest::Approx(sp / 2).epsilon(1e-12));
  CHECK(m4 == doctest::Approx(3 * sp / 4).epsilon(1e-12));
  auto g3 = gauss_hermite(3);
  CHECK(g3.nodes[2] == doctest::Approx(std::sqrt(1.5)));
  CHECK(g3.weights[1] == doctest::Approx(2 * sp / 3));
}

TEST_CASE("grid construction") {
  CHECK_THROWS_AS(SimplexGrid::make(2, 0.2), Error);
  try {
    SimplexGrid::make(2, 0.2);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridTooCoarse);
  }
  auto g = SimplexGrid::make(2, 0.1);
  CHECK(g.size() == 66);
  for (std::size_t i = 0; i < g.size(); ++i) {
    auto p = g.node(i);
    CHECK(std::abs(p[0] + p[1] + p[2] - 1.0) < 1e-12);
  }
  // Interpolation reproduces affine functions.
  std::vector<double> f(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = 0.3 + 2 * g.node(i)[0] - g.node(i)[1];
  std::vector<double> p{0.123, 0.456, 0.421};
  CHECK(g.interpolate(f, p) == doctest::Approx(0.3 + 2 * 0.123 - 0.456).epsilon(1e-12));
  auto g1 = SimplexGrid::make(1, 0.05);
  CHECK(g1.size() == 21);
}

TEST_CASE("terminal stage and structure at L = 2") {
  auto m = ChangeModel::validate(2, {0.05, 0.3});
  GaussianShiftModel o(1.0);
  auto grid = SimplexGrid::make(2, 0.05);
  const double c = 0.1;
  auto seq = value_iterate(m, o, c, grid, 40);
  const auto& last = seq[39];
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    worst = std::max(worst, std::abs(last.A[i] - grid.node(i)[0] * (1 - 0.05)));
  }
  CHECK(worst < 1e-3);
  auto inv = check_invariants(seq, grid);
  CHECK(inv.worst_range <= 0.0);
  CHECK(inv.worst_face <= 1e-3);
  CHECK(inv.worst_min_branch <= 0.0);
  CHECK(inv.worst_horizon <= 2 * grid.step() + 1e-3);
  Stream rng(1);
  auto conc = check_concavity(seq.front(), grid, 2000, rng);
  CHECK(conc.violations == 0);
  auto term = check_concavity(seq.back(), grid, 2000, rng);
  CHECK(term.worst < 1e-12);

  auto lab = extract_stop_region(seq.front(), grid);
  for (const auto& n : lab) {
    if (n.p[0] == 0.0) CHECK(n.stop);
    if (n.p[0] == 1.0) CHECK_FALSE(n.stop);
  }
}

TEST_CASE("J_{T-1} kink at c/(c+rho) for L = 1") {
  auto m = ChangeModel::validate(1, {0.2});
  GaussianShiftModel o(1.0);
  auto grid = SimplexGrid::make(1, 0.01);
  const double c = 0.05;
  auto seq = value_iterate(m, o, c, grid, 1);
  auto b = stop_boundary(seq.front(), grid);
  REQUIRE(b.size() == 1);
  CHECK(std::abs(b[0].p1 - c / (c + 0.2)) <= grid.step());
}

TEST_CASE("scalar DP stop region is a single threshold") {
  GaussianShiftModel o(1.0);
  auto grid = SimplexGrid::make(1, 0.01);
  for (double c : {0.02, 0.05, 0.2}) {
    auto m = ChangeModel::validate(1, {0.05});
    auto seq = value_iterate(m, o, c, grid, default_horizon(c));
    auto lab = extract_stop_region(seq.front(), grid);
    int switches = 0;
    for (std::size_t i = 1; i < lab.size(); ++i) switches += lab[i].stop != lab[i - 1].stop;
    CHECK(switches == 1);
    CHECK(lab.front().stop);
    CHECK_FALSE(lab.back().stop);
  }
}

TEST_CASE("horizon default") {
  CHECK(default_horizon(0.05) == 400);
  CHECK(default_horizon(0.1) == 200);
  CHECK(default_horizon(0.001) == 400);
}
