#include "doctest.h"

#include <cmath>
#include <limits>

#include "changeprop/error.hpp"
#include "changeprop/experiments.hpp"

using namespace changeprop;

TEST_CASE("formulas") {
  auto m = ChangeModel::validate(2, {0.001, 0.1});
  GaussianShiftModel o(1.0);
  CHECK(lower_bound_edd(m, o, 1e-3) == doctest::Approx(13.8155 / (1.0 + 0.0010005)).epsilon(1e-4));
  CHECK(asymptotic_slope(m, o) == doctest::Approx(0.99900).epsilon(1e-5));
  auto m1 = ChangeModel::validate(1, {0.001});
  CHECK(asymptotic_slope(m1, o) == doctest::Approx(1.0 / (0.5 + std::abs(std::log(0.999)))));
  CHECK(lower_bound_edd(ChangeModel::validate(3, {0.001, 0.1, 0.1}), o, 1e-3) < lower_bound_edd(m, o, 1e-3));
  CHECK(asymptotic_slope(m, GaussianShiftModel(1.5)) < asymptotic_slope(m, o));
  CHECK_THROWS_AS(lower_bound_edd(ChangeModel::validate(2, {0.001, 0.0}), o, 1e-3), Error);
}

TEST_CASE("condition five on the five-sensor array") {
  auto m = ChangeModel::validate(5, {0.005, 0.1, 0.2, 0.5, 0.7});
  auto rep = check_condition_five(m, GaussianShiftModel(0.75));
  CHECK(rep.guaranteed == 2);
  REQUIRE(rep.entries.size() == 4);
  CHECK(rep.entries[0].satisfied);
  CHECK(rep.entries[0].witness_j == 5);
  CHECK_FALSE(rep.entries[1].satisfied);
  CHECK(rep.gamma_u > rep.D);

  // rho >= sum of (1 - links): gamma_u <= 0.
  auto easy = ChangeModel::validate(3, {0.3, 0.9, 0.95});
  CHECK(check_condition_five(easy, GaussianShiftModel(0.1)).gamma_u <= 0.0);
  auto single = check_condition_five(ChangeModel::validate(1, {0.1}), GaussianShiftModel(1.0));
  CHECK(single.guaranteed == 1);
  CHECK(single.entries.empty());
}

TEST_CASE("monte carlo basics") {
  auto m = ChangeModel::validate(2, {0.05, 0.3});
  GaussianShiftModel o(1.0);
  auto r = estimate_performance({DetectorKind::NuA, -std::numeric_limits<double>::infinity()}, m, o, 20000, 3);
  CHECK(std::abs(r.p_fa - 0.95) <= 3 * r.p_fa_se);
  CHECK(r.e_dd == 0.0);

  const double A = threshold_for_alpha(0.05, 0.01);
  auto a = estimate_performance({DetectorKind::NuA, A}, m, o, 20000, 3, 0, 1);
  auto b = estimate_performance({DetectorKind::NuA, A}, m, o, 20000, 3, 0, 4);
  CHECK(csv_row(a) == csv_row(b));
  CHECK(a.p_fa <= 0.01 + 3 * a.p_fa_se);
  CHECK(a.p_fa <= 1.0 / (1.0 + 0.05 * std::exp(A)) + 3 * a.p_fa_se);

  CHECK_THROWS_AS(estimate_performance({DetectorKind::NuA, A}, m, o, 10, 3), Error);
  try {
    estimate_performance({DetectorKind::NuA, 30.0}, m, o, 2000, 3, 2);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ExcessCensoring);
  }
}

TEST_CASE("sweep is monotone in the threshold") {
  auto m = ChangeModel::validate(2, {0.02, 0.3});
  GaussianShiftModel o(1.0);
  const std::vector<double> alphas{1e-1, 1e-2, 1e-3};
  auto rs = sweep_curve(DetectorKind::NuA, m, o, alphas, 5000, 11);
  for (std::size_t i = 1; i < rs.size(); ++i) {
    CHECK(rs[i].e_dd >= rs[i - 1].e_dd);
    CHECK(rs[i].p_fa <= rs[i - 1].p_fa);
    CHECK(rs[i].alpha == alphas[i]);
  }
  CHECK(csv_header() == "detector,alpha,A,trials,p_fa,p_fa_se,e_dd,e_dd_se,censored,seed");
}

TEST_CASE("gamma estimation") {
  auto m = ChangeModel::validate(3, {0.01, 0.3, 0.5});
  GaussianShiftModel o(1.0);
  auto tab = estimate_gamma_table(m, o, 500, 20, 4);
  REQUIRE(tab.gamma.size() == 2);
  auto res = estimate_ell_star(m, o, 500, 20, 4);
  for (const auto& d : res.deltas) CHECK(d.delta.mean >= d.jensen_bound - 1e-9);
  CHECK(res.ell_star >= 2);
  CHECK(res.ell_star <= 4);
  CHECK(estimate_ell_star(ChangeModel::validate(1, {0.1}), o, 10, 2, 1).ell_star == 2);
  CHECK_THROWS_AS(estimate_gamma_table(ChangeModel::validate(2, {0.1, 1.0}), o, 10, 2, 1), Error);
  auto g = estimate_gamma(m, o, 2, 3, 500, 20, 4);
  CHECK(g.mean == tab.at(2, 3).mean);
}
