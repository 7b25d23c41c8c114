#include "doctest.h"

#include <cmath>

#include "changeprop/error.hpp"
#include "changeprop/obs_model.hpp"

using namespace changeprop;

TEST_CASE("log-likelihood ratio and divergence") {
  GaussianShiftModel g(1.0);
  CHECK(g.log_likelihood_ratio(0.5) == 0.0);
  CHECK(g.log_likelihood_ratio(1.5) == doctest::Approx(1.0));
  CHECK(GaussianShiftModel(1.0).kl_divergence() == 0.5);
  CHECK(GaussianShiftModel(0.75).kl_divergence() == 0.28125);
  CHECK(GaussianShiftModel(1.2).kl_divergence() == doctest::Approx(0.72).epsilon(1e-15));
  CHECK_THROWS_AS(GaussianShiftModel(std::nan("")), Error);
}

TEST_CASE("sampling moments") {
  GaussianShiftModel g(1.0);
  Stream rng(5);
  const int n = 1000000;
  double pre = 0.0, post = 0.0, llr = 0.0, inv = 0.0, inv_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    pre += g.sample(false, rng);
    const double z = g.sample(true, rng);
    post += z;
    const double l = g.log_likelihood_ratio(z);
    llr += l;
    inv += std::exp(-l);
    inv_sq += std::exp(-2 * l);
  }
  const double se = 1.0 / std::sqrt(double(n));
  CHECK(std::abs(pre / n) < 4 * se);
  CHECK(std::abs(post / n - 1.0) < 4 * se);
  CHECK(std::abs(llr / n - 0.5) < 4 * se);  // sd of log L under f1 is theta
  const double m = inv / n;
  const double sd = std::sqrt(inv_sq / n - m * m);
  CHECK(std::abs(m - 1.0) < 4 * sd / std::sqrt(double(n)));
}
