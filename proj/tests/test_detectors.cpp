#include "doctest.h"

#include <cmath>
#include <limits>

#include "changeprop/belief.hpp"
#include "changeprop/detectors.hpp"
#include "changeprop/error.hpp"

using namespace changeprop;

TEST_CASE("threshold formula") {
  CHECK(threshold_for_alpha(0.001, 1e-3) == doctest::Approx(std::log(1e6)));
  CHECK(threshold_for_alpha(0.5, 1.0) == doctest::Approx(std::log(2.0)));
  CHECK_THROWS_AS(threshold_for_alpha(0.5, 0.0), Error);
  CHECK_THROWS_AS(threshold_for_alpha(1.0, 0.1), Error);
  CHECK_THROWS_AS(threshold_for_alpha(0.5, 1.5), Error);
}

TEST_CASE("names") {
  CHECK(parse_detector("nu_a") == DetectorKind::NuA);
  CHECK(parse_detector("single") == DetectorKind::SingleSensor);
  CHECK(parse_detector("mismatched") == DetectorKind::Mismatched);
  CHECK_THROWS_AS(parse_detector("cusum"), Error);
}

TEST_CASE("minus infinity stops at zero") {
  auto m = ChangeModel::validate(2, {0.01, 0.3});
  GaussianShiftModel o(1.0);
  for (auto kind : {DetectorKind::NuA, DetectorKind::SingleSensor, DetectorKind::Mismatched}) {
    Stream rng(1);
    auto out = run_detector({kind, -std::numeric_limits<double>::infinity()}, m, o, rng, 1);
    CHECK(out.tau == 0);
    CHECK_FALSE(out.stopped_by_cap);
  }
}

TEST_CASE("nu_A with coincident links tracks the mismatched test") {
  auto m = ChangeModel::validate(3, {0.01, 1.0, 1.0});
  GaussianShiftModel o(1.0);
  for (std::uint64_t s = 0; s < 300; ++s) {
    Stream a = Stream::derive(5, s), b = Stream::derive(5, s);
    auto x = run_detector({DetectorKind::NuA, 9.0}, m, o, a, 500);
    auto y = run_detector({DetectorKind::Mismatched, 9.0}, m, o, b, 500);
    REQUIRE(x.tau == y.tau);
    REQUIRE(x.gamma1 == y.gamma1);
  }
}

TEST_CASE("single sensor ignores downstream links") {
  GaussianShiftModel o(1.0);
  auto m1 = ChangeModel::validate(3, {0.02, 0.1, 0.9});
  auto m2 = ChangeModel::validate(3, {0.02, 0.7, 0.3});
  for (std::uint64_t s = 0; s < 300; ++s) {
    Stream a = Stream::derive(9, s), b = Stream::derive(9, s);
    auto x = run_detector({DetectorKind::SingleSensor, 7.0}, m1, o, a, 500);
    auto y = run_detector({DetectorKind::SingleSensor, 7.0}, m2, o, b, 500);
    REQUIRE(x.tau == y.tau);
  }
}

TEST_CASE("larger threshold never stops earlier; multi equals single runs") {
  auto m = ChangeModel::validate(2, {0.01, 0.2});
  GaussianShiftModel o(1.0);
  const std::vector<double> thr{2.0, 5.0, 8.0, 12.0};
  const std::vector<std::int64_t> caps{50, 60, 70, 80};
  for (auto kind : {DetectorKind::NuA, DetectorKind::SingleSensor, DetectorKind::Mismatched}) {
    for (std::uint64_t s = 0; s < 200; ++s) {
      std::vector<StopOutcome> multi(thr.size());
      Stream r = Stream::derive(1, s);
      run_detector_multi(kind, thr, caps, m, o, r, multi);
      for (std::size_t i = 0; i < thr.size(); ++i) {
        Stream r1 = Stream::derive(1, s);
        auto one = run_detector({kind, thr[i]}, m, o, r1, caps[i]);
        REQUIRE(one.tau == multi[i].tau);
        REQUIRE(one.stopped_by_cap == multi[i].stopped_by_cap);
        if (i > 0 && !multi[i].stopped_by_cap) CHECK(multi[i].tau >= multi[i - 1].tau);
        CHECK(multi[i].tau <= multi[i].gamma1 + caps[i]);
      }
    }
  }
}

TEST_CASE("q-space and p-space stopping rules agree along a path") {
  auto m = ChangeModel::validate(2, {0.01, 0.3});
  GaussianShiftModel o(1.0);
  BeliefEngine e(m);
  auto b = e.initial();
  Stream rng(2);
  const double A = 6.0;
  for (int k = 0; k < 400; ++k) {
    std::vector<double> llr{o.log_likelihood_ratio(o.sample(k > 150, rng)), o.log_likelihood_ratio(o.sample(k > 160, rng))};
    e.advance(b, llr);
    const bool q_stop = BeliefEngine::statistic(b) >= A;
    const bool p_stop = p_from_q(b).p[0] <= 1.0 / (1.0 + 0.01 * std::exp(A));
    CHECK(q_stop == p_stop);
  }
}

TEST_CASE("default budget") {
  auto m = ChangeModel::validate(2, {0.001, 0.1});
  GaussianShiftModel o(1.0);
  const double A = threshold_for_alpha(0.001, 1e-3);
  const double expect = std::ceil(12.0 * (A + std::abs(std::log(0.001))) / (0.5 + std::abs(std::log1p(-0.001))));
  CHECK(default_k_max(m, o, A) == static_cast<std::int64_t>(expect));
  CHECK(default_k_max(m, o, -std::numeric_limits<double>::infinity()) == 1);
}
