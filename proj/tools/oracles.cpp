#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "changeprop/belief.hpp"
#include "changeprop/decomposition.hpp"
#include "changeprop/rng.hpp"

namespace changeprop::oracles {

namespace {

ChangeModel draw_model(int L, Stream& rng, double rho_lo, double rho_span) {
  std::vector<double> rho{rho_lo + rho_span * rng.uniform_open0()};
  for (int l = 1; l < L; ++l) rho.push_back(0.02 + 0.96 * rng.uniform_open0());
  return ChangeModel::validate(L, rho);
}

std::vector<std::int64_t> draw_gamma(const ChangeModel& m, Stream& rng) {
  std::vector<std::int64_t> g{rng.geometric(m.disruption_rate())};
  for (int l = 1; l < m.sensors(); ++l) g.push_back(g.back() + rng.geometric(m.rho()[static_cast<std::size_t>(l)]));
  return g;
}

}  // namespace

OracleResult posterior_vs_enumeration(int draws, int max_k, std::uint64_t seed) {
  OracleResult res;
  for (int L = 1; L <= 3; ++L) {
    for (int d = 0; d < draws; ++d) {
      Stream rng = Stream::derive(seed, static_cast<std::uint64_t>(L * 100000 + d));
      const ChangeModel m = draw_model(L, rng, 0.02, 0.6);
      const GaussianShiftModel obs(0.3 + 1.7 * rng.uniform_open0());
      const auto gamma = draw_gamma(m, rng);
      BeliefState b = init_belief(m);
      std::vector<std::vector<double>> zs;
      for (int k = 1; k <= max_k; ++k) {
        std::vector<double> z;
        for (int l = 0; l < L; ++l) z.push_back(obs.sample(k >= gamma[static_cast<std::size_t>(l)], rng));
        zs.push_back(z);
        b = update(b, m, obs, z);
        const auto p = p_from_q(b);
        const auto bf = brute_force_posterior(m, obs, zs);
        for (std::size_t i = 0; i < p.p.size(); ++i) {
          res.max_abs_error = std::max(res.max_abs_error, std::abs(p.p[i] - bf.p[i]));
        }
        ++res.cases;
      }
    }
  }
  return res;
}

ReductionResult shiryaev_reduction(int steps, std::uint64_t seed) {
  ReductionResult res;
  for (int L = 1; L <= 4; ++L) {
    Stream rng = Stream::derive(seed, static_cast<std::uint64_t>(L));
    std::vector<double> rho(static_cast<std::size_t>(L), 1.0);
    rho[0] = 0.001 + 0.2 * rng.uniform_open0();
    const ChangeModel m = ChangeModel::validate(L, rho);
    const GaussianShiftModel obs(1.0);
    const BeliefEngine engine(m);
    BeliefState b = engine.initial();
    double s = -std::log1p(-rho[0]);
    const std::int64_t change = rng.geometric(rho[0]);
    std::vector<double> llr(static_cast<std::size_t>(L));
    for (int k = 1; k <= steps; ++k) {
      double joint = 0.0;
      for (double& v : llr) {
        v = obs.log_likelihood_ratio(obs.sample(k >= change, rng));
        joint += v;
      }
      engine.advance(b, llr);
      s = shiryaev_update_log(s, joint, rho[0]);
      res.max_drift = std::max(res.max_drift, std::abs(b.log_q[static_cast<std::size_t>(L)] - s));
      ++res.steps;
    }
  }
  return res;
}

DecompositionResult decomposition_identity(int paths, int max_k, std::uint64_t seed) {
  DecompositionResult res;
  res.max_bound_excess = -INFINITY;
  for (int path = 0; path < paths; ++path) {
    Stream rng = Stream::derive(seed, static_cast<std::uint64_t>(path));
    const int L = 1 + path % 4;
    const ChangeModel m = draw_model(L, rng, 0.002, 0.3);
    const GaussianShiftModel obs(0.4 + 1.2 * rng.uniform_open0());
    const auto gamma = draw_gamma(m, rng);
    const int k = 1 + static_cast<int>(rng.uniform_open0() * (max_k - 1));
    std::vector<std::vector<double>> zs;
    for (int t = 1; t <= k; ++t) {
      std::vector<double> z;
      for (int l = 0; l < L; ++l) z.push_back(obs.sample(t >= gamma[static_cast<std::size_t>(l)], rng));
      zs.push_back(z);
    }
    const Decomposition d = decompose(m, obs, zs);
    for (int l = 2; l <= L + 1; ++l) {
      res.max_rel_error = std::max(res.max_rel_error,
                                   std::abs(d.reconstruct(l) - d.recursion.log_q[static_cast<std::size_t>(l - 1)]));
    }
    for (std::size_t mm = 0; mm < d.log_zeta.size(); ++mm) {
      for (std::size_t i = 0; i < d.log_zeta[mm].size(); ++i) {
        // zeta is stored as a log; NaN would mean a negative ratio.
        if (std::isnan(d.log_zeta[mm][i])) res.zeta_nonnegative = false;
        res.max_bound_excess = std::max(res.max_bound_excess, d.log_zeta[mm][i] - d.log_zeta_bound[mm][i]);
      }
    }
    ++res.paths;
  }
  if (res.max_bound_excess == -INFINITY) res.max_bound_excess = 0.0;
  return res;
}

}  // namespace changeprop::oracles
