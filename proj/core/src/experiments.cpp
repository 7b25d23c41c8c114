#include "changeprop/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <thread>

#include "changeprop/decomposition.hpp"
#include "changeprop/error.hpp"
#include "changeprop/log_math.hpp"

namespace changeprop {

namespace {

template <class F>
void parallel_for(std::int64_t n, int threads, F&& body) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<std::int64_t>(threads, std::max<std::int64_t>(n, 1)));
  if (threads <= 1) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      const std::int64_t lo = n * t / threads;
      const std::int64_t hi = n * (t + 1) / threads;
      for (std::int64_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

double nan() { return std::numeric_limits<double>::quiet_NaN(); }

}  // namespace

std::vector<RunResult> sweep_thresholds(DetectorKind kind, const ChangeModel& model,
                                        const ObservationModel& obs,
                                        std::span<const double> thresholds,
                                        std::int64_t n_trials, std::uint64_t seed,
                                        std::int64_t k_max, int threads) {
  if (n_trials < kMinTrials) throw Error(ErrorCode::OutOfRange, "need at least 1000 trials");
  const std::size_t m = thresholds.size();

  // Run the thresholds in ascending order; map results back afterwards.
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return thresholds[a] < thresholds[b]; });
  std::vector<double> sorted(m);
  std::vector<std::int64_t> caps(m);
  for (std::size_t i = 0; i < m; ++i) {
    sorted[i] = thresholds[order[i]];
    caps[i] = k_max > 0 ? k_max : default_k_max(model, obs, sorted[i]);
  }

  const auto n = static_cast<std::size_t>(n_trials);
  std::vector<StopOutcome> outcomes(n * m);
  parallel_for(n_trials, threads, [&](std::int64_t t) {
    Stream rng = Stream::derive(seed, static_cast<std::uint64_t>(t));
    run_detector_multi(kind, sorted, caps, model, obs, rng,
                       std::span<StopOutcome>(outcomes).subspan(static_cast<std::size_t>(t) * m, m));
  });

  std::vector<RunResult> results(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::int64_t false_alarms = 0, censored = 0;
    // Delays are integers: exact sums make the estimate order-independent.
    std::int64_t sum = 0, sum_sq = 0;
    for (std::size_t t = 0; t < n; ++t) {
      const StopOutcome& o = outcomes[t * m + i];
      if (o.tau < o.gamma1) ++false_alarms;
      if (o.stopped_by_cap) ++censored;
      const std::int64_t d = std::max<std::int64_t>(0, o.tau - o.gamma1);
      sum += d;
      sum_sq += d * d;
    }
    RunResult r;
    r.spec = DetectorSpec{kind, sorted[i]};
    r.alpha = nan();
    r.trials = n_trials;
    r.seed = seed;
    r.k_max = caps[i];
    r.censored = censored;
    const double nn = static_cast<double>(n_trials);
    r.p_fa = static_cast<double>(false_alarms) / nn;
    r.p_fa_se = std::sqrt(r.p_fa * (1.0 - r.p_fa) / nn);
    r.e_dd = static_cast<double>(sum) / nn;
    const long double var =
        (static_cast<long double>(sum_sq) - static_cast<long double>(sum) * static_cast<long double>(sum) / nn) /
        (nn - 1.0);
    r.e_dd_se = std::sqrt(static_cast<double>(std::max<long double>(var, 0.0L)) / nn);
    if (static_cast<double>(censored) > kMaxCensorFraction * nn) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%lld of %lld trials censored at A = %.6g (k_max = %lld)",
                    static_cast<long long>(censored), static_cast<long long>(n_trials), sorted[i],
                    static_cast<long long>(caps[i]));
      throw Error(ErrorCode::ExcessCensoring, buf);
    }
    results[order[i]] = r;
  }
  return results;
}

RunResult estimate_performance(const DetectorSpec& spec, const ChangeModel& model,
                               const ObservationModel& obs, std::int64_t n_trials,
                               std::uint64_t seed, std::int64_t k_max, int threads) {
  const double a = spec.A;
  return sweep_thresholds(spec.kind, model, obs, std::span<const double>(&a, 1), n_trials, seed,
                          k_max, threads)
      .front();
}

std::vector<RunResult> sweep_curve(DetectorKind kind, const ChangeModel& model,
                                   const ObservationModel& obs, std::span<const double> alphas,
                                   std::int64_t n_trials, std::uint64_t seed,
                                   std::int64_t k_max, int threads) {
  std::vector<double> thresholds;
  thresholds.reserve(alphas.size());
  for (double a : alphas) thresholds.push_back(threshold_for_alpha(model.disruption_rate(), a));
  auto out = sweep_thresholds(kind, model, obs, thresholds, n_trials, seed, k_max, threads);
  for (std::size_t i = 0; i < out.size(); ++i) out[i].alpha = alphas[i];
  return out;
}

double lower_bound_edd(const ChangeModel& model, const ObservationModel& obs, double alpha) {
  if (model.has_blocking()) {
    throw Error(ErrorCode::DegenerateModel, "lower bound needs every link rho_{l-1,l} > 0");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::OutOfRange, "alpha must lie in (0,1)");
  return threshold_for_alpha(model.disruption_rate(), alpha) * asymptotic_slope(model, obs);
}

double asymptotic_slope(const ChangeModel& model, const ObservationModel& obs) {
  return 1.0 / (model.sensors() * obs.kl_divergence() + std::abs(std::log1p(-model.disruption_rate())));
}

double measured_slope(const RunResult& a, const RunResult& b) {
  return (b.e_dd - a.e_dd) / (std::abs(std::log(b.alpha)) - std::abs(std::log(a.alpha)));
}

ConditionFiveReport check_condition_five(const ChangeModel& model, const ObservationModel& obs) {
  const int n = model.sensors();
  ConditionFiveReport rep;
  rep.D = obs.kl_divergence();
  auto one_minus = [&](int p) { return 1.0 - model.link(p + 1); };  // 1 - rho_{p,p+1}

  bool prefix = true;
  rep.guaranteed = 1;
  for (int l = 2; l <= n; ++l) {
    double mass = 0.0;
    for (int p = 0; p < l; ++p) mass += one_minus(p);
    ConditionFiveEntry e;
    e.l = l;
    e.best_margin = -std::numeric_limits<double>::infinity();
    for (int j = l; j <= n; ++j) {
      const double rhs = std::log(mass / one_minus(j)) / (j - l + 1);
      const double margin = rep.D - rhs;
      e.best_margin = std::max(e.best_margin, margin);
      if (margin > 0.0 && e.witness_j == 0) e.witness_j = j;
    }
    e.satisfied = e.witness_j != 0;
    if (prefix && e.satisfied) {
      rep.guaranteed = l;
    } else {
      prefix = false;
    }
    rep.entries.push_back(e);
  }

  rep.gamma_u = kNegInf;
  for (int l = 1; l <= n - 1; ++l) {
    double mass = 0.0;
    for (int p = 0; p <= l; ++p) mass += one_minus(p);
    double best = std::numeric_limits<double>::infinity();
    for (int j = l + 1; j <= n; ++j) {
      best = std::min(best, std::log(mass / one_minus(j)) / (j - l));
    }
    rep.gamma_u = std::max(rep.gamma_u, best);
  }
  return rep;
}

GammaTable estimate_gamma_table(const ChangeModel& model, const ObservationModel& obs, int horizon,
                                int n_paths, std::uint64_t seed) {
  if (!model.interior()) {
    throw Error(ErrorCode::ParamOnBoundary, "gamma estimation needs every link strictly inside (0,1)");
  }
  if (horizon < 1 || n_paths < 2) throw Error(ErrorCode::OutOfRange, "need horizon >= 1 and >= 2 paths");
  const int n = model.sensors();
  GammaTable tab;
  tab.sensors = n;
  tab.horizon = horizon;
  tab.paths = n_paths;
  if (n < 2) return tab;

  // Per path: time-averaged log(1+zeta_{m,j+1}) - log(1+zeta_{m,l}) and
  // log(B_{m+1,1,l} / Lambda_{m+1,l}), m = 0..horizon-1.
  const auto np = static_cast<std::size_t>(n_paths);
  const auto dim = static_cast<std::size_t>(n - 1);
  std::vector<std::vector<double>> gam(np), jen(np);
  for (int path = 0; path < n_paths; ++path) {
    Stream rng = Stream::derive(seed, static_cast<std::uint64_t>(path));
    std::vector<std::int64_t> gamma(static_cast<std::size_t>(n), 0);
    for (int l = 1; l < n; ++l) {
      gamma[static_cast<std::size_t>(l)] = gamma[static_cast<std::size_t>(l - 1)] + rng.geometric(model.rho()[static_cast<std::size_t>(l)]);
    }
    DecompositionTracker tracker(model);
    std::vector<double> llr(static_cast<std::size_t>(n));
    std::vector<double> log1p_zeta(static_cast<std::size_t>(n));
    std::vector<double> sum_ratio(dim * dim, 0.0), sum_jensen(dim, 0.0);
    for (int m = 0; m < horizon; ++m) {
      for (int l = 0; l < n; ++l) {
        const bool post = m + 1 >= gamma[static_cast<std::size_t>(l)];
        llr[static_cast<std::size_t>(l)] = obs.log_likelihood_ratio(obs.sample(post, rng));
      }
      tracker.step(llr);
      const auto lz = tracker.log_zeta();
      for (int l = 2; l <= n + 1; ++l) log1p_zeta[static_cast<std::size_t>(l - 2)] = log1p_exp(lz[static_cast<std::size_t>(l - 2)]);
      double cum = 0.0;
      for (int l = 2; l <= n; ++l) {
        cum += llr[static_cast<std::size_t>(l - 2)];
        const auto li = static_cast<std::size_t>(l - 2);
        sum_jensen[li] += tracker.log_B()[0][static_cast<std::size_t>(l - 1)] - cum;
        for (int j = l; j <= n; ++j) {
          sum_ratio[li * dim + static_cast<std::size_t>(j - l)] +=
              log1p_zeta[static_cast<std::size_t>(j - 1)] - log1p_zeta[li];
        }
      }
    }
    for (std::size_t i = 0; i < dim; ++i) {
      jen[static_cast<std::size_t>(path)].push_back(sum_jensen[i] / horizon);
    }
    auto& row = gam[static_cast<std::size_t>(path)];
    for (std::size_t i = 0; i < dim * dim; ++i) row.push_back(sum_ratio[i] / horizon);
  }

  auto summarize = [&](auto get) {
    double s = 0.0, ss = 0.0;
    for (std::size_t p = 0; p < np; ++p) s += get(p);
    const double mean = s / n_paths;
    for (std::size_t p = 0; p < np; ++p) ss += (get(p) - mean) * (get(p) - mean);
    return Estimate{mean, std::sqrt(ss / (n_paths - 1) / n_paths)};
  };
  tab.gamma.resize(dim);
  tab.jensen.resize(dim);
  for (int l = 2; l <= n; ++l) {
    const auto li = static_cast<std::size_t>(l - 2);
    tab.jensen[li] = summarize([&](std::size_t p) { return jen[p][li]; });
    for (int j = l; j <= n; ++j) {
      const std::size_t k = li * dim + static_cast<std::size_t>(j - l);
      tab.gamma[li].push_back(summarize([&](std::size_t p) { return gam[p][k]; }));
    }
  }
  return tab;
}

Estimate estimate_gamma(const ChangeModel& model, const ObservationModel& obs, int l, int j,
                        int horizon, int n_paths, std::uint64_t seed) {
  if (l < 2 || j < l || j > model.sensors()) {
    throw Error(ErrorCode::IndexError, "gamma_{l,j} needs 2 <= l <= j <= L");
  }
  return estimate_gamma_table(model, obs, horizon, n_paths, seed).at(l, j);
}

EllStarResult estimate_ell_star(const ChangeModel& model, const ObservationModel& obs,
                                int horizon, int n_paths, std::uint64_t seed) {
  const int n = model.sensors();
  EllStarResult res;
  res.ell_star = n + 1;
  if (n < 2) return res;
  res.table = estimate_gamma_table(model, obs, horizon, n_paths, seed);
  const double D = obs.kl_divergence();
  auto one_minus = [&](int p) { return 1.0 - model.link(p + 1); };

  bool found = false;
  for (int l = 2; l <= n; ++l) {
    bool all_nonpositive = true;
    bool close = false;
    for (int j = l; j <= n; ++j) {
      DeltaEntry e;
      e.l = l;
      e.j = j;
      const Estimate g = res.table.at(l, j);
      e.delta.mean = std::log(one_minus(j) / one_minus(l - 1)) + (j - l + 1) * D + g.mean;
      e.delta.se = g.se;
      const Estimate jen = res.table.jensen[static_cast<std::size_t>(l - 2)];
      e.jensen_bound = (j - l + 1) * D + std::log(one_minus(j)) - jen.mean;
      e.jensen_se = jen.se;
      if (e.delta.mean > 0.0) all_nonpositive = false;
      if (std::abs(e.delta.mean) <= 3.0 * e.delta.se) close = true;
      res.deltas.push_back(e);
    }
    if (!found) {
      // Every Delta in this row bears on whether l is the answer.
      if (close) res.inconclusive = true;
      if (all_nonpositive) {
        res.ell_star = l;
        found = true;
      }
    }
  }
  return res;
}

std::string csv_header() { return "detector,alpha,A,trials,p_fa,p_fa_se,e_dd,e_dd_se,censored,seed"; }

std::string csv_row(const RunResult& r) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g,%lld,%.10g,%.10g,%.10g,%.10g,%lld,%llu",
                std::string(to_string(r.spec.kind)).c_str(), r.alpha, r.spec.A,
                static_cast<long long>(r.trials), r.p_fa, r.p_fa_se, r.e_dd, r.e_dd_se,
                static_cast<long long>(r.censored), static_cast<unsigned long long>(r.seed));
  return buf;
}

}  // namespace changeprop
