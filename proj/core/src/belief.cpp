#include "changeprop/belief.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "changeprop/error.hpp"
#include "changeprop/log_math.hpp"

namespace changeprop {

BeliefEngine::BeliefEngine(const ChangeModel& model)
    : sensors_(model.sensors()), log_rho_(std::log(model.disruption_rate())) {
  const int n = sensors_;
  const double rho = model.disruption_rate();
  const double log_one_minus_rho = std::log1p(-rho);

  log_link_.resize(static_cast<std::size_t>(n));
  for (int l = 1; l <= n; ++l) log_link_[static_cast<std::size_t>(l - 1)] = safe_log(model.link(l));
  log_link_[0] = log_rho_;

  log_coef_.resize(static_cast<std::size_t>(n + 1));
  log_coef_[0] = 0.0;
  for (int l = 2; l <= n + 1; ++l) {
    const double r = model.link(l);
    // r == 0 (the observer at infinity) must give exactly -log(1 - rho).
    const double log_one_minus = r == 0.0 ? 0.0 : safe_log(1.0 - r);
    log_coef_[static_cast<std::size_t>(l - 1)] = log_one_minus - log_one_minus_rho;
  }

  // q_{0,l} = prod_{j=1}^{l-2} rho_{j,j+1} (1 - rho_{l-1,l}) / (1 - rho); the
  // rho_{0,1} factor cancels against the 1/rho of the transform.
  log_prior_.resize(static_cast<std::size_t>(n + 1));
  log_prior_[0] = -log_rho_;
  double log_chain = 0.0;
  for (int l = 2; l <= n + 1; ++l) {
    if (l >= 3) log_chain += log_link_[static_cast<std::size_t>(l - 2)];
    log_prior_[static_cast<std::size_t>(l - 1)] = log_chain + log_coef_[static_cast<std::size_t>(l - 1)];
  }
}

BeliefState BeliefEngine::initial() const { return BeliefState{log_prior_, 0}; }

void BeliefEngine::advance(BeliefState& state, std::span<const double> llr) const {
  auto& q = state.log_q;
  // S_1 = q_1 = 1/rho; S_{l+1} = rho_{l-1,l} S_l + q_{l+1} (old values);
  // q_l <- coef_l * prod_{j<l} L_j * S_l. Walking upward lets us overwrite q_l
  // right after S_l is formed.
  double log_s = q[0];
  double cum_llr = 0.0;
  for (int l = 2; l <= sensors_ + 1; ++l) {
    const auto i = static_cast<std::size_t>(l - 1);
    log_s = log_add_exp(log_link_[i - 1] + log_s, q[i]);
    cum_llr += llr[i - 1];
    q[i] = log_coef_[i] + cum_llr + log_s;
  }
  ++state.k;
}

double BeliefEngine::statistic(const BeliefState& state) {
  return log_sum_exp(std::span<const double>(state.log_q).subspan(1));
}

BeliefState init_belief(const ChangeModel& model) { return BeliefEngine(model).initial(); }

BeliefState update(const BeliefState& belief, const ChangeModel& model,
                   const ObservationModel& obs, std::span<const double> z) {
  if (static_cast<int>(z.size()) != model.sensors()) {
    throw Error(ErrorCode::WrongLength, "observation vector length must equal L");
  }
  std::vector<double> llr(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) llr[j] = obs.log_likelihood_ratio(z[j]);
  BeliefState next = belief;
  BeliefEngine(model).advance(next, llr);
  return next;
}

double statistic(const BeliefState& belief) { return BeliefEngine::statistic(belief); }

PosteriorVector p_from_q(const BeliefState& belief) {
  const double log_rho = -belief.log_q[0];
  const double log_p1 = -log1p_exp(log_rho + statistic(belief));
  PosteriorVector out;
  out.p.resize(belief.log_q.size());
  out.p[0] = std::exp(log_p1);
  for (std::size_t l = 1; l < belief.log_q.size(); ++l) {
    out.p[l] = std::exp(log_rho + belief.log_q[l] + log_p1);
  }
  return out;
}

BeliefState q_from_p(const PosteriorVector& posterior, double rho, std::int64_t k) {
  BeliefState out;
  out.k = k;
  out.log_q.resize(posterior.p.size());
  const double log_rho = std::log(rho);
  const double log_p1 = safe_log(posterior.p[0]);
  out.log_q[0] = -log_rho;
  for (std::size_t l = 1; l < posterior.p.size(); ++l) {
    out.log_q[l] = safe_log(posterior.p[l]) - log_rho - log_p1;
  }
  return out;
}

PosteriorVector update_p_direct_llr(const PosteriorVector& posterior, const ChangeModel& model,
                                    std::span<const double> llr) {
  const int n = model.sensors();
  const auto& p = posterior.p;
  // N_l = (1 - rho_{l-1,l}) prod_{j<l} L_j sum_{m<=l} w_m^l p_m, with the
  // weighted sum built as S_{l+1} = rho_{l-1,l} S_l + p_{l+1}. The common
  // prod f0 factor cancels in the normalization. Scale by the largest
  // cumulative log-likelihood to keep the products finite.
  std::vector<double> cum(static_cast<std::size_t>(n + 1), 0.0);
  for (int l = 2; l <= n + 1; ++l) {
    cum[static_cast<std::size_t>(l - 1)] = cum[static_cast<std::size_t>(l - 2)] + llr[static_cast<std::size_t>(l - 2)];
  }
  const double shift = *std::max_element(cum.begin(), cum.end());

  PosteriorVector out;
  out.p.resize(p.size());
  double s = p[0];
  double total = 0.0;
  for (int l = 1; l <= n + 1; ++l) {
    const auto i = static_cast<std::size_t>(l - 1);
    if (l >= 2) s = model.link(l - 1) * s + p[i];
    const double v = (1.0 - model.link(l)) * std::exp(cum[i] - shift) * s;
    out.p[i] = v;
    total += v;
  }
  for (double& v : out.p) v /= total;
  return out;
}

PosteriorVector update_p_direct(const PosteriorVector& posterior, const ChangeModel& model,
                                const ObservationModel& obs, std::span<const double> z) {
  if (static_cast<int>(z.size()) != model.sensors()) {
    throw Error(ErrorCode::WrongLength, "observation vector length must equal L");
  }
  std::vector<double> llr(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) llr[j] = obs.log_likelihood_ratio(z[j]);
  return update_p_direct_llr(posterior, model, llr);
}

double shiryaev_update(double q, double joint_log_lr, double rho) {
  return std::exp(joint_log_lr) / (1.0 - rho) * (1.0 + q);
}

double shiryaev_update_log(double log_q, double joint_log_lr, double rho) {
  // Same operation order as BeliefEngine::advance at the last component so
  // that the all-coincident reduction is bit-for-bit.
  const double log_s = log_add_exp(0.0, log_q);
  return -std::log1p(-rho) + joint_log_lr + log_s;
}

PosteriorVector brute_force_posterior(const ChangeModel& model, const ObservationModel& obs,
                                      const std::vector<std::vector<double>>& z_history) {
  const int n = model.sensors();
  const int k = static_cast<int>(z_history.size());
  if (k > kBruteForceMaxSteps || n > kBruteForceMaxSensors) {
    throw Error(ErrorCode::TooLarge, "enumeration limited to k <= 12 and L <= 3");
  }
  for (const auto& row : z_history) {
    if (static_cast<int>(row.size()) != n) {
      throw Error(ErrorCode::WrongLength, "each observation row must have L entries");
    }
  }

  // suffix[l][g] = sum_{t=max(g,1)}^{k} log L_{t,l}: log-likelihood ratio of
  // sensor l having changed at g, against never changing by k.
  std::vector<std::vector<double>> suffix(static_cast<std::size_t>(n),
                                          std::vector<double>(static_cast<std::size_t>(k + 2), 0.0));
  for (int l = 0; l < n; ++l) {
    auto& s = suffix[static_cast<std::size_t>(l)];
    for (int t = k; t >= 1; --t) {
      s[static_cast<std::size_t>(t)] =
          s[static_cast<std::size_t>(t + 1)] + obs.log_likelihood_ratio(z_history[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(l)]);
    }
    s[0] = s[1];
  }

  const int never = k + 1;  // stands for Gamma > k
  std::vector<double> log_mass(static_cast<std::size_t>(n + 1), kNegInf);
  std::vector<int> gamma(static_cast<std::size_t>(n), 0);

  std::function<void(int, double)> visit = [&](int l, double log_w) {
    if (l == n) {
      int changed = 0;
      double loglik = 0.0;
      for (int s = 0; s < n; ++s) {
        const int g = gamma[static_cast<std::size_t>(s)];
        if (g <= k) {
          ++changed;
          loglik += suffix[static_cast<std::size_t>(s)][static_cast<std::size_t>(g)];
        }
      }
      auto& slot = log_mass[static_cast<std::size_t>(changed)];
      slot = log_add_exp(slot, log_w + loglik);
      return;
    }
    const double r = l == 0 ? model.disruption_rate() : model.rho()[static_cast<std::size_t>(l)];
    const int lo = l == 0 ? 0 : gamma[static_cast<std::size_t>(l - 1)];
    if (lo == never) {
      gamma[static_cast<std::size_t>(l)] = never;
      visit(l + 1, log_w);
      return;
    }
    for (int g = lo; g <= never; ++g) {
      double log_p;
      if (g == never) {
        log_p = static_cast<double>(never - lo) * safe_log(1.0 - r);
        if (never - lo == 0) log_p = 0.0;
      } else {
        const int d = g - lo;
        log_p = safe_log(r) + (d == 0 ? 0.0 : static_cast<double>(d) * safe_log(1.0 - r));
      }
      if (log_p == kNegInf) continue;
      gamma[static_cast<std::size_t>(l)] = g;
      visit(l + 1, log_w + log_p);
    }
  };
  visit(0, 0.0);

  const double log_total = log_sum_exp(log_mass);
  PosteriorVector out;
  out.p.resize(log_mass.size());
  for (std::size_t i = 0; i < log_mass.size(); ++i) out.p[i] = std::exp(log_mass[i] - log_total);
  return out;
}

}  // namespace changeprop
