#include "changeprop/decomposition.hpp"

#include <cmath>

#include "changeprop/error.hpp"
#include "changeprop/log_math.hpp"

namespace changeprop {

namespace {

void require_interior(const ChangeModel& model) {
  if (!model.interior()) {
    throw Error(ErrorCode::ParamOnBoundary,
                "product decomposition needs every rho_{l-1,l} strictly inside (0,1)");
  }
}

}  // namespace

double log_initial_mass(const ChangeModel& model, int l) {
  double log_chain = 0.0;
  for (int i = 1; i <= l - 2; ++i) log_chain += std::log(model.link(i + 1));
  double sum = 0.0;
  for (int j = 0; j <= l - 1; ++j) sum += 1.0 - model.link(j + 1);
  return log_chain + std::log(sum) - std::log1p(-model.disruption_rate());
}

double Decomposition::reconstruct(int l) const {
  const auto i = static_cast<std::size_t>(l - 2);
  double v = log_alpha[i] + log_J[i];
  for (int j = 1; j < l; ++j) v += log_C[static_cast<std::size_t>(j - 1)];
  return v;
}

DecompositionTracker::DecompositionTracker(const ChangeModel& model)
    : engine_(model), sensors_(model.sensors()), state_(engine_.initial()) {
  require_interior(model);
  const int n = sensors_;
  const auto sz = static_cast<std::size_t>(n + 1);
  log_one_minus_.resize(sz);
  for (int p = 0; p <= n; ++p) log_one_minus_[static_cast<std::size_t>(p)] = std::log1p(-model.link(p + 1));
  log_w_.assign(sz, std::vector<double>(sz, kNegInf));
  for (int j = 1; j <= n + 1; ++j) {
    for (int l = j; l <= n + 1; ++l) {
      log_w_[static_cast<std::size_t>(j - 1)][static_cast<std::size_t>(l - 1)] = std::log(weight(model, j, l));
    }
  }
  log_zeta_.resize(static_cast<std::size_t>(n));
  log_bound_.resize(static_cast<std::size_t>(n));
  cum_.resize(sz);
  terms_.resize(sz);
  scratch_.reserve(sz);
  log_B_.assign(sz, std::vector<double>(sz, kNegInf));
  log_C_.assign(sz, std::vector<double>(sz, kNegInf));
}

void DecompositionTracker::step(std::span<const double> llr) {
  const int n = sensors_;
  const auto& q = state_.log_q;

  // terms_[p] = log((1 - rho_{p,p+1}) prod_{i<=p} L_{m+1,i}), p = 0..L.
  cum_[0] = 0.0;
  for (int p = 1; p <= n; ++p) cum_[static_cast<std::size_t>(p)] = cum_[static_cast<std::size_t>(p - 1)] + llr[static_cast<std::size_t>(p - 1)];
  for (int p = 0; p <= n; ++p) terms_[static_cast<std::size_t>(p)] = log_one_minus_[static_cast<std::size_t>(p)] + cum_[static_cast<std::size_t>(p)];

  // B_{n,l} = sum_{p=n-1}^{l-1} terms, C_{n,l} = the same sum stopping at l-2.
  for (int l = 1; l <= n + 1; ++l) {
    double acc_c = kNegInf;
    for (int nn = l; nn >= 1; --nn) {
      const auto ni = static_cast<std::size_t>(nn - 1);
      const auto li = static_cast<std::size_t>(l - 1);
      if (nn <= l - 1) acc_c = log_add_exp(acc_c, terms_[ni]);
      log_C_[ni][li] = acc_c;
      log_B_[ni][li] = log_add_exp(acc_c, terms_[li]);
    }
  }

  for (int l = 2; l <= n + 1; ++l) {
    const auto li = static_cast<std::size_t>(l - 1);
    double num = kNegInf;
    double log_s = kNegInf;
    for (int j = 1; j <= l; ++j) {
      const auto ji = static_cast<std::size_t>(j - 1);
      const double base = q[ji] + log_w_[ji][li];
      log_s = log_add_exp(log_s, base);
      if (j < l) num = log_add_exp(num, base + log_C_[ji][li]);
    }
    log_zeta_[li - 1] = num - (terms_[li] + log_s);
    log_bound_[li - 1] = log_B_[0][li] - terms_[li];
  }

  engine_.advance(state_, llr);
}

Decomposition decompose_llr(const ChangeModel& model,
                            const std::vector<std::vector<double>>& llr_history) {
  require_interior(model);
  if (llr_history.empty()) {
    throw Error(ErrorCode::OutOfRange, "decomposition needs at least one observation");
  }
  const int n = model.sensors();
  const auto k = static_cast<std::int64_t>(llr_history.size());
  const double log_one_minus_rho = std::log1p(-model.disruption_rate());

  Decomposition d;
  d.sensors = n;
  d.k = k;
  d.log_alpha.resize(static_cast<std::size_t>(n));
  d.log_J.assign(static_cast<std::size_t>(n), 0.0);
  d.log_C.assign(static_cast<std::size_t>(n), 0.0);
  for (int l = 2; l <= n + 1; ++l) {
    const double log_a = std::log1p(-model.link(l)) - log_one_minus_rho;
    d.log_alpha[static_cast<std::size_t>(l - 2)] = static_cast<double>(k) * log_a + log_initial_mass(model, l);
  }

  DecompositionTracker tracker(model);
  for (std::int64_t m = 0; m < k; ++m) {
    const auto& llr = llr_history[static_cast<std::size_t>(m)];
    if (static_cast<int>(llr.size()) != n) {
      throw Error(ErrorCode::WrongLength, "each observation row must have L entries");
    }
    for (int j = 0; j < n; ++j) d.log_C[static_cast<std::size_t>(j)] += llr[static_cast<std::size_t>(j)];
    tracker.step(llr);
    d.log_B.push_back(tracker.log_B());
    d.log_Cmn.push_back(tracker.log_Cmn());
    if (m <= k - 2) {
      const auto z = tracker.log_zeta();
      d.log_zeta.emplace_back(z.begin(), z.end());
      const auto b = tracker.log_zeta_bound();
      d.log_zeta_bound.emplace_back(b.begin(), b.end());
      for (int i = 0; i < n; ++i) d.log_J[static_cast<std::size_t>(i)] += log1p_exp(z[static_cast<std::size_t>(i)]);
    }
  }
  d.recursion = tracker.belief();
  return d;
}

Decomposition decompose(const ChangeModel& model, const ObservationModel& obs,
                        const std::vector<std::vector<double>>& z_history) {
  std::vector<std::vector<double>> llr(z_history.size());
  for (std::size_t t = 0; t < z_history.size(); ++t) {
    llr[t].reserve(z_history[t].size());
    for (double z : z_history[t]) llr[t].push_back(obs.log_likelihood_ratio(z));
  }
  return decompose_llr(model, llr);
}

}  // namespace changeprop
