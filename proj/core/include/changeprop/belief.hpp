#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "changeprop/change_model.hpp"
#include "changeprop/obs_model.hpp"

namespace changeprop {

/// q-transform of the posterior, stored as logs: log_q[l-1] = log q_{k,l},
/// l = 1..L+1. log_q[0] is pinned at -log(rho). Exact zeros are -inf.
struct BeliefState {
  std::vector<double> log_q;
  std::int64_t k = 0;

  int sensors() const noexcept { return static_cast<int>(log_q.size()) - 1; }
};

/// Posterior probabilities p_{k,l} of the partition events T_{k,l}
/// (l-1 = largest sensor index that has changed by time k).
struct PosteriorVector {
  std::vector<double> p;
};

/// Model constants for the log-domain q recursion, computed once so a Monte
/// Carlo trial can advance the state without allocating.
class BeliefEngine {
 public:
  explicit BeliefEngine(const ChangeModel& model);

  int sensors() const noexcept { return sensors_; }
  double log_rho() const noexcept { return log_rho_; }

  BeliefState initial() const;

  /// One step of the q recursion driven by per-sensor log-likelihood ratios.
  void advance(BeliefState& state, std::span<const double> llr) const;

  /// log sum_{l>=2} q_{k,l}.
  static double statistic(const BeliefState& state);

 private:
  int sensors_;
  double log_rho_;
  std::vector<double> log_link_;  // log rho_{l-1,l}, l = 1..L
  std::vector<double> log_coef_;  // log((1 - rho_{l-1,l}) / (1 - rho)), l = 1..L+1
  std::vector<double> log_prior_;
};

BeliefState init_belief(const ChangeModel& model);

BeliefState update(const BeliefState& belief, const ChangeModel& model,
                   const ObservationModel& obs, std::span<const double> z);

/// log sum_{l=2}^{L+1} q_{k,l}; -inf only at degenerate priors.
double statistic(const BeliefState& belief);

PosteriorVector p_from_q(const BeliefState& belief);
BeliefState q_from_p(const PosteriorVector& posterior, double rho, std::int64_t k = 0);

/// Direct simplex-domain recursion, renormalized every step. Used to
/// cross-check the q path and inside the DP solver.
PosteriorVector update_p_direct(const PosteriorVector& posterior, const ChangeModel& model,
                                const ObservationModel& obs, std::span<const double> z);

/// Same recursion driven by log-likelihood ratios.
PosteriorVector update_p_direct_llr(const PosteriorVector& posterior, const ChangeModel& model,
                                    std::span<const double> llr);

/// Scalar Shiryaev recursion q_k = LR / (1 - rho) * (1 + q_{k-1}).
double shiryaev_update(double q, double joint_log_lr, double rho);

/// Log-domain version: returns log q_k given log q_{k-1}.
double shiryaev_update_log(double log_q, double joint_log_lr, double rho);

/// Exact posterior by enumerating every non-decreasing change-point
/// configuration with each Gamma_l in {0..k} or "> k". z_history is k rows of
/// L observations. Throws Error{TooLarge} beyond k = 12 or L = 3.
PosteriorVector brute_force_posterior(const ChangeModel& model, const ObservationModel& obs,
                                      const std::vector<std::vector<double>>& z_history);

inline constexpr int kBruteForceMaxSteps = 12;
inline constexpr int kBruteForceMaxSensors = 3;

}  // namespace changeprop
