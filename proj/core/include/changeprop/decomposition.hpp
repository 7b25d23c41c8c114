#pragma once

#include <span>
#include <vector>

#include "changeprop/belief.hpp"

namespace changeprop {

/// Product form of the q recursion for k >= 1:
///   q_{k,l} = alpha_{k,l} * prod_{j<l} C_j * J_l,
///   alpha_{k,l} = a_l^k S_{0,l},  a_l = (1 - rho_{l-1,l}) / (1 - rho),
///   C_j = prod_{m=1}^k L_{m,j},  J_l = prod_{m=0}^{k-2} (1 + zeta_{m,l}).
/// zeta_{m,l} pairs q_m with the likelihoods at time m+1. Everything is kept
/// in logs. Vectors indexed by l use slot l-2 (l = 2..L+1); by j use j-1.
struct Decomposition {
  int sensors = 0;
  std::int64_t k = 0;
  std::vector<double> log_alpha;
  std::vector<double> log_C;
  std::vector<double> log_J;
  std::vector<std::vector<double>> log_zeta;        // [m][l-2], m = 0..k-2
  std::vector<std::vector<double>> log_zeta_bound;  // pathwise upper bound on zeta, same shape
  // log B_{m,n,l} and log C_{m,n,l} for m = 1..k: [m-1][n-1][l-1].
  std::vector<std::vector<std::vector<double>>> log_B;
  std::vector<std::vector<std::vector<double>>> log_Cmn;
  BeliefState recursion;  // q_k from the plain recursion, for comparison

  double reconstruct(int l) const;
};

/// Streams the zeta terms one step at a time without storing the history;
/// used by long-horizon gamma estimation.
class DecompositionTracker {
 public:
  explicit DecompositionTracker(const ChangeModel& model);

  /// Consumes L_{m+1,.} (m = steps taken so far), producing zeta_{m,l} and its
  /// bound for l = 2..L+1, then advances q to time m+1.
  void step(std::span<const double> llr);

  std::span<const double> log_zeta() const noexcept { return log_zeta_; }
  std::span<const double> log_zeta_bound() const noexcept { return log_bound_; }
  /// log B_{m+1,n,l} and log C_{m+1,n,l} from the last step, [n-1][l-1].
  const std::vector<std::vector<double>>& log_B() const noexcept { return log_B_; }
  const std::vector<std::vector<double>>& log_Cmn() const noexcept { return log_C_; }
  const BeliefState& belief() const noexcept { return state_; }

 private:
  BeliefEngine engine_;
  int sensors_;
  BeliefState state_;
  std::vector<double> log_one_minus_;          // log(1 - rho_{p,p+1}), p = 0..L
  std::vector<std::vector<double>> log_w_;     // log w_j^l, [j-1][l-1]
  std::vector<double> log_zeta_, log_bound_, cum_, terms_, scratch_;
  std::vector<std::vector<double>> log_B_, log_C_;
};

/// Throws Error{ParamOnBoundary} unless every rho_{l-1,l} is in (0,1), and
/// Error{OutOfRange} for an empty history.
Decomposition decompose(const ChangeModel& model, const ObservationModel& obs,
                        const std::vector<std::vector<double>>& z_history);

Decomposition decompose_llr(const ChangeModel& model,
                            const std::vector<std::vector<double>>& llr_history);

/// log S_{0,l} = log( prod_{i=1}^{l-2} rho_{i,i+1} * sum_{j=0}^{l-1} (1 - rho_{j,j+1}) / (1 - rho) ).
double log_initial_mass(const ChangeModel& model, int l);

}  // namespace changeprop
