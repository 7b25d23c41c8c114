#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "changeprop/rng.hpp"

namespace changeprop {

/// Joint-geometric change-propagation process over a linear array of L
/// sensors. rho()[0] is the disruption parameter rho_{0,1}; rho()[l-1] is the
/// inter-sensor parameter rho_{l-1,l}. The trailing rho_{L,L+1} = 0 is implied.
class ChangeModel {
 public:
  /// Throws Error{WrongLength} or Error{OutOfRange}; never clamps.
  static ChangeModel validate(int sensors, std::vector<double> rho);

  int sensors() const noexcept { return static_cast<int>(rho_.size()); }
  std::span<const double> rho() const noexcept { return rho_; }
  double disruption_rate() const noexcept { return rho_.front(); }

  /// rho_{l-1,l} for l = 1..L+1 (returns 0 for l = L+1).
  double link(int l) const;

  /// True when every rho_{l-1,l}, 2 <= l <= L, lies strictly inside (0,1).
  bool interior() const noexcept;
  bool has_blocking() const noexcept;
  bool has_oblivious() const noexcept;

  bool operator==(const ChangeModel&) const = default;

 private:
  explicit ChangeModel(std::vector<double> rho) : rho_(std::move(rho)) {}
  std::vector<double> rho_;
};

/// Realized change points, non-decreasing along the array.
struct ChangePoints {
  std::vector<std::int64_t> gamma;
};

ChangePoints sample_change_points(const ChangeModel& model, Stream& rng);

/// P(Gamma_l = m), by exact convolution of the geometric increments.
double marginal_pmf(const ChangeModel& model, int sensor, std::int64_t m);

/// P(Gamma_l > m) by the same convolution (tail of marginal_pmf).
double marginal_tail(const ChangeModel& model, int sensor, std::int64_t m);

/// w_m^l = prod_{j=m-1}^{l-2} rho_{j,j+1}; 1 <= m <= l <= L+1.
double weight(const ChangeModel& model, int m, int l);

/// Result of collapsing oblivious (rho_{l,l+1} = 1) links. group_of[s] is the
/// 0-based effective sensor that original sensor s (0-based) merges into; the
/// effective sensor's log-likelihood ratio is the sum over its members.
struct ObliviousReduction {
  ChangeModel model;
  std::vector<int> group_of;

  /// Sum original per-sensor log-likelihood ratios into effective sensors.
  std::vector<double> merge(std::span<const double> llr) const;
};

ObliviousReduction reduce_oblivious(const ChangeModel& model);

/// Truncates at the first blocking link rho_{l',l'+1} = 0 (l' >= 1).
ChangeModel reduce_blocking(const ChangeModel& model);

}  // namespace changeprop
