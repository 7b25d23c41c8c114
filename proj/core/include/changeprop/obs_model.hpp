#pragma once

#include "changeprop/rng.hpp"

namespace changeprop {

/// Pre-/post-change observation densities as seen by the belief engine: the
/// engine only ever consumes log-likelihood ratios log(f1(z)/f0(z)).
class ObservationModel {
 public:
  virtual ~ObservationModel() = default;
  virtual double log_likelihood_ratio(double z) const = 0;
  virtual double kl_divergence() const = 0;
  virtual double sample(bool post_change, Stream& rng) const = 0;
};

/// f0 = N(0,1), f1 = N(theta,1).
class GaussianShiftModel final : public ObservationModel {
 public:
  explicit GaussianShiftModel(double theta);

  double theta() const noexcept { return theta_; }

  double log_likelihood_ratio(double z) const override { return theta_ * z - half_theta_sq_; }
  double kl_divergence() const override { return half_theta_sq_; }

  /// Draws one standard normal regardless of the flag, so the stream stays
  /// aligned whatever the change points are.
  double sample(bool post_change, Stream& rng) const override {
    const double e = rng.standard_normal();
    return post_change ? e + theta_ : e;
  }

 private:
  double theta_;
  double half_theta_sq_;
};

}  // namespace changeprop
