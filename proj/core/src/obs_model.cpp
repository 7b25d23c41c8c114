#include "changeprop/obs_model.hpp"

#include <cmath>
#include <string>

#include "changeprop/error.hpp"

namespace changeprop {

GaussianShiftModel::GaussianShiftModel(double theta)
    : theta_(theta), half_theta_sq_(0.5 * theta * theta) {
  if (!std::isfinite(theta)) {
    throw Error(ErrorCode::OutOfRange, "theta must be finite, got " + std::to_string(theta));
  }
}

}  // namespace changeprop
