#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "changeprop/change_model.hpp"
#include "changeprop/obs_model.hpp"
#include "changeprop/rng.hpp"

namespace changeprop {

enum class DetectorKind { NuA, SingleSensor, Mismatched };

std::string_view to_string(DetectorKind kind) noexcept;
/// Accepts "nu_a", "single", "mismatched". Throws Error{Config}.
DetectorKind parse_detector(std::string_view name);

struct DetectorSpec {
  DetectorKind kind = DetectorKind::NuA;
  double A = 0.0;  // log-domain threshold on the detector's statistic
};

struct StopOutcome {
  std::int64_t tau = 0;
  bool stopped_by_cap = false;
  std::int64_t gamma1 = 0;
};

/// A = log(1 / (rho * alpha)); guarantees P_FA <= alpha for nu_A.
double threshold_for_alpha(double rho, double alpha);

/// Post-disruption delay budget ceil(12 (A + |log rho|) / (D + |log(1 - rho)|)),
/// at least 1. A run is capped at tau = Gamma_1 + k_max.
std::int64_t default_k_max(const ChangeModel& model, const ObservationModel& obs, double A);

/// Simulates one trajectory: change points first (one uniform per sensor),
/// then L normals per step. Stops at the first k >= 0 with statistic >= A.
/// Links equal to 0 are allowed here: the sensors behind them never change.
StopOutcome run_detector(const DetectorSpec& spec, const ChangeModel& model,
                         const ObservationModel& obs, Stream& rng, std::int64_t k_max);

/// Same trajectory scored against several thresholds at once. thresholds
/// must be non-decreasing; k_max[i] is the delay budget for thresholds[i].
/// Each outcome equals what run_detector would return on an identical stream.
void run_detector_multi(DetectorKind kind, std::span<const double> thresholds,
                        std::span<const std::int64_t> k_max, const ChangeModel& model,
                        const ObservationModel& obs, Stream& rng, std::span<StopOutcome> out);

}  // namespace changeprop
