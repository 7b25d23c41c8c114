#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "changeprop/change_model.hpp"
#include "changeprop/detectors.hpp"
#include "changeprop/obs_model.hpp"

namespace changeprop {

struct RunResult {
  DetectorSpec spec;
  double alpha = 0.0;  // nominal alpha the threshold came from; NaN if A was given
  std::int64_t trials = 0;
  double p_fa = 0.0;
  double p_fa_se = 0.0;
  double e_dd = 0.0;
  double e_dd_se = 0.0;
  std::int64_t censored = 0;
  std::uint64_t seed = 0;
  std::int64_t k_max = 0;
};

inline constexpr double kMaxCensorFraction = 1e-3;
inline constexpr std::int64_t kMinTrials = 1000;

/// n_trials independent trajectories, trial i drawing from
/// Stream::derive(seed, i). Aggregation uses exact integer sums, so the
/// result is bit-identical for any thread count. k_max <= 0 selects
/// default_k_max. Throws Error{ExcessCensoring} when more than 1e-3 of the
/// trials hit the cap.
RunResult estimate_performance(const DetectorSpec& spec, const ChangeModel& model,
                               const ObservationModel& obs, std::int64_t n_trials,
                               std::uint64_t seed, std::int64_t k_max = 0, int threads = 1);

/// One point per threshold, all scored on the same trajectories (trial i
/// uses the same stream at every threshold). thresholds need not be sorted.
std::vector<RunResult> sweep_thresholds(DetectorKind kind, const ChangeModel& model,
                                        const ObservationModel& obs,
                                        std::span<const double> thresholds,
                                        std::int64_t n_trials, std::uint64_t seed,
                                        std::int64_t k_max = 0, int threads = 1);

/// Calibrates A = log(1/(rho alpha)) per alpha, then sweep_thresholds.
std::vector<RunResult> sweep_curve(DetectorKind kind, const ChangeModel& model,
                                   const ObservationModel& obs, std::span<const double> alphas,
                                   std::int64_t n_trials, std::uint64_t seed,
                                   std::int64_t k_max = 0, int threads = 1);

/// log(1/(rho alpha)) / (L D + |log(1 - rho)|). Error{DegenerateModel} when a
/// link is 0.
double lower_bound_edd(const ChangeModel& model, const ObservationModel& obs, double alpha);

/// 1 / (L D + |log(1 - rho)|).
double asymptotic_slope(const ChangeModel& model, const ObservationModel& obs);

/// Slope of E_DD against |log alpha| between two sweep points.
double measured_slope(const RunResult& a, const RunResult& b);

struct ConditionFiveEntry {
  int l = 0;
  bool satisfied = false;
  int witness_j = 0;        // smallest j that satisfies the condition, 0 if none
  double best_margin = 0.0;  // max_j of D minus the right-hand side
};

struct ConditionFiveReport {
  double D = 0.0;
  std::vector<ConditionFiveEntry> entries;  // l = 2..L
  int guaranteed = 1;  // largest m with the condition holding for l = 2..m
  double gamma_u = 0.0;
};

ConditionFiveReport check_condition_five(const ChangeModel& model, const ObservationModel& obs);

struct Estimate {
  double mean = 0.0;
  double se = 0.0;
};

/// Long-run averages along post-change paths (Gamma_1 = 0), one table for
/// all (l, j) pairs. Indices: gamma[l-2][j-l] for 2 <= l <= j <= L;
/// jensen[l-2] estimates E[log sum_{p<l} (1 - rho_{p,p+1}) / prod_{i=p+1}^{l-1} L_i].
struct GammaTable {
  int sensors = 0;
  int horizon = 0;
  int paths = 0;
  std::vector<std::vector<Estimate>> gamma;
  std::vector<Estimate> jensen;

  Estimate at(int l, int j) const { return gamma[static_cast<std::size_t>(l - 2)][static_cast<std::size_t>(j - l)]; }
};

/// Error{ParamOnBoundary} unless every link is interior.
GammaTable estimate_gamma_table(const ChangeModel& model, const ObservationModel& obs, int horizon,
                                int n_paths, std::uint64_t seed);

Estimate estimate_gamma(const ChangeModel& model, const ObservationModel& obs, int l, int j,
                        int horizon, int n_paths, std::uint64_t seed);

struct DeltaEntry {
  int l = 0;
  int j = 0;
  Estimate delta;         // log((1-rho_{j,j+1})/(1-rho_{l-1,l})) + (j-l+1) D + gamma
  double jensen_bound = 0.0;  // (j-l+1) D + log(1-rho_{j,j+1}) - E[log ...]
  double jensen_se = 0.0;
};

struct EllStarResult {
  int ell_star = 2;
  bool inconclusive = false;
  std::vector<DeltaEntry> deltas;
  GammaTable table;
};

/// Smallest l with Delta_{l,j} <= 0 for all j in [l, L], else L + 1. The
/// result is flagged inconclusive when a decisive Delta is within 3 se of 0.
EllStarResult estimate_ell_star(const ChangeModel& model, const ObservationModel& obs,
                                int horizon, int n_paths, std::uint64_t seed);

std::string csv_header();
std::string csv_row(const RunResult& r);

}  // namespace changeprop
