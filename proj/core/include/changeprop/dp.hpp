#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "changeprop/change_model.hpp"
#include "changeprop/obs_model.hpp"
#include "changeprop/rng.hpp"

namespace changeprop {

/// Regular grid on the L-simplex (L = 1 or 2) in the coordinates
/// (p_1, ..., p_L); the last component is 1 minus the rest.
class SimplexGrid {
 public:
  /// Throws Error{GridTooCoarse} for h > 0.1, Error{OutOfRange} unless 1/h is
  /// an integer (to 1e-9) and L is 1 or 2.
  static SimplexGrid make(int sensors, double h);

  int sensors() const noexcept { return sensors_; }
  double step() const noexcept { return h_; }
  int divisions() const noexcept { return n_; }
  std::size_t size() const noexcept { return nodes_flat_.size() / static_cast<std::size_t>(sensors_ + 1); }

  /// Full (L+1)-vector of node i.
  std::span<const double> node(std::size_t i) const;

  /// Barycentric / linear interpolation weights of point p (L+1 entries) over
  /// the containing cell. Writes up to 3 (index, weight) pairs; returns count.
  int locate(std::span<const double> p, std::size_t* idx, double* wt) const;

  double interpolate(std::span<const double> values, std::span<const double> p) const;

 private:
  std::size_t index(int i, int j) const;

  int sensors_ = 1;
  double h_ = 0.0;
  int n_ = 0;
  std::vector<double> nodes_flat_;
  std::vector<std::size_t> row_offset_;
};

/// J_k^T and the continuation expectation A_k^T on the grid nodes.
struct ValueFunction {
  std::vector<double> J;
  std::vector<double> A;
  int k = 0;
  int T = 0;
  double c = 0.0;
};

/// Default horizon 20 * ceil(1/c), capped at 400.
int default_horizon(double c);

inline constexpr int kHermiteNodes = 32;

/// Backward induction J_T = p_1, J_k = min{p_1, c (1 - p_1) + A_k(p)}.
/// Returns J_0 .. J_T indexed by k. The model is time-homogeneous, so the
/// one-step expectation operator is assembled once and applied per stage.
std::vector<ValueFunction> value_iterate(const ChangeModel& model, const GaussianShiftModel& obs,
                                         double c, const SimplexGrid& grid, int T);

struct ConcavityReport {
  int probes = 0;
  int violations = 0;
  double worst = 0.0;      // largest chord-above-function gap (0 when none)
  double tolerance = 0.0;  // epsilon_grid used to count violations
};

/// Random chords lambda p^a + (1 - lambda) p^b with endpoints uniform on the
/// simplex; counts gaps above tolerance = 2h + quad_tol.
ConcavityReport check_concavity(const ValueFunction& vf, const SimplexGrid& grid, int n_probes,
                                Stream& rng, double quad_tol = 1e-3);

struct MonotonicityReport {
  double worst_horizon = 0.0;  // max over k of J_k^{T+1} - J_k^T (equivalently J_k - J_{k+1})
  double worst_range = 0.0;    // max distance of J outside [0,1]
  double worst_face = 0.0;     // max |J| on the face p_1 = 0
  double worst_min_branch = 0.0;  // max J - p_1
};

MonotonicityReport check_invariants(const std::vector<ValueFunction>& seq, const SimplexGrid& grid);

struct NodeLabel {
  std::vector<double> p;
  double J = 0.0;
  double A = 0.0;
  bool stop = false;
};

/// Stop where p_1 <= c (1 - p_1) + A.
std::vector<NodeLabel> extract_stop_region(const ValueFunction& vf, const SimplexGrid& grid);

struct BoundaryPoint {
  double direction = 0.0;  // share of p_2 in 1 - p_1 (0 for L = 1)
  double p1 = 0.0;         // interpolated stop/continue crossing
};

/// Crossings along rays of fixed p_2 : p_3 ratio, scanned in p_1 from 1 down.
std::vector<BoundaryPoint> stop_boundary(const ValueFunction& vf, const SimplexGrid& grid,
                                         int rays = 11);

struct LimitingCase {
  double rho = 0.0;
  double level_p1 = 0.0;   // p_1 = c / (c + rho) on {sum_{j>=2} q_j = 1/c}
  double deviation = 0.0;  // max over rays |boundary p_1 - level_p1|
  double deviation_log_q = 0.0;  // same, measured in log sum q
  std::vector<BoundaryPoint> boundary;
};

struct LimitingReport {
  std::vector<LimitingCase> cases;
  bool strictly_decreasing = false;
};

/// Solves the DP at each rho (links after the first kept from `links`) and
/// measures how far the stop boundary is from the limiting level set.
LimitingReport limiting_threshold_check(std::span<const double> rhos, std::span<const double> links,
                                        const GaussianShiftModel& obs, double c, double h, int T);

}  // namespace changeprop
