#pragma once

#include <cstdint>

// Oracle-equivalence checks shared by `changeprop selftest` and the
// acceptance suite.
namespace changeprop::oracles {

struct OracleResult {
  double max_abs_error = 0.0;  // recursion posterior vs enumeration
  int cases = 0;
};

/// Random parameters and trajectories for L = 1..3, k = 1..max_k, `draws`
/// draws per L.
OracleResult posterior_vs_enumeration(int draws, int max_k, std::uint64_t seed);

struct ReductionResult {
  double max_drift = 0.0;  // |log q_{k,L+1} - log q_k^{scalar}| over the run
  int steps = 0;
};

/// All links equal to 1, L = 1..4, `steps` updates each.
ReductionResult shiryaev_reduction(int steps, std::uint64_t seed);

struct DecompositionResult {
  double max_rel_error = 0.0;   // |log reconstruction - log recursion|
  double max_bound_excess = 0.0;  // max(log zeta - log cap), must be <= 0
  bool zeta_nonnegative = true;
  int paths = 0;
};

/// `paths` random paths with L = 1..4 and k up to max_k.
DecompositionResult decomposition_identity(int paths, int max_k, std::uint64_t seed);

}  // namespace changeprop::oracles
