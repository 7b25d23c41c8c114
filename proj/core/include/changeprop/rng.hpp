#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace changeprop {

/// SplitMix64 finalizer; used to turn (master seed, index) into independent
/// engine seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// A seeded random stream. Each Monte Carlo trial owns one, derived from
/// (master_seed, trial_index), so results do not depend on how trials are
/// scheduled across threads.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  static Stream derive(std::uint64_t master_seed, std::uint64_t index) {
    return Stream(splitmix64(master_seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
  }

  /// Uniform on (0, 1].
  double uniform_open0() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  }

  double standard_normal() { return normal_(engine_); }

  /// Number of failures before the first success: P(m) = p (1-p)^m, m >= 0.
  /// Always consumes exactly one uniform so stream alignment does not depend
  /// on p.
  std::int64_t geometric(double p) {
    const double u = uniform_open0();
    if (p >= 1.0) return 0;
    const double m = std::floor(std::log(u) / std::log1p(-p));
    return static_cast<std::int64_t>(m);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace changeprop
