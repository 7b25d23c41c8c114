#pragma once

#include <cstdint>
#include <exception>
#include <optional>
#include <ostream>
#include <string>

namespace changeprop::cli {

/// Flags every subcommand accepts. Unset fields fall back to the config.
struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string out;
};

struct DpFlags {
  std::optional<int> sensors;
  std::optional<double> rho;
  std::optional<double> rho12;
  std::optional<double> theta;
  double c = 0.05;
  double h = 0.02;
  int T = 0;  // 0: default horizon for c
  int probes = 10000;
};

// Each returns a process exit status; `log` receives the human summary.
// Structured output goes to Common::out, or to `log` when out is empty.
int cmd_sweep(const Common& common, std::ostream& log);
int cmd_dp(const DpFlags& flags, const Common& common, std::ostream& log);
int cmd_check(const Common& common, std::ostream& log);
int cmd_selftest(const Common& common, std::ostream& log);

/// Runs f, mapping any exception to a message on `err` and exit status 1.
template <class F>
int guarded(F&& f, std::ostream& err) {
  try {
    return f();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace changeprop::cli
