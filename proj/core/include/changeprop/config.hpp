#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "changeprop/change_model.hpp"
#include "changeprop/detectors.hpp"

namespace changeprop {

/// Flat key = value experiment description. Lists are written [a, b, c].
/// Lines starting with '#' are comments.
///
///   L = 2
///   rho = [0.001, 0.1]
///   theta = 1
///   detectors = [nu_a, single, mismatched]
///   alpha = [1e-2, 1e-3]      # or: A = [...], never both
///   trials = 30000
///   seed = 7
///   k_max = 0                 # 0: per-threshold default
///   horizon = 2000            # gamma / l* estimation
///   paths = 200
///   out = two_sensor.csv
struct ExperimentConfig {
  int sensors = 1;
  std::vector<double> rho;
  double theta = 1.0;
  std::vector<DetectorKind> detectors{DetectorKind::NuA};
  std::vector<double> alpha;
  std::vector<double> A;
  std::int64_t trials = 10000;
  std::uint64_t seed = 1;
  std::int64_t k_max = 0;
  int horizon = 2000;
  int paths = 200;
  std::string out;

  ChangeModel model() const { return ChangeModel::validate(sensors, rho); }

  /// Canonical text form; parse(to_text()) reproduces the config.
  std::string to_text() const;
};

/// Throws Error{Config} on syntax errors and unknown keys, plus whatever
/// ChangeModel::validate raises.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace changeprop
