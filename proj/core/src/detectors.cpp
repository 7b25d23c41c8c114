#include "changeprop/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "changeprop/belief.hpp"
#include "changeprop/error.hpp"
#include "changeprop/log_math.hpp"

namespace changeprop {

std::string_view to_string(DetectorKind kind) noexcept {
  switch (kind) {
    case DetectorKind::NuA: return "nu_a";
    case DetectorKind::SingleSensor: return "single";
    case DetectorKind::Mismatched: return "mismatched";
  }
  return "unknown";
}

DetectorKind parse_detector(std::string_view name) {
  if (name == "nu_a" || name == "nuA" || name == "nu-a") return DetectorKind::NuA;
  if (name == "single") return DetectorKind::SingleSensor;
  if (name == "mismatched") return DetectorKind::Mismatched;
  throw Error(ErrorCode::Config, "unknown detector '" + std::string(name) + "'");
}

double threshold_for_alpha(double rho, double alpha) {
  if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorCode::OutOfRange, "rho must lie in (0,1)");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorCode::OutOfRange, "alpha must lie in (0,1]");
  return -std::log(rho) - std::log(alpha);
}

std::int64_t default_k_max(const ChangeModel& model, const ObservationModel& obs, double A) {
  const double rho = model.disruption_rate();
  const double num = A + std::abs(std::log(rho));
  const double den = obs.kl_divergence() + std::abs(std::log1p(-rho));
  if (!(num > 0.0)) return 1;
  const double v = std::ceil(12.0 * num / den);
  if (v > 1e12) return static_cast<std::int64_t>(1e12);
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(v));
}

namespace {

constexpr std::int64_t kNever = std::numeric_limits<std::int64_t>::max();

// Like sample_change_points, but a zero link means "never changes" rather
// than an error, so blocked arrays can be simulated without reduction.
void draw_change_points(const ChangeModel& model, Stream& rng, std::vector<std::int64_t>& gamma) {
  const int n = model.sensors();
  gamma.resize(static_cast<std::size_t>(n));
  std::int64_t t = 0;
  for (int l = 0; l < n; ++l) {
    const double r = model.rho()[static_cast<std::size_t>(l)];
    const std::int64_t d = rng.geometric(r);
    if (r == 0.0 || t == kNever) {
      t = kNever;
    } else {
      t += d;
    }
    gamma[static_cast<std::size_t>(l)] = t;
  }
}

}  // namespace

void run_detector_multi(DetectorKind kind, std::span<const double> thresholds,
                        std::span<const std::int64_t> k_max, const ChangeModel& model,
                        const ObservationModel& obs, Stream& rng, std::span<StopOutcome> out) {
  const std::size_t n_thr = thresholds.size();
  if (k_max.size() != n_thr || out.size() != n_thr) {
    throw Error(ErrorCode::WrongLength, "thresholds, k_max and outputs must have equal length");
  }
  if (n_thr == 0) return;

  const int n = model.sensors();
  std::vector<std::int64_t> gamma;
  draw_change_points(model, rng, gamma);
  const std::int64_t g1 = gamma[0];

  std::vector<std::int64_t> cap(n_thr);
  std::int64_t last = 0;
  for (std::size_t i = 0; i < n_thr; ++i) {
    if (k_max[i] < 1) throw Error(ErrorCode::OutOfRange, "k_max must be >= 1");
    cap[i] = g1 > kNever - k_max[i] ? kNever : g1 + k_max[i];
    last = std::max(last, cap[i]);
    out[i] = StopOutcome{cap[i], true, g1};
  }

  const double rho = model.disruption_rate();
  BeliefEngine engine(model);
  BeliefState belief;
  double log_q = 0.0;
  if (kind == DetectorKind::NuA) {
    belief = engine.initial();
  } else {
    log_q = -std::log1p(-rho);
  }
  auto stat = [&]() {
    return kind == DetectorKind::NuA ? BeliefEngine::statistic(belief) : log_q;
  };

  // Thresholds are sorted, so the ones not yet crossed form a suffix.
  std::size_t next = 0;
  auto settle = [&](std::int64_t k, double s) {
    while (next < n_thr && s >= thresholds[next]) {
      if (k <= cap[next]) out[next] = StopOutcome{k, false, g1};
      ++next;
    }
    // Thresholds whose budget ran out keep their capped outcome.
    while (next < n_thr && cap[next] <= k) {
      if (s < thresholds[next]) {
        ++next;
      } else {
        break;
      }
    }
  };

  settle(0, stat());
  std::vector<double> llr(static_cast<std::size_t>(n));
  for (std::int64_t k = 1; next < n_thr && k <= last; ++k) {
    for (int l = 0; l < n; ++l) {
      const bool post = k >= gamma[static_cast<std::size_t>(l)];
      llr[static_cast<std::size_t>(l)] = obs.log_likelihood_ratio(obs.sample(post, rng));
    }
    switch (kind) {
      case DetectorKind::NuA:
        engine.advance(belief, llr);
        break;
      case DetectorKind::SingleSensor:
        log_q = shiryaev_update_log(log_q, llr[0], rho);
        break;
      case DetectorKind::Mismatched: {
        double joint = 0.0;
        for (double v : llr) joint += v;
        log_q = shiryaev_update_log(log_q, joint, rho);
        break;
      }
    }
    settle(k, stat());
  }
}

StopOutcome run_detector(const DetectorSpec& spec, const ChangeModel& model,
                         const ObservationModel& obs, Stream& rng, std::int64_t k_max) {
  StopOutcome out;
  const double a = spec.A;
  run_detector_multi(spec.kind, std::span<const double>(&a, 1),
                     std::span<const std::int64_t>(&k_max, 1), model, obs, rng,
                     std::span<StopOutcome>(&out, 1));
  return out;
}

}  // namespace changeprop
