#include "changeprop/change_model.hpp"

#include <cmath>
#include <sstream>

#include "changeprop/error.hpp"

namespace changeprop {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::WrongLength: return "WrongLength";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DegenerateModel: return "DegenerateModel";
    case ErrorCode::IndexError: return "IndexError";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::ParamOnBoundary: return "ParamOnBoundary";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::ExcessCensoring: return "ExcessCensoring";
    case ErrorCode::Inconclusive: return "Inconclusive";
    case ErrorCode::Config: return "Config";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

ChangeModel ChangeModel::validate(int sensors, std::vector<double> rho) {
  if (sensors < 1) {
    throw Error(ErrorCode::WrongLength, "sensor count must be >= 1");
  }
  if (static_cast<int>(rho.size()) != sensors) {
    std::ostringstream os;
    os << "rho has " << rho.size() << " entries, expected L = " << sensors;
    throw Error(ErrorCode::WrongLength, os.str());
  }
  if (!(rho[0] > 0.0 && rho[0] < 1.0)) {
    std::ostringstream os;
    os << "rho_{0,1} must lie in (0,1), got " << rho[0];
    throw Error(ErrorCode::OutOfRange, os.str());
  }
  for (std::size_t i = 1; i < rho.size(); ++i) {
    if (!(rho[i] >= 0.0 && rho[i] <= 1.0)) {
      std::ostringstream os;
      os << "rho_{" << i << "," << i + 1 << "} must lie in [0,1], got " << rho[i];
      throw Error(ErrorCode::OutOfRange, os.str());
    }
  }
  return ChangeModel(std::move(rho));
}

double ChangeModel::link(int l) const {
  if (l < 1 || l > sensors() + 1) {
    throw Error(ErrorCode::IndexError, "link index out of range");
  }
  return l == sensors() + 1 ? 0.0 : rho_[static_cast<std::size_t>(l - 1)];
}

bool ChangeModel::interior() const noexcept {
  for (std::size_t i = 1; i < rho_.size(); ++i) {
    if (rho_[i] <= 0.0 || rho_[i] >= 1.0) return false;
  }
  return true;
}

bool ChangeModel::has_blocking() const noexcept {
  for (std::size_t i = 1; i < rho_.size(); ++i) {
    if (rho_[i] == 0.0) return true;
  }
  return false;
}

bool ChangeModel::has_oblivious() const noexcept {
  for (std::size_t i = 1; i < rho_.size(); ++i) {
    if (rho_[i] == 1.0) return true;
  }
  return false;
}

ChangePoints sample_change_points(const ChangeModel& model, Stream& rng) {
  if (model.has_blocking()) {
    throw Error(ErrorCode::DegenerateModel,
                "a blocking link (rho = 0) has infinite mean delay; apply reduce_blocking first");
  }
  ChangePoints out;
  out.gamma.resize(static_cast<std::size_t>(model.sensors()));
  std::int64_t t = 0;
  for (int l = 0; l < model.sensors(); ++l) {
    t += rng.geometric(model.rho()[static_cast<std::size_t>(l)]);
    out.gamma[static_cast<std::size_t>(l)] = t;
  }
  return out;
}

namespace {

// Runs the convolution up to time m. pmf[t] = P(Gamma_l = t), tail = P(Gamma_l > m).
// Each geometric(r) stage obeys H[t] = f[t] + (1-r) H[t-1], pmf = r H,
// tail_l = tail_{l-1} + (1-r) H.
void convolve(const ChangeModel& model, int sensor, std::int64_t m, std::vector<double>& pmf,
              double& tail) {
  if (sensor < 1 || sensor > model.sensors()) {
    throw Error(ErrorCode::IndexError, "sensor index out of range");
  }
  if (m < 0) {
    pmf.clear();
    tail = 1.0;
    return;
  }
  const auto n = static_cast<std::size_t>(m + 1);
  const double rho = model.disruption_rate();
  pmf.assign(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) pmf[t] = rho * std::pow(1.0 - rho, static_cast<double>(t));
  tail = std::pow(1.0 - rho, static_cast<double>(m + 1));

  for (int l = 2; l <= sensor; ++l) {
    const double r = model.link(l);
    double h = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      h = pmf[t] + (1.0 - r) * h;
      pmf[t] = r * h;
    }
    tail += (1.0 - r) * h;
  }
}

}  // namespace

double marginal_pmf(const ChangeModel& model, int sensor, std::int64_t m) {
  if (m < 0) return 0.0;
  std::vector<double> pmf;
  double tail = 0.0;
  convolve(model, sensor, m, pmf, tail);
  return pmf.back();
}

double marginal_tail(const ChangeModel& model, int sensor, std::int64_t m) {
  std::vector<double> pmf;
  double tail = 0.0;
  convolve(model, sensor, m, pmf, tail);
  return tail;
}

double weight(const ChangeModel& model, int m, int l) {
  if (m < 1 || l > model.sensors() + 1 || m > l) {
    throw Error(ErrorCode::IndexError, "weight requires 1 <= m <= l <= L+1");
  }
  double w = 1.0;
  for (int j = m - 1; j <= l - 2; ++j) w *= model.link(j + 1);
  return w;
}

std::vector<double> ObliviousReduction::merge(std::span<const double> llr) const {
  std::vector<double> out(static_cast<std::size_t>(model.sensors()), 0.0);
  for (std::size_t s = 0; s < group_of.size(); ++s) {
    out[static_cast<std::size_t>(group_of[s])] += llr[s];
  }
  return out;
}

ObliviousReduction reduce_oblivious(const ChangeModel& model) {
  // rho_{s-1,s} = 1 means sensor s changes together with sensor s-1, so it
  // joins s-1's group.
  std::vector<double> rho{model.disruption_rate()};
  std::vector<int> group_of(static_cast<std::size_t>(model.sensors()), 0);
  int group = 0;
  for (int s = 1; s < model.sensors(); ++s) {
    const double r = model.rho()[static_cast<std::size_t>(s)];
    if (r != 1.0) {
      ++group;
      rho.push_back(r);
    }
    group_of[static_cast<std::size_t>(s)] = group;
  }
  const int reduced = static_cast<int>(rho.size());
  return {ChangeModel::validate(reduced, std::move(rho)), std::move(group_of)};
}

ChangeModel reduce_blocking(const ChangeModel& model) {
  std::vector<double> rho{model.disruption_rate()};
  for (int s = 1; s < model.sensors(); ++s) {
    const double r = model.rho()[static_cast<std::size_t>(s)];
    if (r == 0.0) break;
    rho.push_back(r);
  }
  const int reduced = static_cast<int>(rho.size());
  return ChangeModel::validate(reduced, std::move(rho));
}

}  // namespace changeprop
