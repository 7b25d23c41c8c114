#include "changeprop/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "changeprop/error.hpp"

namespace changeprop {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line, const std::string& msg) {
  throw Error(ErrorCode::Config, "line " + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split_list(const std::string& value, int line) {
  std::string v = trim(value);
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') fail(line, "unterminated list");
    v = v.substr(1, v.size() - 2);
  }
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) fail(line, "empty list element");
    out.push_back(item);
  }
  return out;
}

double to_double(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) fail(line, "not a number: " + s);
    return v;
  } catch (const std::logic_error&) {
    fail(line, "not a number: " + s);
  }
}

std::int64_t to_int(const std::string& s, int line) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) fail(line, "not an integer: " + s);
    return v;
  } catch (const std::logic_error&) {
    fail(line, "not an integer: " + s);
  }
}

// Shortest of %.15g / %.17g that reads back exactly.
std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  if (std::strtod(buf, nullptr) != v) std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T, class F>
std::string list(const std::vector<T>& xs, F f) {
  std::string s = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ", ";
    s += f(xs[i]);
  }
  return s + "]";
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  bool have_L = false, have_rho = false;
  std::stringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected key = value");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (value.empty()) fail(line, "missing value for " + key);

    if (key == "L") {
      cfg.sensors = static_cast<int>(to_int(value, line));
      have_L = true;
    } else if (key == "rho") {
      cfg.rho.clear();
      for (const auto& x : split_list(value, line)) cfg.rho.push_back(to_double(x, line));
      have_rho = true;
    } else if (key == "theta") {
      cfg.theta = to_double(value, line);
    } else if (key == "detectors" || key == "detector") {
      cfg.detectors.clear();
      for (const auto& x : split_list(value, line)) cfg.detectors.push_back(parse_detector(x));
    } else if (key == "alpha") {
      cfg.alpha.clear();
      for (const auto& x : split_list(value, line)) cfg.alpha.push_back(to_double(x, line));
    } else if (key == "A") {
      cfg.A.clear();
      for (const auto& x : split_list(value, line)) cfg.A.push_back(to_double(x, line));
    } else if (key == "trials") {
      cfg.trials = to_int(value, line);
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(to_int(value, line));
    } else if (key == "k_max") {
      cfg.k_max = to_int(value, line);
    } else if (key == "horizon") {
      cfg.horizon = static_cast<int>(to_int(value, line));
    } else if (key == "paths") {
      cfg.paths = static_cast<int>(to_int(value, line));
    } else if (key == "out") {
      cfg.out = value;
    } else {
      fail(line, "unknown key '" + key + "'");
    }
  }
  if (!have_L || !have_rho) throw Error(ErrorCode::Config, "config must set both L and rho");
  if (!cfg.alpha.empty() && !cfg.A.empty()) {
    throw Error(ErrorCode::Config, "give either alpha or A, not both");
  }
  if (cfg.detectors.empty()) throw Error(ErrorCode::Config, "no detectors listed");
  (void)cfg.model();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::Io, "cannot open config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::string ExperimentConfig::to_text() const {
  std::string s;
  s += "L = " + std::to_string(sensors) + "\n";
  s += "rho = " + list(rho, fmt) + "\n";
  s += "theta = " + fmt(theta) + "\n";
  s += "detectors = " + list(detectors, [](DetectorKind k) { return std::string(to_string(k)); }) + "\n";
  if (!alpha.empty()) s += "alpha = " + list(alpha, fmt) + "\n";
  if (!A.empty()) s += "A = " + list(A, fmt) + "\n";
  s += "trials = " + std::to_string(trials) + "\n";
  s += "seed = " + std::to_string(seed) + "\n";
  s += "k_max = " + std::to_string(k_max) + "\n";
  s += "horizon = " + std::to_string(horizon) + "\n";
  s += "paths = " + std::to_string(paths) + "\n";
  if (!out.empty()) s += "out = " + out + "\n";
  return s;
}

}  // namespace changeprop
