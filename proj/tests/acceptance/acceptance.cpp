// One PASS/FAIL line per acceptance criterion. Exit status is 1 if any
// criterion fails, except those named with --known-fail N, which still print
// FAIL but are tallied separately.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <set>
#include <iterator>
#include <limits>
#include <stdexcept>
#include <sstream>
#include <string>
#include <vector>

#include "changeprop/change_model.hpp"
#include "changeprop/detectors.hpp"
#include "changeprop/dp.hpp"
#include "changeprop/experiments.hpp"
#include "changeprop/obs_model.hpp"
#include "changeprop/rng.hpp"
#include "commands.hpp"
#include "oracles.hpp"

namespace cp = changeprop;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[1024];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const std::vector<double> kAlphas = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};

cp::ChangeModel two_sensor_model(double rho = 0.001) { return cp::ChangeModel::validate(2, {rho, 0.1}); }
cp::ChangeModel five_sensor_model() {
  return cp::ChangeModel::validate(5, {0.005, 0.1, 0.2, 0.5, 0.7});
}

// Two-sensor sweeps are shared by several criteria.
struct Curves {
  std::vector<cp::RunResult> nu, single, mismatched;
};

const Curves& two_sensor_curves() {
  static const Curves c = [] {
    const auto m = two_sensor_model();
    const cp::GaussianShiftModel obs(1.0);
    const std::int64_t n = 100000;
    return Curves{cp::sweep_curve(cp::DetectorKind::NuA, m, obs, kAlphas, n, 2),
                  cp::sweep_curve(cp::DetectorKind::SingleSensor, m, obs, kAlphas, n, 2),
                  cp::sweep_curve(cp::DetectorKind::Mismatched, m, obs, kAlphas, n, 2)};
  }();
  return c;
}

const cp::RunResult& at_alpha(const std::vector<cp::RunResult>& v, double alpha) {
  for (const auto& r : v)
    if (std::abs(r.alpha / alpha - 1.0) < 1e-9) return r;
  throw std::runtime_error("alpha not swept");
}

Verdict c1() {
  const auto r = cp::oracles::posterior_vs_enumeration(100, 5, 11);
  return {r.max_abs_error <= 1e-9, fmt("max_abs_error=%.3g over %d cases", r.max_abs_error, r.cases)};
}

Verdict c2() {
  const auto r = cp::oracles::shiryaev_reduction(1000, 12);
  return {r.max_drift <= 1e-12, fmt("max_drift=%.3g over %d steps", r.max_drift, r.steps)};
}

Verdict c3() {
  const auto r = cp::oracles::decomposition_identity(100, 200, 13);
  const bool ok = r.max_rel_error <= 1e-8 && r.zeta_nonnegative && r.max_bound_excess <= 1e-12;
  return {ok, fmt("max_rel_error=%.3g zeta>=0:%s bound_excess=%.3g paths=%d", r.max_rel_error,
                  r.zeta_nonnegative ? "yes" : "no", r.max_bound_excess, r.paths)};
}

Verdict c4() {
  const cp::GaussianShiftModel obs(1.0);
  const std::vector<double> alphas = {1e-2, 1e-3};
  bool ok = true;
  std::string d;
  for (double rho : {0.001, 0.01}) {
    const auto pts = cp::sweep_curve(cp::DetectorKind::NuA, two_sensor_model(rho), obs, alphas, 100000, 4);
    for (const auto& r : pts) {
      const bool pass = r.p_fa <= r.alpha + 3.0 * std::sqrt(r.alpha * (1.0 - r.alpha) / double(r.trials));
      ok = ok && pass;
      d += fmt("[rho=%g a=%g pfa=%.3g] ", rho, r.alpha, r.p_fa);
    }
  }
  return {ok, d};
}

Verdict c5() {
  const auto& c = two_sensor_curves();
  const auto& nu = at_alpha(c.nu, 1e-3);
  const auto& s = at_alpha(c.single, 1e-3);
  const double gap = s.e_dd - nu.e_dd;
  const double margin = gap - 3.0 * std::hypot(s.e_dd_se, nu.e_dd_se);
  return {margin >= 4.0 && nu.trials >= 30000,
          fmt("E_DD single=%.3f nu_A=%.3f gap=%.3f gap-3se=%.3f trials=%lld", s.e_dd, nu.e_dd, gap,
              margin, static_cast<long long>(nu.trials))};
}

Verdict c6() {
  const auto& c = two_sensor_curves();
  const cp::GaussianShiftModel obs3(0.75);
  const auto m3 = five_sensor_model();
  const Curves five{cp::sweep_curve(cp::DetectorKind::NuA, m3, obs3, kAlphas, 30000, 3),
                  cp::sweep_curve(cp::DetectorKind::SingleSensor, m3, obs3, kAlphas, 30000, 3),
                  cp::sweep_curve(cp::DetectorKind::Mismatched, m3, obs3, kAlphas, 30000, 3)};
  bool ok = true;
  double worst = -INFINITY;
  for (const Curves* cv : {&c, &five}) {
    for (std::size_t i = 0; i < kAlphas.size(); ++i) {
      const auto& nu = cv->nu[i];
      for (const auto* other : {&cv->single[i], &cv->mismatched[i]}) {
        const double excess = nu.e_dd - other->e_dd - 3.0 * std::hypot(nu.e_dd_se, other->e_dd_se);
        worst = std::max(worst, excess);
        ok = ok && excess <= 0.0;
      }
    }
  }
  return {ok, fmt("worst E_DD(nu_A) - E_DD(other) - 3se = %.3f over %zu alphas x 2 configs", worst,
                  kAlphas.size())};
}

Verdict c7() {
  const auto& c = two_sensor_curves();
  const cp::GaussianShiftModel obs(1.0);
  const auto m = two_sensor_model();
  const double lo = 0.85 * cp::asymptotic_slope(m, obs);
  const double hi = 1.15 * cp::asymptotic_slope(cp::ChangeModel::validate(1, {m.disruption_rate()}), obs);
  const double s45 = cp::measured_slope(at_alpha(c.nu, 1e-4), at_alpha(c.nu, 1e-5));
  const double s56 = cp::measured_slope(at_alpha(c.nu, 1e-5), at_alpha(c.nu, 1e-6));
  const double s46 = cp::measured_slope(at_alpha(c.nu, 1e-4), at_alpha(c.nu, 1e-6));
  // Trend across the tail of the sweep, one slope per decade from 1e-3.
  std::vector<double> slopes;
  for (double a = 1e-3; a > 2e-6; a /= 10.0)
    slopes.push_back(cp::measured_slope(at_alpha(c.nu, a), at_alpha(c.nu, a / 10.0)));
  bool decreasing = true;
  for (std::size_t i = 1; i < slopes.size(); ++i) decreasing = decreasing && slopes[i] < slopes[i - 1];
  const bool in = s46 >= lo && s46 <= hi && s45 >= lo && s45 <= hi && s56 >= lo && s56 <= hi;
  std::string trend;
  for (double s : slopes) trend += fmt("%.4f ", s);
  return {in && decreasing,
          fmt("slope(1e-4,1e-6)=%.4f in [%.4f, %.4f]; per-decade slopes from 1e-3: %s", s46, lo, hi,
              trend.c_str())};
}

Verdict c8() {
  const auto& c = two_sensor_curves();
  const cp::GaussianShiftModel obs(1.0);
  const auto m = two_sensor_model();
  bool ok = true;
  double worst = INFINITY;
  for (const auto& r : c.nu) {
    if (r.alpha > 1e-4 * (1 + 1e-9)) continue;
    const double ratio = r.e_dd / cp::lower_bound_edd(m, obs, r.alpha);
    worst = std::min(worst, ratio);
    ok = ok && ratio >= 0.9;
  }
  return {ok, fmt("min E_DD / lower bound = %.4f", worst)};
}

Verdict c9() {
  const auto r = cp::check_condition_five(five_sensor_model(), cp::GaussianShiftModel(0.75));
  return {r.guaranteed == 2, fmt("guaranteed contributors=%d (D=%.5f)", r.guaranteed, r.D)};
}

Verdict c10() {
  const double c = 0.05, h = 0.02;
  const int T = static_cast<int>(std::lround(20.0 / c));
  const cp::GaussianShiftModel obs(1.0);
  const auto m = cp::ChangeModel::validate(2, {0.01, 0.1});
  const auto grid = cp::SimplexGrid::make(2, h);
  const auto seq = cp::value_iterate(m, obs, c, grid, T);
  const auto inv = cp::check_invariants(seq, grid);
  cp::Stream rng = cp::Stream::derive(10, 0);
  const auto conc = cp::check_concavity(seq.front(), grid, 10000, rng);
  const double eps = conc.tolerance;

  // Lengthening the horizon can only lower J; the shorter problem's J at the
  // same stage bounds it from above.
  const auto longer = cp::value_iterate(m, obs, c, grid, T + 1);
  double up = 0.0, down = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = longer.front().J[i] - seq.front().J[i];
    up = std::max(up, d);
  }
  for (std::size_t k = 0; k + 1 < seq.size(); ++k)
    for (std::size_t i = 0; i < grid.size(); ++i)
      down = std::max(down, seq[k].J[i] - seq[k + 1].J[i]);

  const std::vector<double> rhos = {1e-1, 1e-2, 1e-3};
  const std::vector<double> links = {0.1};
  const auto lim = cp::limiting_threshold_check(rhos, links, obs, c, h, T);

  const bool a = inv.worst_range <= 0.0;
  const bool b = inv.worst_face <= 1e-3;
  const bool cc = up <= eps && down <= eps && inv.worst_horizon <= eps;
  const bool d = conc.violations == 0;
  const bool e = lim.strictly_decreasing;
  std::string dev;
  for (const auto& k : lim.cases) dev += fmt("%g:%.4f ", k.rho, k.deviation);
  return {a && b && cc && d && e,
          fmt("(a)%s range=%.2g (b)%s face=%.2g (c)%s T+1=%.2g stage=%.2g (d)%s %d/%d worst=%.2g "
              "(e)%s dev[%s] eps=%.3g",
              a ? "ok" : "FAIL", inv.worst_range, b ? "ok" : "FAIL", inv.worst_face,
              cc ? "ok" : "FAIL", up, down, d ? "ok" : "FAIL", conc.violations, conc.probes,
              conc.worst, e ? "ok" : "FAIL", dev.c_str(), eps)};
}

bool same_double(double x, double y) { return std::abs(x - y) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(y); }

Verdict c11() {
  const double d1 = cp::GaussianShiftModel(1.0).kl_divergence();
  const double d2 = cp::GaussianShiftModel(0.75).kl_divergence();
  const double d3 = cp::GaussianShiftModel(1.2).kl_divergence();
  const bool ok = d1 == 0.5 && d2 == 0.28125 && same_double(d3, 0.72);
  return {ok, fmt("D(1)=%.17g D(0.75)=%.17g D(1.2)=%.17g", d1, d2, d3)};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Verdict c12() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::current_path() / "acceptance_determinism";
  fs::create_directories(dir);
  const fs::path cfg = dir / "sweep.cfg";
  std::ofstream(cfg) << "L = 3\nrho = [0.01, 0.2, 0.5]\ntheta = 1\n"
                        "detectors = [nu_a, single, mismatched]\nalpha = [1e-2, 1e-3, 1e-4]\n"
                        "trials = 5000\nseed = 99\n";
  std::ostringstream sink;
  std::vector<std::string> outs;
  int run = 0;
  for (int threads : {1, 4, 1, 3}) {
    cp::cli::Common common{cfg.string(), std::nullopt, threads, (dir / fmt("run%d.csv", run++)).string()};
    if (cp::cli::cmd_sweep(common, sink) != 0) return {false, "sweep exited nonzero"};
    outs.push_back(slurp(common.out));
  }
  bool ok = !outs.front().empty();
  for (const auto& o : outs) ok = ok && o == outs.front();
  return {ok, fmt("%zu sweep runs (threads 1,4,1,3), %zu bytes each, identical=%s", outs.size(),
                  outs.front().size(), ok ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::size_t> known;
  for (int i = 1; i + 1 < argc; ++i)
    if (std::strcmp(argv[i], "--known-fail") == 0) known.insert(std::strtoul(argv[++i], nullptr, 10));

  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"oracle equivalence", c1},   {"shiryaev reduction", c2}, {"decomposition identity", c3},
      {"false alarm guarantee", c4}, {"two-sensor delay gap", c5},     {"detector ordering", c6},
      {"slope bracketing", c7},      {"lower bound", c8},        {"condition checker", c9},
      {"dp structure", c10},         {"kl values", c11},         {"determinism", c12},
  };
  int failed = 0, known_failed = 0;
  // ctest hides the output of passing tests, so the lines are kept on disk too.
  std::ofstream report("acceptance_report.txt");
  auto emit = [&](const std::string& line) {
    std::fputs(line.c_str(), stdout);
    std::fflush(stdout);
    report << line << std::flush;
  };
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool is_known = known.count(i + 1) > 0;
    if (!v.pass) ++(is_known ? known_failed : failed);
    emit(fmt("%s %zu: %s | %s (%.1fs)%s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
             v.detail.c_str(), secs, !v.pass && is_known ? " [known failure]" : ""));
  }
  emit(fmt("%zu criteria: %zu passed, %d failed, %d known failures\n", criteria.size(),
           criteria.size() - failed - known_failed, failed, known_failed));
  return failed == 0 ? 0 : 1;
}
