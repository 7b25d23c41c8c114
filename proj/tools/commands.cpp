#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "changeprop/config.hpp"
#include "changeprop/dp.hpp"
#include "changeprop/error.hpp"
#include "changeprop/experiments.hpp"
#include "json.hpp"
#include "oracles.hpp"

namespace changeprop::cli {

using nlohmann::ordered_json;

namespace {

ExperimentConfig resolve(const Common& common) {
  if (common.config.empty()) throw Error(ErrorCode::Config, "--config is required");
  ExperimentConfig cfg = load_config(common.config);
  if (common.seed) cfg.seed = *common.seed;
  if (!common.out.empty()) cfg.out = common.out;
  return cfg;
}

void write_or_print(const std::string& path, const std::string& text, std::ostream& log) {
  if (path.empty()) {
    log << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  f << text;
  if (!f) throw Error(ErrorCode::Io, "write failed for '" + path + "'");
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Non-finite numbers are not valid JSON; emit them as strings.
ordered_json num(double v) {
  if (std::isfinite(v)) return v;
  return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

}  // namespace

int cmd_sweep(const Common& common, std::ostream& log) {
  const ExperimentConfig cfg = resolve(common);
  const ChangeModel model = cfg.model();
  const GaussianShiftModel obs(cfg.theta);
  if (cfg.alpha.empty() && cfg.A.empty()) {
    throw Error(ErrorCode::Config, "sweep needs an alpha or A list");
  }

  std::ostringstream csv;
  // The resolved config heads the file; the output path is left out so the
  // bytes depend only on the experiment.
  ExperimentConfig header = cfg;
  header.out.clear();
  std::istringstream cfg_lines(header.to_text());
  for (std::string line; std::getline(cfg_lines, line);) csv << "# " << line << "\n";
  csv << csv_header() << "\n";
  for (DetectorKind kind : cfg.detectors) {
    const auto rows = cfg.alpha.empty()
                          ? sweep_thresholds(kind, model, obs, cfg.A, cfg.trials, cfg.seed, cfg.k_max, common.threads)
                          : sweep_curve(kind, model, obs, cfg.alpha, cfg.trials, cfg.seed, cfg.k_max, common.threads);
    for (const auto& r : rows) {
      csv << csv_row(r) << "\n";
      log << to_string(kind) << "  A=" << fixed(r.spec.A, 3) << "  P_FA=" << r.p_fa << " (se " << r.p_fa_se
          << ")  E_DD=" << fixed(r.e_dd, 3) << " (se " << fixed(r.e_dd_se, 3) << ")  censored=" << r.censored << "\n";
    }
  }
  if (cfg.out.empty()) {
    log << csv.str();
  } else {
    write_or_print(cfg.out, csv.str(), log);
    log << "wrote " << cfg.out << "\n";
  }
  return 0;
}

int cmd_dp(const DpFlags& flags, const Common& common, std::ostream& log) {
  int sensors = 2;
  std::vector<double> rho{0.01, 0.1};
  double theta = 1.0;
  if (!common.config.empty()) {
    const ExperimentConfig cfg = load_config(common.config);
    sensors = cfg.sensors;
    rho = cfg.rho;
    theta = cfg.theta;
  }
  if (flags.sensors) {
    sensors = *flags.sensors;
    rho.resize(static_cast<std::size_t>(std::max(sensors, 1)), 0.1);
  }
  if (flags.rho) rho[0] = *flags.rho;
  if (flags.rho12 && rho.size() > 1) rho[1] = *flags.rho12;
  if (flags.theta) theta = *flags.theta;

  const ChangeModel model = ChangeModel::validate(sensors, rho);
  const GaussianShiftModel obs(theta);
  const SimplexGrid grid = SimplexGrid::make(sensors, flags.h);
  const int T = flags.T > 0 ? flags.T : default_horizon(flags.c);
  const auto seq = value_iterate(model, obs, flags.c, grid, T);

  double terminal_err = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double p1 = grid.node(i)[0];
    terminal_err = std::max(terminal_err, std::abs(seq[static_cast<std::size_t>(T - 1)].A[i] - (1.0 - rho[0]) * p1));
  }
  const auto inv = check_invariants(seq, grid);
  Stream rng(common.seed.value_or(1));
  const auto conc0 = check_concavity(seq.front(), grid, flags.probes, rng);
  const auto concT = check_concavity(seq.back(), grid, flags.probes, rng);
  const auto boundary = stop_boundary(seq.front(), grid);

  std::ostringstream csv;
  for (int l = 1; l <= sensors + 1; ++l) csv << "p" << l << ",";
  csv << "J,stop\n";
  for (const auto& n : extract_stop_region(seq.front(), grid)) {
    for (double v : n.p) csv << fixed(v, 6) << ",";
    csv << fixed(n.J, 12) << "," << (n.stop ? 1 : 0) << "\n";
  }
  if (!common.out.empty()) write_or_print(common.out, csv.str(), log);

  ordered_json rep;
  rep["model"] = {{"L", sensors}, {"rho", rho}, {"theta", theta}};
  rep["c"] = flags.c;
  rep["h"] = grid.step();
  rep["T"] = T;
  rep["nodes"] = grid.size();
  rep["terminal_stage_error"] = terminal_err;
  rep["J_range_excess"] = inv.worst_range;
  rep["J_on_face_p1_0"] = inv.worst_face;
  rep["horizon_monotonicity_excess"] = inv.worst_horizon;
  rep["min_branch_excess"] = inv.worst_min_branch;
  rep["concavity"] = {{"stage", 0},
                      {"probes", conc0.probes},
                      {"violations", conc0.violations},
                      {"worst_gap", conc0.worst},
                      {"tolerance", conc0.tolerance}};
  rep["terminal_concavity"] = {{"probes", concT.probes}, {"violations", concT.violations}, {"worst_gap", concT.worst}};
  ordered_json b = ordered_json::array();
  for (const auto& bp : boundary) b.push_back({{"direction", bp.direction}, {"p1", bp.p1}});
  rep["stop_boundary"] = b;
  rep["limiting_level_p1"] = flags.c / (flags.c + rho[0]);
  if (!common.out.empty()) rep["stop_region_csv"] = common.out;
  log << rep.dump(2) << "\n";
  return 0;
}

int cmd_check(const Common& common, std::ostream& log) {
  const ExperimentConfig cfg = resolve(common);
  ChangeModel model = cfg.model();
  const GaussianShiftModel obs(cfg.theta);
  ordered_json rep;
  rep["config"] = cfg.to_text();
  ordered_json notes = ordered_json::array();

  if (model.has_blocking()) {
    const ChangeModel reduced = reduce_blocking(model);
    notes.push_back("blocking link: sensors after " + std::to_string(reduced.sensors()) +
                    " never change; reduced to a " + std::to_string(reduced.sensors()) + "-sensor system");
    model = reduced;
  }
  if (model.has_oblivious()) {
    const ObliviousReduction red = reduce_oblivious(model);
    std::string groups;
    for (std::size_t s = 0; s < red.group_of.size(); ++s) {
      groups += (s ? "," : "") + std::to_string(red.group_of[s] + 1);
    }
    notes.push_back("oblivious link(s): sensors merged into groups [" + groups + "]; a merged sensor sums its members' "
                    "log-likelihood ratios, the condition check below uses the per-sensor divergence");
    model = red.model;
  }
  rep["reductions"] = notes;
  rep["effective_model"] = {{"L", model.sensors()},
                            {"rho", std::vector<double>(model.rho().begin(), model.rho().end())}};
  rep["D"] = obs.kl_divergence();
  rep["asymptotic_slope"] = asymptotic_slope(model, obs);
  rep["single_sensor_slope"] = asymptotic_slope(ChangeModel::validate(1, {model.disruption_rate()}), obs);

  const auto c5 = check_condition_five(model, obs);
  ordered_json entries = ordered_json::array();
  for (const auto& e : c5.entries) {
    entries.push_back({{"l", e.l}, {"satisfied", e.satisfied}, {"witness_j", e.witness_j}, {"best_margin", num(e.best_margin)}});
  }
  rep["condition_five"] = {{"entries", entries}, {"guaranteed_contributors", c5.guaranteed}, {"gamma_u", num(c5.gamma_u)}};

  if (!cfg.alpha.empty()) {
    ordered_json lb = ordered_json::array();
    for (double a : cfg.alpha) lb.push_back({{"alpha", a}, {"A", threshold_for_alpha(model.disruption_rate(), a)}, {"lower_bound_edd", lower_bound_edd(model, obs, a)}});
    rep["lower_bounds"] = lb;
  }

  if (model.sensors() >= 2 && model.interior()) {
    const auto es = estimate_ell_star(model, obs, cfg.horizon, cfg.paths, cfg.seed);
    ordered_json deltas = ordered_json::array();
    for (const auto& d : es.deltas) {
      deltas.push_back({{"l", d.l},
                        {"j", d.j},
                        {"gamma", es.table.at(d.l, d.j).mean},
                        {"gamma_se", es.table.at(d.l, d.j).se},
                        {"delta", d.delta.mean},
                        {"delta_se", d.delta.se},
                        {"jensen_lower_bound", d.jensen_bound}});
    }
    rep["ell_star"] = {{"estimate", es.ell_star},
                       {"inconclusive", es.inconclusive},
                       {"horizon", cfg.horizon},
                       {"paths", cfg.paths},
                       {"seed", cfg.seed},
                       {"deltas", deltas}};
  } else {
    rep["ell_star"] = {{"estimate", model.sensors() + 1}, {"inconclusive", false}, {"trivial", true}};
  }

  const std::string text = rep.dump(2) + "\n";
  if (cfg.out.empty()) {
    log << text;
  } else {
    write_or_print(cfg.out, text, log);
    log << "wrote " << cfg.out << "\n";
  }
  return 0;
}

int cmd_selftest(const Common& common, std::ostream& log) {
  const std::uint64_t seed = common.seed.value_or(20240601);
  bool ok = true;
  auto line = [&](bool pass, const std::string& name, const std::string& detail) {
    log << (pass ? "PASS " : "FAIL ") << name << "  " << detail << "\n";
    ok = ok && pass;
  };

  const auto o = oracles::posterior_vs_enumeration(100, 5, seed);
  line(o.max_abs_error <= 1e-9, "posterior-vs-enumeration",
       "max |p - p_bf| = " + std::to_string(o.max_abs_error) + " over " + std::to_string(o.cases) + " cases");

  const auto r = oracles::shiryaev_reduction(1000, seed);
  char buf[128];
  std::snprintf(buf, sizeof buf, "max drift = %.3g over %d steps", r.max_drift, r.steps);
  line(r.max_drift <= 1e-12, "shiryaev-reduction", buf);

  const auto d = oracles::decomposition_identity(100, 200, seed);
  std::snprintf(buf, sizeof buf, "max rel err = %.3g, max log(zeta/cap) = %.3g, paths = %d", d.max_rel_error,
                d.max_bound_excess, d.paths);
  line(d.max_rel_error <= 1e-8 && d.zeta_nonnegative && d.max_bound_excess <= 1e-12, "decomposition-identity", buf);

  return ok ? 0 : 1;
}

}  // namespace changeprop::cli
