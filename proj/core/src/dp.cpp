#include "changeprop/dp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "changeprop/error.hpp"
#include "changeprop/quadrature.hpp"

namespace changeprop {

SimplexGrid SimplexGrid::make(int sensors, double h) {
  if (sensors < 1 || sensors > 2) throw Error(ErrorCode::OutOfRange, "DP grid supports L = 1 or 2");
  if (!(h > 0.0)) throw Error(ErrorCode::OutOfRange, "grid step must be positive");
  if (h > 0.1) throw Error(ErrorCode::GridTooCoarse, "grid step must be <= 0.1");
  const double inv = 1.0 / h;
  const int n = static_cast<int>(std::lround(inv));
  if (std::abs(inv - n) > 1e-9 * inv) throw Error(ErrorCode::OutOfRange, "1/h must be an integer");

  SimplexGrid g;
  g.sensors_ = sensors;
  g.h_ = 1.0 / n;
  g.n_ = n;
  if (sensors == 1) {
    for (int i = 0; i <= n; ++i) {
      const double p1 = static_cast<double>(i) / n;
      g.nodes_flat_.push_back(p1);
      g.nodes_flat_.push_back(static_cast<double>(n - i) / n);
    }
  } else {
    for (int i = 0; i <= n; ++i) {
      g.row_offset_.push_back(g.nodes_flat_.size() / 3);
      for (int j = 0; i + j <= n; ++j) {
        g.nodes_flat_.push_back(static_cast<double>(i) / n);
        g.nodes_flat_.push_back(static_cast<double>(j) / n);
        g.nodes_flat_.push_back(static_cast<double>(n - i - j) / n);
      }
    }
  }
  return g;
}

std::span<const double> SimplexGrid::node(std::size_t i) const {
  const auto d = static_cast<std::size_t>(sensors_ + 1);
  return std::span<const double>(nodes_flat_).subspan(i * d, d);
}

std::size_t SimplexGrid::index(int i, int j) const {
  return sensors_ == 1 ? static_cast<std::size_t>(i) : row_offset_[static_cast<std::size_t>(i)] + static_cast<std::size_t>(j);
}

int SimplexGrid::locate(std::span<const double> p, std::size_t* idx, double* wt) const {
  const double n = n_;
  if (sensors_ == 1) {
    const double x = std::clamp(p[0], 0.0, 1.0) * n;
    const int i = std::min(static_cast<int>(x), n_ - 1);
    const double f = std::clamp(x - i, 0.0, 1.0);
    idx[0] = index(i, 0);
    idx[1] = index(i + 1, 0);
    wt[0] = 1.0 - f;
    wt[1] = f;
    return 2;
  }
  double x = std::max(p[0], 0.0) * n;
  double y = std::max(p[1], 0.0) * n;
  if (x + y > n) {
    const double s = n / (x + y);
    x *= s;
    y *= s;
  }
  const int i = std::min(static_cast<int>(x), n_ - 1);
  const int j = std::min(static_cast<int>(y), n_ - 1 - i);
  const double fx = x - i;
  const double fy = y - j;
  if (fx + fy <= 1.0 || i + j + 2 > n_) {
    idx[0] = index(i, j);
    idx[1] = index(i + 1, j);
    idx[2] = index(i, j + 1);
    wt[0] = std::max(0.0, 1.0 - fx - fy);
    wt[1] = fx;
    wt[2] = fy;
  } else {
    idx[0] = index(i + 1, j + 1);
    idx[1] = index(i + 1, j);
    idx[2] = index(i, j + 1);
    wt[0] = fx + fy - 1.0;
    wt[1] = 1.0 - fy;
    wt[2] = 1.0 - fx;
  }
  return 3;
}

double SimplexGrid::interpolate(std::span<const double> values, std::span<const double> p) const {
  std::size_t idx[3];
  double wt[3];
  const int m = locate(p, idx, wt);
  double v = 0.0;
  for (int t = 0; t < m; ++t) v += wt[t] * values[idx[t]];
  return v;
}

int default_horizon(double c) {
  const double t = 20.0 * std::ceil(1.0 / c);
  return static_cast<int>(std::min(t, 400.0));
}

namespace {

// Row-compressed one-step expectation operator: (M J)(p_i) approximates
// E[J(p_{k+1}) | p_k = p_i] with J linearly interpolated on the grid.
struct SparseOperator {
  std::vector<std::size_t> row_start;
  std::vector<std::uint32_t> col;
  std::vector<double> val;

  void apply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t r = 0; r + 1 < row_start.size(); ++r) {
      double s = 0.0;
      for (std::size_t e = row_start[r]; e < row_start[r + 1]; ++e) s += val[e] * x[col[e]];
      y[r] = s;
    }
  }
};

SparseOperator assemble(const ChangeModel& model, const GaussianShiftModel& obs, const SimplexGrid& grid) {
  const int n = model.sensors();
  const auto dim = static_cast<std::size_t>(n + 1);
  const GaussHermite gh = gauss_hermite(kHermiteNodes);
  const std::size_t q = gh.nodes.size();

  // Per-dimension quadrature: log-likelihood ratios at the nodes of N(0,1)
  // and N(theta,1), and normalized weights.
  std::vector<double> llr_pre(q), llr_post(q), w(q);
  for (std::size_t i = 0; i < q; ++i) {
    const double x = std::numbers::sqrt2 * gh.nodes[i];
    llr_pre[i] = obs.log_likelihood_ratio(x);
    llr_post[i] = obs.log_likelihood_ratio(x + obs.theta());
    w[i] = gh.weights[i] / std::sqrt(std::numbers::pi);
  }

  std::size_t tuples = 1;
  for (int j = 0; j < n; ++j) tuples *= q;

  SparseOperator op;
  op.row_start.push_back(0);
  std::vector<double> dense(grid.size(), 0.0);
  std::vector<std::uint32_t> touched;
  std::vector<double> pi(dim), next(dim), cum(dim);
  std::vector<std::size_t> digit(static_cast<std::size_t>(n));

  for (std::size_t node = 0; node < grid.size(); ++node) {
    const auto p = grid.node(node);
    // pi_l = P(T_{k+1,l} | p) = (1 - rho_{l-1,l}) sum_{m<=l} w_m^l p_m.
    double s = p[0];
    for (int l = 1; l <= n + 1; ++l) {
      if (l >= 2) s = model.link(l - 1) * s + p[static_cast<std::size_t>(l - 1)];
      pi[static_cast<std::size_t>(l - 1)] = (1.0 - model.link(l)) * s;
    }
    for (int comp = 1; comp <= n + 1; ++comp) {
      const double pc = pi[static_cast<std::size_t>(comp - 1)];
      if (pc <= 0.0) continue;
      // Under component comp, sensors j < comp are post-change.
      for (std::size_t t = 0; t < tuples; ++t) {
        std::size_t rem = t;
        double wt = pc;
        cum[0] = 0.0;
        for (int j = 0; j < n; ++j) {
          const std::size_t d = rem % q;
          rem /= q;
          wt *= w[d];
          const double v = (j + 1 < comp) ? llr_post[d] : llr_pre[d];
          cum[static_cast<std::size_t>(j + 1)] = cum[static_cast<std::size_t>(j)] + v;
        }
        // Posterior after the observation: p'_l proportional to pi_l e^{cum_l}.
        const double shift = *std::max_element(cum.begin(), cum.end());
        double total = 0.0;
        for (std::size_t l = 0; l < dim; ++l) {
          next[l] = pi[l] * std::exp(cum[l] - shift);
          total += next[l];
        }
        for (double& v : next) v /= total;
        std::size_t idx[3];
        double bw[3];
        const int m = grid.locate(next, idx, bw);
        for (int e = 0; e < m; ++e) {
          if (bw[e] == 0.0) continue;
          if (dense[idx[e]] == 0.0) touched.push_back(static_cast<std::uint32_t>(idx[e]));
          dense[idx[e]] += wt * bw[e];
        }
      }
    }
    std::sort(touched.begin(), touched.end());
    for (auto c : touched) {
      op.col.push_back(c);
      op.val.push_back(dense[c]);
      dense[c] = 0.0;
    }
    touched.clear();
    op.row_start.push_back(op.col.size());
  }
  return op;
}

}  // namespace

std::vector<ValueFunction> value_iterate(const ChangeModel& model, const GaussianShiftModel& obs,
                                         double c, const SimplexGrid& grid, int T) {
  if (model.sensors() != grid.sensors()) throw Error(ErrorCode::WrongLength, "grid and model dimensions differ");
  if (!(c > 0.0)) throw Error(ErrorCode::OutOfRange, "cost c must be positive");
  if (T < 1) throw Error(ErrorCode::OutOfRange, "horizon T must be >= 1");

  const SparseOperator op = assemble(model, obs, grid);
  const std::size_t n = grid.size();
  std::vector<ValueFunction> seq(static_cast<std::size_t>(T + 1));

  auto& terminal = seq[static_cast<std::size_t>(T)];
  terminal.k = T;
  terminal.T = T;
  terminal.c = c;
  terminal.J.resize(n);
  for (std::size_t i = 0; i < n; ++i) terminal.J[i] = grid.node(i)[0];

  for (int k = T - 1; k >= 0; --k) {
    auto& vf = seq[static_cast<std::size_t>(k)];
    const auto& later = seq[static_cast<std::size_t>(k + 1)];
    vf.k = k;
    vf.T = T;
    vf.c = c;
    vf.A.resize(n);
    vf.J.resize(n);
    op.apply(later.J, vf.A);
    for (std::size_t i = 0; i < n; ++i) {
      const double p1 = grid.node(i)[0];
      vf.J[i] = std::min(p1, c * (1.0 - p1) + vf.A[i]);
    }
  }
  return seq;
}

ConcavityReport check_concavity(const ValueFunction& vf, const SimplexGrid& grid, int n_probes,
                                Stream& rng, double quad_tol) {
  ConcavityReport rep;
  rep.probes = n_probes;
  rep.tolerance = 2.0 * grid.step() + quad_tol;
  const auto dim = static_cast<std::size_t>(grid.sensors() + 1);
  std::vector<double> a(dim), b(dim), mid(dim);
  auto dirichlet = [&](std::vector<double>& v) {
    double s = 0.0;
    for (double& x : v) {
      x = -std::log(rng.uniform_open0());
      s += x;
    }
    for (double& x : v) x /= s;
  };
  for (int t = 0; t < n_probes; ++t) {
    dirichlet(a);
    dirichlet(b);
    const double lam = rng.uniform_open0();
    for (std::size_t i = 0; i < dim; ++i) mid[i] = lam * a[i] + (1.0 - lam) * b[i];
    const double chord = lam * grid.interpolate(vf.J, a) + (1.0 - lam) * grid.interpolate(vf.J, b);
    const double gap = chord - grid.interpolate(vf.J, mid);
    rep.worst = std::max(rep.worst, gap);
    if (gap > rep.tolerance) ++rep.violations;
  }
  return rep;
}

MonotonicityReport check_invariants(const std::vector<ValueFunction>& seq, const SimplexGrid& grid) {
  MonotonicityReport rep;
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const auto& J = seq[k].J;
    for (std::size_t i = 0; i < J.size(); ++i) {
      const double p1 = grid.node(i)[0];
      rep.worst_range = std::max({rep.worst_range, -J[i], J[i] - 1.0});
      rep.worst_min_branch = std::max(rep.worst_min_branch, J[i] - p1);
      if (p1 == 0.0) rep.worst_face = std::max(rep.worst_face, std::abs(J[i]));
      if (k + 1 < seq.size()) rep.worst_horizon = std::max(rep.worst_horizon, J[i] - seq[k + 1].J[i]);
    }
  }
  return rep;
}

std::vector<NodeLabel> extract_stop_region(const ValueFunction& vf, const SimplexGrid& grid) {
  std::vector<NodeLabel> out;
  out.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto p = grid.node(i);
    NodeLabel lab;
    lab.p.assign(p.begin(), p.end());
    lab.J = vf.J[i];
    if (vf.A.empty()) {
      lab.A = 0.0;
      lab.stop = true;
    } else {
      lab.A = vf.A[i];
      lab.stop = p[0] <= vf.c * (1.0 - p[0]) + lab.A;
    }
    out.push_back(std::move(lab));
  }
  return out;
}

std::vector<BoundaryPoint> stop_boundary(const ValueFunction& vf, const SimplexGrid& grid, int rays) {
  std::vector<BoundaryPoint> out;
  if (vf.A.empty()) return out;
  const int n_rays = grid.sensors() == 1 ? 1 : std::max(rays, 2);
  const int samples = grid.divisions() * 40;
  std::vector<double> p(static_cast<std::size_t>(grid.sensors() + 1));
  for (int r = 0; r < n_rays; ++r) {
    const double t = grid.sensors() == 1 ? 0.0 : static_cast<double>(r) / (n_rays - 1);
    auto gap = [&](double p1) {
      p[0] = p1;
      if (grid.sensors() == 1) {
        p[1] = 1.0 - p1;
      } else {
        p[1] = (1.0 - p1) * t;
        p[2] = (1.0 - p1) * (1.0 - t);
      }
      return vf.c * (1.0 - p1) + grid.interpolate(vf.A, p) - p1;
    };
    BoundaryPoint bp{t, 0.0};
    double prev_x = 1.0;
    double prev_g = gap(1.0);
    for (int s = samples - 1; s >= 0; --s) {
      const double x = static_cast<double>(s) / samples;
      const double g = gap(x);
      if (g >= 0.0 && prev_g < 0.0) {
        bp.p1 = x + (prev_x - x) * (g / (g - prev_g));
        break;
      }
      prev_x = x;
      prev_g = g;
    }
    out.push_back(bp);
  }
  return out;
}

LimitingReport limiting_threshold_check(std::span<const double> rhos, std::span<const double> links,
                                        const GaussianShiftModel& obs, double c, double h, int T) {
  LimitingReport rep;
  const int sensors = 1 + static_cast<int>(links.size());
  const SimplexGrid grid = SimplexGrid::make(sensors, h);
  for (double rho : rhos) {
    std::vector<double> r{rho};
    r.insert(r.end(), links.begin(), links.end());
    const ChangeModel model = ChangeModel::validate(sensors, r);
    const auto seq = value_iterate(model, obs, c, grid, T);
    LimitingCase lc;
    lc.rho = rho;
    lc.level_p1 = c / (c + rho);
    lc.boundary = stop_boundary(seq.front(), grid);
    const double level_log_q = -std::log(c);
    for (const auto& bp : lc.boundary) {
      lc.deviation = std::max(lc.deviation, std::abs(bp.p1 - lc.level_p1));
      const double log_q = std::log((1.0 - bp.p1) / (rho * bp.p1));
      lc.deviation_log_q = std::max(lc.deviation_log_q, std::abs(log_q - level_log_q));
    }
    rep.cases.push_back(std::move(lc));
  }
  rep.strictly_decreasing = rep.cases.size() >= 2;
  for (std::size_t i = 1; i < rep.cases.size(); ++i) {
    if (!(rep.cases[i].deviation < rep.cases[i - 1].deviation)) rep.strictly_decreasing = false;
  }
  return rep;
}

}  // namespace changeprop
