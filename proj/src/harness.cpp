#include "deltaloop/harness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include "deltaloop/bracketing.hpp"
#include "deltaloop/comparison.hpp"
#include "deltaloop/oracle.hpp"
#include "deltaloop/solver2d.hpp"
#include "deltaloop/transverse.hpp"
#include "deltaloop/version.hpp"

namespace deltaloop::harness {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const Json& require(const Json& cfg, const char* key) {
  if (!cfg.is_object() || !cfg.contains(key)) throw ConfigError(std::string("missing config key '") + key + "'");
  return cfg.at(key);
}

template <class T>
T value_or(const Json& cfg, const char* key, T fallback) {
  if (!cfg.contains(key)) return fallback;
  try {
    return cfg.at(key).get<T>();
  } catch (const Json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

std::vector<double> grid_or(const Json& cfg, const char* key, std::vector<double> fallback) {
  return cfg.contains(key) ? grid_from_config(cfg.at(key)) : fallback;
}

std::string fmt_int(long long v) { return std::to_string(v); }
std::string fmt_bool(bool v) { return v ? "1" : "0"; }

std::vector<std::string> numbered(const std::string& stem, int n) {
  std::vector<std::string> c;
  for (int j = 1; j <= n; ++j) c.push_back(stem + std::to_string(j));
  return c;
}

void append(std::vector<std::string>& to, const std::vector<std::string>& more) {
  to.insert(to.end(), more.begin(), more.end());
}

// Grid points run concurrently; the first failure in input order is rethrown.
template <class F>
void for_each_point(std::size_t n, int jobs, F&& f) {
  std::vector<std::exception_ptr> errors(n);
  const int threads = std::max(1, jobs);
#pragma omp parallel for schedule(dynamic) num_threads(threads) if (threads > 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      f(static_cast<std::size_t>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

geometry::LoopCurve curve_of(const Json& cfg) { return curve_from_config(require(cfg, "curve")); }

double field_of(const geometry::LoopCurve& c, double phi) { return 2 * kPi * phi / c.area(); }

// Field values from "B", or from a flux grid "phi" when no "B" is given.
std::vector<double> field_grid(const Json& cfg, const geometry::LoopCurve& c, const Json& default_phi) {
  if (cfg.contains("B")) return grid_from_config(cfg.at("B"));
  std::vector<double> B;
  for (double phi : grid_from_config(cfg.contains("phi") ? cfg.at("phi") : default_phi))
    B.push_back(field_of(c, phi));
  return B;
}

std::array<double, 4> box_of(const Json& cfg, const geometry::LoopCurve& c, double beta, double h_coarse) {
  if (cfg.contains("box")) {
    const auto b = cfg.at("box").get<std::vector<double>>();
    if (b.size() != 4) throw ConfigError("box must be [x0, x1, y0, y1]");
    return {b[0], b[1], b[2], b[3]};
  }
  double margin = value_or(cfg, "margin", 0.0);
  if (cfg.contains("margin_factor")) margin = std::max(0.5, cfg.at("margin_factor").get<double>() / beta);
  const auto g = lattice::Grid2D::around(c, beta, h_coarse, margin);
  return {g.x0(), g.x1(), g.y0(), g.y1()};
}

std::string box_cell(const std::array<double, 4>& b) {
  return fmt(b[0]) + ":" + fmt(b[1]) + ":" + fmt(b[2]) + ":" + fmt(b[3]);
}

solver2d::SolveOptions solve_options(const Json& cfg, const RunOptions& run) {
  solver2d::SolveOptions o;
  o.k = value_or(cfg, "k", 1);
  if (cfg.contains("shift")) o.shift = cfg.at("shift").get<double>();
  o.seed = run.seed_set ? run.seed : value_or<std::uint64_t>(cfg, "seed", 1);
  o.cutoff = value_or(cfg, "cutoff", 0.0);
  const auto dep = value_or<std::string>(cfg, "deposition", "link");
  if (dep == "bilinear")
    o.assembly.deposition = lattice::Deposition::Bilinear;
  else if (dep != "link")
    throw ConfigError("deposition must be 'link' or 'bilinear'");
  o.assembly.gauge_x = value_or(cfg, "gauge_x", 0.0);
  o.assembly.gauge_y = value_or(cfg, "gauge_y", 0.0);
  return o;
}

bracketing::BracketOptions bracket_options(const Json& cfg) {
  bracketing::BracketOptions o;
  o.a_coeff = value_or(cfg, "a_coeff", o.a_coeff);
  if (cfg.contains("a")) o.a_override = cfg.at("a").get<double>();
  o.N = value_or(cfg, "N", o.N);
  o.grid_density = value_or(cfg, "grid_density", o.grid_density);
  o.strict = value_or(cfg, "strict", o.strict);
  return o;
}

// --- commands -------------------------------------------------------------

Table cmd_geometry(const Json& cfg, const RunOptions&) {
  const auto c = curve_of(cfg);
  Table t;
  t.columns = {"i", "s", "x", "y", "tangent_angle", "curvature"};
  const auto H = c.tangent_angle();
  const auto g = c.curvature();
  for (std::size_t i = 0; i < c.size(); ++i)
    t.rows.push_back({fmt_int(static_cast<long long>(i)), fmt(c.arc(i)), fmt(c.x()[i]), fmt(c.y()[i]), fmt(H[i]),
                      fmt(g[i])});
  t.notes = {"length " + fmt(c.length()),
             "area " + fmt(c.area()),
             "total_curvature " + fmt(c.total_curvature()),
             "closure_residual " + fmt(c.closure_residual()),
             "gamma_plus " + fmt(c.gamma_plus()),
             "strip_halfwidth " + fmt(c.strip_halfwidth())};
  return t;
}

Table cmd_transverse(const Json& cfg, const RunOptions& run) {
  const auto as = grid_from_config(require(cfg, "a"));
  const auto betas = grid_from_config(require(cfg, "beta"));
  const auto gps = grid_or(cfg, "gamma_plus", {1.0});
  const int mesh = value_or(cfg, "mesh", 2001);
  struct Point {
    double a, beta, g;
  };
  std::vector<Point> pts;
  for (double a : as)
    for (double b : betas)
      for (double g : gps) pts.push_back({a, b, g});

  Table t;
  t.columns = {"a",           "beta",        "gamma_plus",  "zeta_plus", "zeta_minus",   "plus_lower",
               "plus_upper",  "minus_lower", "minus_upper", "fd_plus",   "fd_minus",     "fd_band_plus",
               "fd_band_minus", "preconds_ok"};
  t.rows.resize(pts.size());
  for_each_point(pts.size(), run.jobs, [&](std::size_t i) {
    const auto [a, beta, g] = pts[i];
    const double base = -0.25 * beta * beta;
    double zp = kNaN, zm = kNaN, pl = kNaN, pu = kNaN, ml = kNaN, mu = kNaN;
    double fp = kNaN, fm = kNaN, bp = kNaN, bm = kNaN;
    bool ok = true;
    try {
      const auto p = transverse::zeta_plus(a, beta);
      zp = p.zeta;
      pl = base + p.excess_lower;
      pu = base + p.excess_upper;
      fp = transverse::transverse_fd_oracle(a, beta, g, transverse::Kind::Dirichlet, mesh).zeta;
      bp = transverse::fd_error_band(a, beta, g, transverse::Kind::Dirichlet, mesh);
    } catch (const PreconditionError&) {
      ok = false;
    }
    try {
      const auto m = transverse::zeta_minus(a, beta, g);
      zm = m.zeta;
      ml = base + m.excess_lower;
      mu = base + m.excess_upper;
      fm = transverse::transverse_fd_oracle(a, beta, g, transverse::Kind::Robin, mesh).zeta;
      bm = transverse::fd_error_band(a, beta, g, transverse::Kind::Robin, mesh);
    } catch (const PreconditionError&) {
      ok = false;
    }
    t.rows[i] = {fmt(a),  fmt(beta), fmt(g),  fmt(zp), fmt(zm), fmt(pl), fmt(pu),
                 fmt(ml), fmt(mu),   fmt(fp), fmt(fm), fmt(bp), fmt(bm), fmt_bool(ok)};
  });
  return t;
}

Table flux_table(const Json& cfg, const RunOptions& run, bool current_first, const Json& default_phi, int default_n) {
  const auto c = curve_of(cfg);
  const auto Bs = field_grid(cfg, c, default_phi);
  const int n = value_or(cfg, "n", default_n);
  const int N = value_or(cfg, "N", 128);
  const double dphi = value_or(cfg, "dphi", 1e-4);
  const auto rows = comparison::sweep(c, Bs, N, n, dphi, run.jobs);

  Table t;
  t.columns = current_first ? std::vector<std::string>{"phi", "B"} : std::vector<std::string>{"B", "phi"};
  append(t.columns, numbered("mu_", n));
  append(t.columns, numbered("I_", n));
  std::vector<double> lo(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<double> hi(static_cast<std::size_t>(n), -std::numeric_limits<double>::infinity());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    std::vector<std::string> cells =
        current_first ? std::vector<std::string>{fmt(row.phi), fmt(row.B)} : std::vector<std::string>{fmt(row.B), fmt(row.phi)};
    for (int j = 0; j < n; ++j) {
      cells.push_back(fmt(row.mu[static_cast<std::size_t>(j)]));
      lo[static_cast<std::size_t>(j)] = std::min(lo[static_cast<std::size_t>(j)], row.mu[static_cast<std::size_t>(j)]);
      hi[static_cast<std::size_t>(j)] = std::max(hi[static_cast<std::size_t>(j)], row.mu[static_cast<std::size_t>(j)]);
    }
    for (int j = 0; j < n; ++j) cells.push_back(fmt(row.current[static_cast<std::size_t>(j)]));
    t.rows.push_back(std::move(cells));
    for (int j = 0; j < n; ++j)
      if (row.kink[static_cast<std::size_t>(j)])
        t.notes.push_back("warning: eigenvalue crossing inside the difference stencil, row " + std::to_string(r + 1) +
                          ", I_" + std::to_string(j + 1) + " is ambiguous");
    if (!row.converged)
      t.notes.push_back("warning: doubling test failed at row " + std::to_string(r + 1) + " (raise N)");
  }
  if (current_first)
    for (int j = 0; j < n; ++j)
      t.notes.push_back("witness mu_" + std::to_string(j + 1) + " max-min " +
                        fmt(hi[static_cast<std::size_t>(j)] - lo[static_cast<std::size_t>(j)]));
  return t;
}

Table cmd_spectrum(const Json& cfg, const RunOptions& run) {
  if (!cfg.contains("B") && !cfg.contains("phi")) throw ConfigError("spectrum needs 'B' or 'phi'");
  return flux_table(cfg, run, false, Json(), 3);
}

Table cmd_current(const Json& cfg, const RunOptions& run) {
  return flux_table(cfg, run, true, Json{{"from", 0.0}, {"to", 1.0}, {"count", 101}}, 1);
}

struct Solved {
  std::vector<solver2d::Spectrum2D> runs;
  std::optional<solver2d::Extrapolation> ex;
  std::array<double, 4> box{};
};

Solved solve_sequence(const Json& cfg, const RunOptions& run, const geometry::LoopCurve& c, double B, double beta,
                      std::vector<double> hs) {
  if (hs.empty()) throw ConfigError("empty h sequence");
  const auto o = solve_options(cfg, run);
  Solved s;
  s.box = box_of(cfg, c, beta, hs.front());
  if (hs.size() == 1) {
    const lattice::Grid2D g(s.box[0], s.box[1], s.box[2], s.box[3], hs.front());
    s.runs.push_back(solver2d::solve(c, B, beta, g, o));
  } else {
    s.ex = solver2d::refine(c, B, beta, hs, o.k, o, s.box);
    s.runs = s.ex->runs;
  }
  return s;
}

std::vector<double> h_list(const Json& cfg) {
  if (cfg.contains("h_sequence")) return cfg.at("h_sequence").get<std::vector<double>>();
  if (cfg.contains("h")) return {cfg.at("h").get<double>()};
  throw ConfigError("missing config key 'h' or 'h_sequence'");
}

Table cmd_solve2d(const Json& cfg, const RunOptions& run) {
  const auto c = curve_of(cfg);
  const double B = value_or(cfg, "B", 0.0);
  const double beta = require(cfg, "beta").get<double>();
  const int k = value_or(cfg, "k", 1);
  const auto s = solve_sequence(cfg, run, c, B, beta, h_list(cfg));

  Table t;
  t.columns = {"kind", "B", "beta", "h", "box"};
  append(t.columns, numbered("lambda_", k));
  append(t.columns, numbered("residual_", k));
  append(t.columns, numbered("p_", k));
  append(t.columns, numbered("eps_disc_", k));
  for (const auto& r : s.runs) {
    std::vector<std::string> cells{"grid", fmt(B), fmt(beta), fmt(r.h), box_cell(s.box)};
    for (int j = 0; j < k; ++j)
      cells.push_back(j < static_cast<int>(r.eigenvalues.size()) ? fmt(r.eigenvalues[static_cast<std::size_t>(j)]) : "");
    for (int j = 0; j < k; ++j)
      cells.push_back(j < static_cast<int>(r.residuals.size()) ? fmt(r.residuals[static_cast<std::size_t>(j)]) : "");
    cells.resize(cells.size() + 2 * static_cast<std::size_t>(k));
    t.rows.push_back(std::move(cells));
    if (static_cast<int>(r.eigenvalues.size()) < k)
      t.notes.push_back("h " + fmt(r.h) + ": only " + std::to_string(r.eigenvalues.size()) +
                        " eigenvalues below the cutoff " + fmt(r.cutoff));
  }
  if (s.ex) {
    const auto& e = *s.ex;
    std::vector<std::string> cells{"extrapolated", fmt(B), fmt(beta), "0", box_cell(s.box)};
    const auto m = e.lambda_star.size();
    auto pad = [&](const std::vector<double>& v) {
      for (int j = 0; j < k; ++j) cells.push_back(static_cast<std::size_t>(j) < m ? fmt(v[static_cast<std::size_t>(j)]) : "");
    };
    pad(e.lambda_star);
    cells.resize(cells.size() + static_cast<std::size_t>(k));
    pad(e.order);
    pad(e.eps_disc);
    t.rows.push_back(std::move(cells));
    for (std::size_t j = 0; j < m; ++j)
      if (e.order_flag[j])
        t.notes.push_back("warning: observed order of lambda_" + std::to_string(j + 1) + " is " + fmt(e.order[j]) +
                          ", outside [0.8, 2.2]; the run may be under-resolved");
  }
  return t;
}

Table cmd_bracket(const Json& cfg, const RunOptions& run) {
  const auto c = curve_of(cfg);
  const double B = value_or(cfg, "B", 0.0);
  const auto betas = grid_from_config(require(cfg, "beta"));
  const int n = value_or(cfg, "n", 1);
  const bool with_count = value_or(cfg, "count", true);
  const auto o = bracket_options(cfg);

  std::vector<std::vector<bracketing::BracketInterval>> iv(betas.size());
  std::vector<int> counts(betas.size(), -1);
  for_each_point(betas.size(), run.jobs, [&](std::size_t i) {
    iv[i] = bracketing::bracket(c, B, betas[i], n, o);
    if (with_count && iv[i].front().preconds_ok) counts[i] = bracketing::count_guarantee(c, B, betas[i], o).n;
  });

  Table t;
  t.columns = {"B",     "beta",     "a",    "j",   "tau_minus", "tau_plus",    "zeta_minus",
               "zeta_plus", "mu_minus", "mu_plus", "N_B", "M_B",       "preconds_ok", "count_guarantee"};
  const bool join = cfg.contains("join");
  if (join) append(t.columns, {"lambda", "eps_disc", "contained"});
  for (std::size_t i = 0; i < betas.size(); ++i) {
    std::optional<solver2d::Extrapolation> ex;
    if (join) {
      const auto& jc = cfg.at("join");
      ex = solve_sequence(jc, run, c, B, betas[i], require(jc, "h_sequence").get<std::vector<double>>()).ex;
    }
    for (const auto& b : iv[i]) {
      std::vector<std::string> cells{fmt(b.B),          fmt(b.beta),      fmt(b.a_used),   fmt_int(b.j),
                                     fmt(b.tau_minus),  fmt(b.tau_plus),  fmt(b.zeta_minus), fmt(b.zeta_plus),
                                     fmt(b.mu_minus),   fmt(b.mu_plus),   fmt(b.N_B),      fmt(b.M_B),
                                     fmt_bool(b.preconds_ok), counts[i] >= 0 ? fmt_int(counts[i]) : ""};
      if (ex) {
        const auto j = static_cast<std::size_t>(b.j - 1);
        if (j < ex->lambda_star.size()) {
          const double l = ex->lambda_star[j], e = ex->eps_disc[j];
          const bool in = b.tau_minus - e <= l && l <= b.tau_plus + e;
          append(cells, {fmt(l), fmt(e), fmt_bool(in)});
        } else {
          append(cells, {"", "", ""});
        }
      }
      t.rows.push_back(std::move(cells));
    }
  }
  if (!o.strict)
    for (std::size_t i = 0; i < betas.size(); ++i)
      if (!iv[i].front().preconds_ok)
        for (const auto& v : bracketing::violated_preconditions(c, B, betas[i], o))
          t.notes.push_back("beta " + fmt(betas[i]) + ": violated " + v);
  return t;
}

// n-th lowest exact B = 0 level of the circle from the m channels (m >= 1 doubly degenerate).
double circle_level(double R, double beta, int n) {
  std::vector<double> levels;
  for (int m = 0; m <= n && m <= 10; ++m) {
    double e;
    try {
      e = oracle::circle_delta_2d(R, beta, m).energy;
    } catch (const PreconditionError&) {
      break;
    }
    levels.push_back(e);
    if (m > 0) levels.push_back(e);
  }
  std::sort(levels.begin(), levels.end());
  if (static_cast<int>(levels.size()) < n) throw PreconditionError("circle oracle has fewer than n bound states");
  return levels[static_cast<std::size_t>(n - 1)];
}

Table cmd_asymptotics(const Json& cfg, const RunOptions& run) {
  const auto c = curve_of(cfg);
  const double B = value_or(cfg, "B", 0.0);
  const auto betas = grid_from_config(require(cfg, "beta"));
  const int n = value_or(cfg, "n", 1);
  const int N = value_or(cfg, "N", 128);
  const bool use_oracle = value_or(cfg, "oracle", false) && B == 0.0;
  if (use_oracle && value_or<std::string>(cfg.at("curve"), "preset", "") != "circle")
    throw ConfigError("the oracle switch needs the circle preset");

  std::vector<std::vector<double>> hseq;
  if (!use_oracle) {
    if (cfg.contains("h_sequences")) {
      hseq = cfg.at("h_sequences").get<std::vector<std::vector<double>>>();
      if (hseq.size() != betas.size()) throw ConfigError("h_sequences must have one entry per beta");
    } else {
      hseq.assign(betas.size(), require(cfg, "h_sequence").get<std::vector<double>>());
    }
  }
  Json solve_cfg = cfg;
  solve_cfg["k"] = n;
  if (!cfg.contains("box") && !cfg.contains("margin") && !cfg.contains("margin_factor")) solve_cfg["margin_factor"] = 12.0;

  const double mu = comparison::mu_spectrum(c, B, N, n).eigenvalues[static_cast<std::size_t>(n - 1)];
  Table t;
  t.columns = {"B", "beta", "n", "lambda", "mu", "e", "e_normalized", "source", "eps_disc", "order", "order_flag"};
  for (std::size_t i = 0; i < betas.size(); ++i) {
    const double beta = betas[i];
    double lambda, eps = 0.0, p = kNaN;
    bool flag = false;
    std::string source;
    if (use_oracle) {
      lambda = circle_level(value_or(cfg.at("curve"), "R", 1.0), beta, n);
      source = "oracle";
    } else {
      auto s = solve_sequence(solve_cfg, run, c, B, beta, hseq[i]);
      if (!s.ex) throw ConfigError("asymptotics needs h sequences of at least three spacings");
      const auto j = static_cast<std::size_t>(n - 1);
      if (s.ex->lambda_star.size() <= j) throw ConvergenceError("fewer than n bound states found at beta " + fmt(beta));
      lambda = s.ex->lambda_star[j];
      eps = s.ex->eps_disc[j];
      p = s.ex->order[j];
      flag = s.ex->order_flag[j];
      source = "solver2d";
      if (flag) t.notes.push_back("warning: beta " + fmt(beta) + " flagged as under-resolved (order " + fmt(p) + ")");
    }
    const double e = lambda + 0.25 * beta * beta - mu;
    t.rows.push_back({fmt(B), fmt(beta), fmt_int(n), fmt(lambda), fmt(mu), fmt(e), fmt(e * beta / std::log(beta)),
                      source, fmt(eps), fmt(p), fmt_bool(flag)});
  }
  return t;
}

Table cmd_oracle(const Json& cfg, const RunOptions& run) {
  const double R = value_or(cfg, "R", 1.0);
  const auto betas = grid_from_config(require(cfg, "beta"));
  const auto ms = grid_or(cfg, "m", {0.0});
  struct Point {
    double beta;
    int m;
  };
  std::vector<Point> pts;
  for (double b : betas)
    for (double m : ms) {
      if (m != std::floor(m) || m < 0) throw ConfigError("m must be a non-negative integer");
      pts.push_back({b, static_cast<int>(m)});
    }
  Table t;
  t.columns = {"R", "beta", "m", "kappa", "energy", "bound"};
  t.rows.resize(pts.size());
  for_each_point(pts.size(), run.jobs, [&](std::size_t i) {
    double kappa = kNaN, energy = kNaN;
    bool bound = true;
    try {
      const auto l = oracle::circle_delta_2d(R, pts[i].beta, pts[i].m);
      kappa = l.kappa;
      energy = l.energy;
    } catch (const PreconditionError&) {
      bound = false;
    }
    t.rows[i] = {fmt(R), fmt(pts[i].beta), fmt_int(pts[i].m), fmt(kappa), fmt(energy), fmt_bool(bound)};
  });
  return t;
}

}  // namespace

geometry::LoopCurve curve_from_config(const Json& cfg) {
  if (!cfg.is_object()) throw ConfigError("curve must be an object");
  const auto M = value_or<std::size_t>(cfg, "M", 512);
  try {
    if (cfg.contains("preset")) {
      const auto p = cfg.at("preset").get<std::string>();
      if (p == "circle") return geometry::circle(value_or(cfg, "R", 1.0), M);
      if (p == "ellipse") return geometry::ellipse(value_or(cfg, "a", 2.0), value_or(cfg, "b", 1.0), M);
      if (p == "wiggly") return geometry::wiggly(M, value_or(cfg, "amplitude", 0.3), value_or(cfg, "lobes", 3));
      throw ConfigError("unknown curve preset '" + p + "'");
    }
    if (cfg.contains("samples")) {
      std::vector<geometry::Point> pts;
      for (const auto& xy : cfg.at("samples")) {
        if (!xy.is_array() || xy.size() != 2) throw ConfigError("samples must be [x, y] pairs");
        pts.push_back({xy[0].get<double>(), xy[1].get<double>()});
      }
      const auto mode = value_or<std::string>(cfg, "interpolation", "fourier");
      if (mode != "fourier" && mode != "spline") throw ConfigError("interpolation must be 'fourier' or 'spline'");
      return geometry::from_samples(pts, M,
                                    mode == "spline" ? geometry::Interpolation::CubicSpline : geometry::Interpolation::Fourier);
    }
    if (cfg.contains("curvature")) {
      const auto& k = cfg.at("curvature");
      const double L = require(k, "L").get<double>();
      const auto& gc = require(k, "gamma_coeffs");
      const double mean = value_or(gc, "mean", -2 * kPi / L);
      const auto cs = value_or(gc, "cos", std::vector<double>{});
      const auto ss = value_or(gc, "sin", std::vector<double>{});
      auto gamma = [=](double s) {
        double g = mean;
        for (std::size_t j = 0; j < cs.size(); ++j) g += cs[j] * std::cos(2 * kPi * static_cast<double>(j + 1) * s / L);
        for (std::size_t j = 0; j < ss.size(); ++j) g += ss[j] * std::sin(2 * kPi * static_cast<double>(j + 1) * s / L);
        return g;
      };
      return geometry::from_curvature(gamma, L, M);
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("curve: ") + e.what());
  }
  throw ConfigError("curve needs one of 'preset', 'samples', 'curvature'");
}

std::vector<double> grid_from_config(const Json& v) {
  try {
    if (v.is_number()) return {v.get<double>()};
    if (v.is_array()) return v.get<std::vector<double>>();
    if (v.is_object()) {
      const double from = require(v, "from").get<double>();
      const double to = require(v, "to").get<double>();
      const int count = require(v, "count").get<int>();
      if (count < 2) throw ConfigError("grid count must be at least 2");
      std::vector<double> g(static_cast<std::size_t>(count));
      for (int i = 0; i < count; ++i) g[static_cast<std::size_t>(i)] = from + (to - from) * i / (count - 1);
      return g;
    }
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  throw ConfigError("a grid must be a number, a list, or {from, to, count}");
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Table run_command(const std::string& command, const Json& cfg, const RunOptions& run) {
  if (command == "geometry") return cmd_geometry(cfg, run);
  if (command == "transverse") return cmd_transverse(cfg, run);
  if (command == "spectrum") return cmd_spectrum(cfg, run);
  if (command == "current") return cmd_current(cfg, run);
  if (command == "bracket") return cmd_bracket(cfg, run);
  if (command == "solve2d") return cmd_solve2d(cfg, run);
  if (command == "asymptotics") return cmd_asymptotics(cfg, run);
  if (command == "oracle") return cmd_oracle(cfg, run);
  throw ConfigError("unknown command '" + command + "'");
}

std::string render(const std::string& command, const Json& cfg, const Table& t) {
  std::ostringstream os;
  os << "# deltaloop " << kVersion << "\n# command: " << command << "\n# config: " << cfg.dump() << "\n";
  for (const auto& n : t.notes) os << "# " << n << "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << "\n";
  }
  return os.str();
}

int execute(const std::string& command, Json cfg, const RunOptions& run, std::ostream& out, std::ostream& log) {
  try {
    if (run.seed_set) cfg["seed"] = run.seed;
    const auto t = run_command(command, cfg, run);
    out << render(command, cfg, t);
    return kOk;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const Json::exception& e) {
    log << "config error: " << e.what() << "\n";
    return kUsage;
  } catch (const PreconditionError& e) {
    log << "precondition violated: " << e.what() << "\n";
    return kPrecondition;
  } catch (const ConvergenceError& e) {
    log << "no convergence: " << e.what() << "\n";
    return kConvergence;
  }
}

}  // namespace deltaloop::harness
