#include "deltaloop/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "deltaloop/errors.hpp"

namespace deltaloop::lattice {

namespace {

int cells(double width, double h) {
  const double r = width / h;
  const double n = std::round(r);
  if (!(n >= 2.0) || std::abs(r - n) > 1e-9 * r)
    throw PreconditionError("box side " + std::to_string(width) + " is not a multiple of h = " + std::to_string(h));
  return static_cast<int>(n);
}

struct Bounds {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
};

Bounds curve_bounds(const geometry::LoopCurve& c) {
  Bounds b;
  // Fourfold oversampling catches extrema between samples.
  const std::size_t n = 4 * c.size();
  for (std::size_t k = 0; k < n; ++k) {
    const auto p = c.position(c.length() * static_cast<double>(k) / static_cast<double>(n));
    b.xmin = std::min(b.xmin, p.x);
    b.xmax = std::max(b.xmax, p.x);
    b.ymin = std::min(b.ymin, p.y);
    b.ymax = std::max(b.ymax, p.y);
  }
  return b;
}

// Root of f(s) = coord(s) - target on [lo, hi] where f changes sign.
template <class F, class D>
double locate(F&& f, D&& df, double lo, double hi) {
  double flo = f(lo);
  double s = lo + (hi - lo) * flo / (flo - f(hi));
  for (int it = 0; it < 60; ++it) {
    const double v = f(s);
    if (v == 0.0) return s;
    ((v < 0.0) == (flo < 0.0) ? lo : hi) = s;
    const double d = df(s);
    double next = d != 0.0 ? s - v / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - s) <= 1e-15 * (1.0 + std::abs(s))) return next;
    s = next;
  }
  return s;
}

}  // namespace

Grid2D::Grid2D(double x0, double x1, double y0, double y1, double h)
    : x0_(x0), x1_(x1), y0_(y0), y1_(y1), h_(h) {
  if (!(h > 0.0) || !(x1 > x0) || !(y1 > y0)) throw PreconditionError("grid needs h > 0 and a non-empty box");
  nx_ = cells(x1 - x0, h) - 1;
  ny_ = cells(y1 - y0, h) - 1;
}

double required_margin(double beta) { return beta > 0.0 ? std::max(4.0 / beta, 0.5) : 0.5; }

Grid2D Grid2D::around(const geometry::LoopCurve& c, double beta, double h, double margin) {
  if (!(h > 0.0)) throw PreconditionError("grid spacing must be positive");
  const double m = margin > 0.0 ? margin : required_margin(beta);
  const auto b = curve_bounds(c);
  auto side = [&](double lo, double hi) {
    const int n = static_cast<int>(std::ceil((hi - lo + 2 * m) / h - 1e-9));
    const double mid = 0.5 * (lo + hi);
    return std::pair{mid - 0.5 * n * h, mid + 0.5 * n * h};
  };
  const auto [x0, x1] = side(b.xmin, b.xmax);
  const auto [y0, y1] = side(b.ymin, b.ymax);
  return {x0, x1, y0, y1, h};
}

void check_grid(const geometry::LoopCurve& c, double beta, const Grid2D& g, double margin) {
  const double m = margin > 0.0 ? margin : required_margin(beta);
  const auto b = curve_bounds(c);
  const double slack = 1e-9 * m;
  if (b.xmin < g.x0() || b.xmax > g.x1() || b.ymin < g.y0() || b.ymax > g.y1())
    throw PreconditionError("curve exits the box");
  const double got = std::min({b.xmin - g.x0(), g.x1() - b.xmax, b.ymin - g.y0(), g.y1() - b.ymax});
  if (got < m - slack)
    throw PreconditionError("box margin " + std::to_string(got) + " is below the required " + std::to_string(m));
  if (!(beta * g.h() < 2.0))
    throw PreconditionError("beta h = " + std::to_string(beta * g.h()) +
                            " >= 2: the transverse decay length 2/beta is not resolved");
}

std::vector<double> deposit(const geometry::LoopCurve& c, const Grid2D& g, double beta, Deposition mode) {
  std::vector<double> w(static_cast<std::size_t>(g.size()), 0.0);
  const double h = g.h();
  const double L = c.length();
  const std::size_t n_seg = std::max<std::size_t>(c.size(), static_cast<std::size_t>(std::ceil(4.0 * L / h)));
  const double ds = L / static_cast<double>(n_seg);
  auto add = [&](int i, int j, double v) {
    if (i < 0 || j < 0 || i >= g.nx() || j >= g.ny()) throw PreconditionError("curve deposits outside the grid");
    w[static_cast<std::size_t>(g.index(i, j))] += v;
  };

  if (mode == Deposition::Bilinear) {
    for (std::size_t k = 0; k < n_seg; ++k) {
      const auto p = c.position((static_cast<double>(k) + 0.5) * ds);
      const double gx = (p.x - g.x0()) / h - 1.0, gy = (p.y - g.y0()) / h - 1.0;
      const int i = static_cast<int>(std::floor(gx)), j = static_cast<int>(std::floor(gy));
      const double fx = gx - i, fy = gy - j;
      add(i, j, ds * (1 - fx) * (1 - fy));
      add(i + 1, j, ds * fx * (1 - fy));
      add(i, j + 1, ds * (1 - fx) * fy);
      add(i + 1, j + 1, ds * fx * fy);
    }
    return w;
  }

  std::vector<geometry::Point> pts(n_seg + 1);
  for (std::size_t k = 0; k < n_seg; ++k) pts[k] = c.position(static_cast<double>(k) * ds);
  pts[n_seg] = pts[0];
  const double kappa = 0.5 * beta;

  // axis 0: lines x = const (vertical links), axis 1: lines y = const (horizontal links).
  for (int axis = 0; axis < 2; ++axis) {
    const double org = axis == 0 ? g.x0() : g.y0();
    const double org_t = axis == 0 ? g.y0() : g.x0();
    auto coord = [&](const geometry::Point& p) { return axis == 0 ? p.x : p.y; };
    for (std::size_t k = 0; k < n_seg; ++k) {
      const double a = (coord(pts[k]) - org) / h, b = (coord(pts[k + 1]) - org) / h;
      const int first = static_cast<int>(std::floor(std::min(a, b))) + 1;
      const int last = static_cast<int>(std::floor(std::max(a, b)));
      for (int m = first; m <= last; ++m) {
        if ((a < m) == (b < m)) continue;
        const double target = org + m * h;
        auto f = [&](double s) { return coord(c.position(s)) - target; };
        auto df = [&](double s) {
          const auto t = c.tangent(s);
          return axis == 0 ? t.x : t.y;
        };
        const double s = locate(f, df, static_cast<double>(k) * ds, static_cast<double>(k + 1) * ds);
        const auto p = c.position(s);
        const auto t = c.tangent(s);
        // Normal component along the link axis.
        const double nl = std::abs(axis == 0 ? t.x : t.y);
        const double gt = ((axis == 0 ? p.y : p.x) - org_t) / h - 1.0;
        const int j0 = static_cast<int>(std::floor(gt));
        const double th = gt - j0;
        const double eps = kappa * nl * h;
        const double w0 = nl * h * (1 - th) * (1 + eps * th);
        const double w1 = nl * h * th * (1 + eps * (1 - th));
        if (axis == 0) {
          add(m - 1, j0, w0);
          add(m - 1, j0 + 1, w1);
        } else {
          add(j0, m - 1, w0);
          add(j0 + 1, m - 1, w1);
        }
      }
    }
  }
  return w;
}

MagneticStencil make_stencil(const Grid2D& g, double B, const std::vector<double>& weights, double beta, double xc,
                             double yc) {
  if (static_cast<std::ptrdiff_t>(weights.size()) != g.size()) throw PreconditionError("weights do not match the grid");
  MagneticStencil st{g, B, xc, yc, {}, {}, {}};
  const double h = g.h();
  const double ih2 = 1.0 / (h * h);
  st.diagonal.resize(weights.size());
  for (std::size_t k = 0; k < weights.size(); ++k) st.diagonal[k] = 4.0 * ih2 - beta * weights[k] * ih2;
  st.x_phase.resize(static_cast<std::size_t>(g.ny()));
  for (int j = 0; j < g.ny(); ++j) st.x_phase[static_cast<std::size_t>(j)] = std::polar(1.0, -0.5 * B * (g.y(j) - yc) * h);
  st.y_phase.resize(static_cast<std::size_t>(g.nx()));
  for (int i = 0; i < g.nx(); ++i) st.y_phase[static_cast<std::size_t>(i)] = std::polar(1.0, 0.5 * B * (g.x(i) - xc) * h);
  return st;
}

namespace {

// Column c of the Hermitian matrix, rows ascending: c-nx, c-1, c, c+1, c+nx.
int column_count(const Grid2D& g, int i, int j) {
  return 1 + (j > 0) + (i > 0) + (i + 1 < g.nx()) + (j + 1 < g.ny());
}

void fill_column(const MagneticStencil& st, std::ptrdiff_t c, int i, int j, int* rows, cd* vals) {
  const Grid2D& g = st.grid;
  const double ih2 = 1.0 / (g.h() * g.h());
  const cd xp = st.x_phase[static_cast<std::size_t>(j)] * ih2;
  const cd yp = st.y_phase[static_cast<std::size_t>(i)] * ih2;
  int k = 0;
  auto put = [&](std::ptrdiff_t r, cd v) {
    rows[k] = static_cast<int>(r);
    vals[k] = v;
    ++k;
  };
  if (j > 0) put(c - g.nx(), -std::conj(yp));
  if (i > 0) put(c - 1, -std::conj(xp));
  put(c, cd(st.diagonal[static_cast<std::size_t>(c)], 0.0));
  if (i + 1 < g.nx()) put(c + 1, -xp);
  if (j + 1 < g.ny()) put(c + g.nx(), -yp);
}

SparseMatrix allocate(const MagneticStencil& st) {
  const Grid2D& g = st.grid;
  const auto n = g.size();
  if (n > std::numeric_limits<int>::max() / 5) throw PreconditionError("grid too large for 32-bit sparse indices");
  SparseMatrix H(n, n);
  std::ptrdiff_t nnz = 0;
  auto* outer = H.outerIndexPtr();
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      outer[g.index(i, j)] = static_cast<int>(nnz);
      nnz += column_count(g, i, j);
    }
  outer[n] = static_cast<int>(nnz);
  H.resizeNonZeros(nnz);
  return H;
}

inline void apply_row(const MagneticStencil& st, const cd* in, cd* out, int i, int j) {
  const Grid2D& g = st.grid;
  const std::ptrdiff_t c = g.index(i, j);
  const cd xp = st.x_phase[static_cast<std::size_t>(j)];
  const cd yp = st.y_phase[static_cast<std::size_t>(i)];
  cd hop = 0.0;
  if (i > 0) hop += xp * in[c - 1];
  if (i + 1 < g.nx()) hop += std::conj(xp) * in[c + 1];
  if (j > 0) hop += yp * in[c - g.nx()];
  if (j + 1 < g.ny()) hop += std::conj(yp) * in[c + g.nx()];
  out[c] = st.diagonal[static_cast<std::size_t>(c)] * in[c] - hop / (g.h() * g.h());
}

}  // namespace

namespace serial {

SparseMatrix assemble(const MagneticStencil& st) {
  SparseMatrix H = allocate(st);
  const Grid2D& g = st.grid;
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const auto c = g.index(i, j);
      const int start = H.outerIndexPtr()[c];
      fill_column(st, c, i, j, H.innerIndexPtr() + start, H.valuePtr() + start);
    }
  return H;
}

void apply(const MagneticStencil& st, const cd* in, cd* out) {
  for (int j = 0; j < st.grid.ny(); ++j)
    for (int i = 0; i < st.grid.nx(); ++i) apply_row(st, in, out, i, j);
}

}  // namespace serial

namespace omp {

SparseMatrix assemble(const MagneticStencil& st) {
  SparseMatrix H = allocate(st);
  const Grid2D& g = st.grid;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) {
      const auto c = g.index(i, j);
      const int start = H.outerIndexPtr()[c];
      fill_column(st, c, i, j, H.innerIndexPtr() + start, H.valuePtr() + start);
    }
  return H;
}

void apply(const MagneticStencil& st, const cd* in, cd* out) {
#pragma omp parallel for schedule(static)
  for (int j = 0; j < st.grid.ny(); ++j)
    for (int i = 0; i < st.grid.nx(); ++i) apply_row(st, in, out, i, j);
}

}  // namespace omp

Assembled assemble_H(const geometry::LoopCurve& c, double B, double beta, const Grid2D& g,
                     const AssemblyOptions& o) {
  if (!std::isfinite(B) || !(beta >= 0.0)) throw PreconditionError("need finite B and beta >= 0");
  check_grid(c, beta, g, o.margin);
  const auto w = deposit(c, g, beta, o.deposition);
  double total = 0.0;
  for (double v : w) total += v;
  const auto st = make_stencil(g, B, w, beta, o.gauge_x, o.gauge_y);
  return {omp::assemble(st), g, total};
}

}  // namespace deltaloop::lattice
