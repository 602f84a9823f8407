#pragma once

#include <Eigen/Sparse>

#include <complex>
#include <vector>

#include "deltaloop/geometry.hpp"

namespace deltaloop::lattice {

using cd = std::complex<double>;
using SparseMatrix = Eigen::SparseMatrix<cd>;

/// Interior nodes of a uniform grid on [x0,x1] x [y0,y1] (Dirichlet on the boundary).
/// Node (i, j) sits at (x0 + (i+1) h, y0 + (j+1) h) and has index j nx + i.
class Grid2D {
 public:
  /// Requires both box sides to be integer multiples of h.
  Grid2D(double x0, double x1, double y0, double y1, double h);

  /// Square-ish box around the curve with the given margin (0 selects max(4/beta, 0.5)),
  /// widened so both sides are multiples of h.
  static Grid2D around(const geometry::LoopCurve& curve, double beta, double h, double margin = 0.0);

  [[nodiscard]] double x0() const { return x0_; }
  [[nodiscard]] double x1() const { return x1_; }
  [[nodiscard]] double y0() const { return y0_; }
  [[nodiscard]] double y1() const { return y1_; }
  [[nodiscard]] double h() const { return h_; }
  [[nodiscard]] int nx() const { return nx_; }
  [[nodiscard]] int ny() const { return ny_; }
  [[nodiscard]] std::ptrdiff_t size() const { return static_cast<std::ptrdiff_t>(nx_) * ny_; }
  [[nodiscard]] double x(int i) const { return x0_ + (i + 1) * h_; }
  [[nodiscard]] double y(int j) const { return y0_ + (j + 1) * h_; }
  [[nodiscard]] std::ptrdiff_t index(int i, int j) const { return static_cast<std::ptrdiff_t>(j) * nx_ + i; }

 private:
  double x0_, x1_, y0_, y1_, h_;
  int nx_, ny_;
};

/// Margin rule max(4/beta, 0.5).
double required_margin(double beta);

/// Throws PreconditionError when the curve leaves the box, the margin rule
/// fails, or beta h >= 2 (transverse decay length 2/beta unresolved).
void check_grid(const geometry::LoopCurve& curve, double beta, const Grid2D& grid, double margin = 0.0);

enum class Deposition {
  /// Crossings of the curve with grid links, weighted by the normal component
  /// along the link and corrected for the cusp of the transverse profile.
  LinkCorrected,
  /// Arc segments of length <= h/4 spread bilinearly to the four surrounding nodes.
  Bilinear,
};

/// Node weights w with -beta w / h^2 on the diagonal; the sum approximates L
/// (exactly L for Bilinear).
std::vector<double> deposit(const geometry::LoopCurve& curve, const Grid2D& grid, double beta, Deposition mode);

/// Peierls link phases for A = (B/2)(-(y - yc), x - xc).
struct MagneticStencil {
  Grid2D grid;
  double B = 0.0;
  double xc = 0.0, yc = 0.0;
  std::vector<double> diagonal;  // 4/h^2 - beta w/h^2
  std::vector<cd> x_phase;       // per row j: exp(-i (B/2)(y_j - yc) h)
  std::vector<cd> y_phase;       // per column i: exp(+i (B/2)(x_i - xc) h)
};

MagneticStencil make_stencil(const Grid2D& grid, double B, const std::vector<double>& weights, double beta,
                             double xc = 0.0, double yc = 0.0);

namespace serial {
SparseMatrix assemble(const MagneticStencil& st);
void apply(const MagneticStencil& st, const cd* in, cd* out);
}  // namespace serial

namespace omp {
SparseMatrix assemble(const MagneticStencil& st);
void apply(const MagneticStencil& st, const cd* in, cd* out);
}  // namespace omp

struct AssemblyOptions {
  Deposition deposition = Deposition::LinkCorrected;
  double gauge_x = 0.0;
  double gauge_y = 0.0;
  double margin = 0.0;  // 0 selects the rule
};

struct Assembled {
  SparseMatrix H;
  Grid2D grid;
  /// Sum of the deposited weights (approximates L).
  double deposited_total = 0.0;
};

/// Five-point magnetic Laplacian with the delta term; every stored entry
/// satisfies H(r, c) == conj(H(c, r)) exactly.
Assembled assemble_H(const geometry::LoopCurve& curve, double B, double beta, const Grid2D& grid,
                     const AssemblyOptions& options = {});

}  // namespace deltaloop::lattice
