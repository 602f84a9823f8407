#include "deltaloop/eigensolver.hpp"

#include <Eigen/CholmodSupport>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "deltaloop/errors.hpp"

namespace deltaloop::eigensolver {

namespace {

using cd = std::complex<double>;
using Sparse = Eigen::SparseMatrix<cd>;

class ShiftedFactor {
 public:
  explicit ShiftedFactor(const Sparse& H) : H_(H) {
    llt_.cholmod().print = 0;
    llt_.analyzePattern(H_);
  }

  // True when H - sigma is numerically positive definite.
  bool factor(double sigma) {
    llt_.setShift(-sigma);
    llt_.factorize(H_);
    ++count_;
    return llt_.info() == Eigen::Success;
  }

  Eigen::MatrixXcd solve(const Eigen::MatrixXcd& b) const { return llt_.solve(b); }
  [[nodiscard]] int count() const { return count_; }

 private:
  const Sparse& H_;
  Eigen::CholmodSupernodalLLT<Sparse, Eigen::Lower> llt_;
  int count_ = 0;
};

Eigen::MatrixXcd orthonormal(const Eigen::MatrixXcd& Y) {
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(Y);
  return qr.householderQ() * Eigen::MatrixXcd::Identity(Y.rows(), Y.cols());
}

Eigen::MatrixXcd seeded_block(Eigen::Index n, int p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  Eigen::MatrixXcd X(n, p);
  for (Eigen::Index c = 0; c < p; ++c)
    for (Eigen::Index r = 0; r < n; ++r) X(r, c) = cd(d(rng), d(rng));
  return X;
}

}  // namespace

Result lowest(const Sparse& H, int k, double sigma, const Options& o) {
  const auto n = H.rows();
  if (H.cols() != n) throw PreconditionError("matrix must be square");
  if (k < 1 || k > n) throw PreconditionError("k must lie in [1, n]");
  const int p = static_cast<int>(std::min<Eigen::Index>(n, k + std::max(4, k / 2)));

  ShiftedFactor F(H);
  double shift = sigma;
  bool ok = F.factor(shift);
  for (int retry = 0; !ok && retry < 3; ++retry) {
    shift -= 0.1 * (1.0 + std::abs(shift)) * std::pow(2.0, retry);
    ok = F.factor(shift);
  }
  if (!ok) throw ConvergenceError("factorization of H - sigma failed at sigma = " + std::to_string(sigma) + " and three lower shifts");

  Result r;
  r.seed = o.seed;
  Eigen::MatrixXcd X = orthonormal(seeded_block(n, p, o.seed));
  Eigen::VectorXd theta;
  Eigen::VectorXd res(p);
  for (int it = 1; it <= o.max_iterations; ++it) {
    const Eigen::MatrixXcd Q = orthonormal(F.solve(X));
    const Eigen::MatrixXcd HQ = H * Q;
    Eigen::MatrixXcd G = Q.adjoint() * HQ;
    G = 0.5 * (G + G.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);
    if (es.info() != Eigen::Success) throw ConvergenceError("Rayleigh-Ritz eigensolver failed");
    theta = es.eigenvalues();
    X = Q * es.eigenvectors();
    const Eigen::MatrixXcd R = HQ * es.eigenvectors() - X * theta.asDiagonal();
    for (int j = 0; j < p; ++j) res[j] = R.col(j).norm();
    r.iterations = it;

    if (res.head(k).maxCoeff() <= o.tolerance) break;
    if (it == o.max_iterations)
      throw ConvergenceError("subspace iteration did not reach residual " + std::to_string(o.tolerance) + " in " +
                             std::to_string(o.max_iterations) + " iterations (worst " +
                             std::to_string(res.head(k).maxCoeff()) + ")");

    // Move the shift up when it would at least halve the distance to the lowest
    // Ritz value; stay a tenth of the Ritz spread below it to keep the solves
    // well conditioned.
    const double margin = std::max(2.0 * res[0], 0.1 * (theta[p - 1] - theta[0]));
    const double candidate = theta[0] - margin;
    if (candidate > shift && candidate - shift > 0.5 * (theta[0] - shift)) {
      double trial = candidate;
      bool moved = false;
      for (int attempt = 0; attempt < 3 && !moved; ++attempt) {
        moved = F.factor(trial);
        if (!moved) trial = shift + 0.5 * (trial - shift);
      }
      if (moved)
        shift = trial;
      else if (!F.factor(shift))
        throw ConvergenceError("refactorization at a previously accepted shift failed");
    }
  }

  r.shift = shift;
  r.factorizations = F.count();
  r.values.assign(theta.data(), theta.data() + k);
  r.residuals.assign(res.data(), res.data() + k);
  r.vectors = X.leftCols(k);
  return r;
}

}  // namespace deltaloop::eigensolver
