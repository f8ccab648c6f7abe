#include "eigfem/eigensolve.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <random>
#include <stdexcept>

namespace eigfem {

namespace {

void canonicalize_sign(Eigen::VectorXd &v) {
  const double scale = v.cwiseAbs().maxCoeff();
  for (int i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > 1e-8 * scale) {
      if (v[i] < 0.0) v = -v;
      return;
    }
}

std::vector<EigenPair> finalize_pairs(const SparseSym &A, const SparseSym &B,
                                      int nev, const Eigen::VectorXd &values,
                                      const Eigen::MatrixXd &vectors) {
  std::vector<EigenPair> pairs(nev);
  for (int k = 0; k < nev; ++k) {
    EigenPair &p = pairs[k];
    p.value = values[k];
    p.vec = vectors.col(k);
    const Eigen::VectorXd bx = B * p.vec;
    p.vec /= std::sqrt(p.vec.dot(bx));
    canonicalize_sign(p.vec);
    p.residual = (A * p.vec - p.value * (B * p.vec)).norm() / (B * p.vec).norm();
  }
  return pairs;
}

std::vector<EigenPair> solve_dense(const SparseSym &A, const SparseSym &B,
                                   int nev) {
  const Eigen::MatrixXd Ad(A), Bd(B);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(Ad, Bd);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("solve_smallest: dense solver failed");
  return finalize_pairs(A, B, nev, solver.eigenvalues().head(nev),
                        solver.eigenvectors().leftCols(nev));
}

}  // namespace

std::vector<EigenPair> solve_smallest(const SparseSym &A, const SparseSym &B,
                                      int nev, const SolveOptions &opts) {
  const int n = static_cast<int>(A.rows());
  if (nev < 1 || nev > n)
    throw std::invalid_argument("solve_smallest: invalid nev");
  if (n <= opts.dense_cutoff) return solve_dense(A, B, nev);

  const int m = std::min(n, nev + opts.extra_block);
  Eigen::SimplicialLDLT<SparseSym> factor(A);
  if (factor.info() != Eigen::Success)
    throw std::runtime_error("solve_smallest: factorization of A failed");

  std::mt19937 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd X(n, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) X(i, j) = gauss(rng);

  Eigen::VectorXd values;
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    const Eigen::MatrixXd Y = factor.solve(B * X);
    const Eigen::MatrixXd SA = Y.transpose() * (A * Y).eval();
    const Eigen::MatrixXd SB = Y.transpose() * (B * Y).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ritz(SA, SB);
    if (ritz.info() != Eigen::Success)
      throw std::runtime_error("solve_smallest: Rayleigh-Ritz failed");
    X = Y * ritz.eigenvectors();
    values = ritz.eigenvalues();

    bool converged = true;
    for (int k = 0; k < nev && converged; ++k) {
      const Eigen::VectorXd x = X.col(k);
      const Eigen::VectorXd bx = B * x;
      converged = (A * x - values[k] * bx).norm() <= opts.tol * bx.norm();
    }
    if (converged)
      return finalize_pairs(A, B, nev, values.head(nev), X.leftCols(nev));
  }

  auto pairs = finalize_pairs(A, B, nev, values.head(nev), X.leftCols(nev));
  double worst = 0.0;
  for (const auto &p : pairs) worst = std::max(worst, p.residual);
  throw std::runtime_error(
      "solve_smallest: no convergence after " +
      std::to_string(opts.max_sweeps) +
      " sweeps (worst residual " + std::to_string(worst) + ")");
}

double rayleigh_quotient(const Eigen::VectorXd &u, const SparseSym &A,
                         const SparseSym &B) {
  const double denom = u.dot(B * u);
  if (denom <= 0.0)
    throw std::invalid_argument("rayleigh_quotient: zero-norm input");
  return u.dot(A * u) / denom;
}

}  // namespace eigfem
