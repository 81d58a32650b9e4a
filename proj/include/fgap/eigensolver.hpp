#pragma once

#include "fgap/fem.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

namespace fgap {

struct EigenPair {
  double lambda = 0;
  Eigen::VectorXd h;  // vertex values, M-normalised, zero on the boundary
  double residual = 0;  // |A h - lambda M h| / |lambda M h|
};

struct EigenOptions {
  double tol = 1e-10;           // relative residual target
  double cluster_tol = 1e-9;    // relative spread treated as degenerate
  int extra = 4;                // block size is k + extra
  int max_iterations = 400;
  std::uint64_t seed = 12345;
};

struct EigenResult {
  std::vector<EigenPair> pairs;
  int iterations = 0;
  double shift = 0;
  int ground_cluster = 1;  // how many computed eigenvalues are tied with lambda_1
};

namespace detail {
using LDLT = Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>>;

// False if K is not positive definite (Sylvester inertia of the pivots).
inline bool try_factor(LDLT& solver, const SpMat& K) {
  solver.compute(K);
  if (solver.info() != Eigen::Success) fail(ErrorCode::factorization_failure, "LDLT factorization failed");
  return solver.vectorD().minCoeff() > 0;
}

inline void factor(LDLT& solver, const SpMat& K) {
  if (!try_factor(solver, K)) fail(ErrorCode::factorization_failure, "shifted operator is not positive definite");
}

// Modified Gram-Schmidt in the M inner product, applied twice.
inline void m_orthonormalize(Eigen::MatrixXd& Y, const SpMat& M) {
  for (int pass = 0; pass < 2; ++pass)
    for (Eigen::Index j = 0; j < Y.cols(); ++j) {
      for (Eigen::Index i = 0; i < j; ++i) {
        const double c = Y.col(i).dot(M * Y.col(j));
        Y.col(j) -= c * Y.col(i);
      }
      const double nrm = std::sqrt(Y.col(j).dot(M * Y.col(j)));
      if (!(nrm > 0)) fail(ErrorCode::solver_stagnation, "block lost rank");
      Y.col(j) /= nrm;
    }
}

// Rayleigh-Ritz on an M-orthonormal block: returns ascending Ritz values and rotates Y.
inline Eigen::VectorXd rayleigh_ritz(Eigen::MatrixXd& Y, const SpMat& A) {
  Eigen::MatrixXd H = Y.transpose() * (A * Y);
  H = 0.5 * (H + H.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  Y = (Y * es.eigenvectors()).eval();
  return es.eigenvalues();
}

inline double rel_residual(const SpMat& A, const SpMat& M, const Eigen::VectorXd& x, double lambda) {
  const Eigen::VectorXd Mx = M * x;
  return (A * x - lambda * Mx).norm() / (std::abs(lambda) * Mx.norm());
}
}  // namespace detail

// Smallest k Dirichlet eigenpairs by block shift-invert subspace iteration:
// a coarse phase at shift 0, then a refinement phase with the shift just below
// lambda_1. Numerically degenerate clusters are resolved by a fixed rule: the
// first vector is the projection of the constant function onto the cluster.
inline EigenResult smallest_eigenpairs(const DiscreteForms& F, int k, const EigenOptions& opt = {}) {
  require(k >= 1, ErrorCode::invalid_argument, "need at least one eigenpair");
  const auto n = Eigen::Index(F.num_dofs());
  if (n < 10 * k) fail(ErrorCode::invalid_argument, "reduced dimension below 10k");
  const int p = int(std::min<Eigen::Index>(k + opt.extra, n));
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> N01;
  Eigen::MatrixXd Y(n, p);
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index i = 0; i < n; ++i) Y(i, j) = N01(rng);
  detail::m_orthonormalize(Y, F.M);

  EigenResult R;
  detail::LDLT solver;
  auto converged = [&](const Eigen::VectorXd& theta, double tol) {
    for (int i = 0; i < k; ++i)
      if (detail::rel_residual(F.A, F.M, Y.col(i), theta[i]) > tol) return false;
    return true;
  };
  auto sweep = [&](double tol, int min_steps) {
    Eigen::VectorXd theta;
    for (int it = 0;; ++it) {
      Y = solver.solve((F.M * Y).eval());
      detail::m_orthonormalize(Y, F.M);
      theta = detail::rayleigh_ritz(Y, F.A);
      ++R.iterations;
      if (it + 1 >= min_steps && converged(theta, tol)) return theta;
      if (R.iterations >= opt.max_iterations) fail(ErrorCode::solver_stagnation, "eigensolver did not converge");
    }
  };
  detail::factor(solver, F.A);
  Eigen::VectorXd theta = sweep(1e-3, 1);
  // Refinement just below lambda_1; positive pivots certify the shift is below it.
  double gap = 1e-4;
  for (;; gap *= 10) {
    require(gap < 1, ErrorCode::factorization_failure, "no definite shift below the smallest Ritz value");
    R.shift = theta[0] * (1 - gap);
    if (detail::try_factor(solver, (F.A - R.shift * F.M).eval())) break;
  }
  theta = sweep(opt.tol, 3);

  // Degenerate cluster at the bottom of the spectrum.
  int c = 1;
  while (c < p && theta[c] - theta[0] <= opt.cluster_tol * theta[0]) ++c;
  R.ground_cluster = c;
  if (c > 1) {
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);
    Eigen::MatrixXd Q = Y.leftCols(c);
    const Eigen::VectorXd coef = Q.transpose() * (F.M * ones);
    Eigen::MatrixXd B(n, c);
    B.col(0) = Q * coef;
    for (int j = 1; j < c; ++j) B.col(j) = Q.col(j);
    detail::m_orthonormalize(B, F.M);
    Y.leftCols(c) = B;
  }
  for (int i = 0; i < k; ++i) {
    EigenPair e;
    e.lambda = theta[i];
    e.residual = detail::rel_residual(F.A, F.M, Y.col(i), theta[i]);
    e.h = F.to_full(Y.col(i));
    Eigen::Index at;
    e.h.cwiseAbs().maxCoeff(&at);
    if (e.h[at] < 0) e.h = -e.h;
    R.pairs.push_back(std::move(e));
  }
  return R;
}

}  // namespace fgap
