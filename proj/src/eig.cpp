// SPDX-License-Identifier: Apache-2.0

#include "qmcev/eig.hpp"

#include "qmcev/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace qmcev
{

void SolverConfig::validate() const
{
  if (!(tol > 0.0 && tol < 1e-6)) throw std::invalid_argument("solver tol must lie in (0, 1e-6)");
  if (!(residual_tol > 0.0)) throw std::invalid_argument("solver residual_tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("solver max_iter must be >= 1");
  if (n_pairs != 1 && n_pairs != 2) throw std::invalid_argument("solver n_pairs must be 1 or 2");
}

PencilSolver::PencilSolver(SolverConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void PencilSolver::factorize(const SparseSym& A)
{
  const int n = int(A.rows());
  const int nnz = int(A.nonZeros());
  if (upper_.rows() != n || upper_.nonZeros() != nnz) {
    upper_.resize(n, n);
    upper_.resizeNonZeros(nnz);
  }
  std::copy_n(A.outerIndexPtr(), n + 1, upper_.outerIndexPtr());
  std::copy_n(A.innerIndexPtr(), nnz, upper_.innerIndexPtr());
  std::copy_n(A.valuePtr(), nnz, upper_.valuePtr());

  const bool same_pattern = int(pattern_outer_.size()) == n + 1 && int(pattern_inner_.size()) == nnz &&
                            std::equal(pattern_outer_.begin(), pattern_outer_.end(), A.outerIndexPtr()) &&
                            std::equal(pattern_inner_.begin(), pattern_inner_.end(), A.innerIndexPtr());
  if (!same_pattern) {
    llt_.analyzePattern(upper_);
    pattern_outer_.assign(A.outerIndexPtr(), A.outerIndexPtr() + n + 1);
    pattern_inner_.assign(A.innerIndexPtr(), A.innerIndexPtr() + nnz);
  }
  llt_.factorize(upper_);
  if (llt_.info() != Eigen::Success) throw SolverError("Cholesky breakdown: stiffness matrix is not positive definite");
}

namespace
{

// Deterministic start block: all-ones first column, fixed pseudo-random rest.
Eigen::MatrixXd start_block(Eigen::Index n, Eigen::Index p, std::uint64_t salt)
{
  Eigen::MatrixXd X(n, p);
  X.col(0).setOnes();
  for (Eigen::Index k = 1; k < p; ++k)
    for (Eigen::Index i = 0; i < n; ++i)
      X(i, k) = 2.0 * uniform01(0x5eedb10cULL + salt, std::uint64_t(k), std::uint64_t(i)) - 1.0;
  if (salt != 0)
    for (Eigen::Index i = 0; i < n; ++i) X(i, 0) += 0.5 * (2.0 * uniform01(0xfeedULL + salt, 0, std::uint64_t(i)) - 1.0);
  return X;
}

}  // namespace

std::vector<EigenPair> PencilSolver::solve(const SparseSym& A, const SparseSym& M)
{
  return solve(A, M, Eigen::VectorXd::Ones(A.rows()));
}

std::vector<EigenPair> PencilSolver::solve(const SparseSym& A, const SparseSym& M, const Eigen::VectorXd& start)
{
  const Eigen::Index n = A.rows();
  if (n < 1 || A.cols() != n || M.rows() != n || M.cols() != n)
    throw std::invalid_argument("pencil matrices must be square and of equal size");
  if (cfg_.n_pairs > n) throw std::invalid_argument("more eigenpairs requested than the pencil dimension");
  if (start.size() != n) throw std::invalid_argument("start vector size does not match the pencil");

  factorize(A);

  std::vector<EigenPair> pairs = cfg_.n_pairs == 1 ? lanczos(A, M, start) : subspace_iteration(A, M, start);
  for (EigenPair& pair : pairs) {
    const double norm = pair.vector.dot(sym_multiply(M, pair.vector));
    pair.vector /= std::sqrt(norm);
    if (pair.vector.sum() < 0.0) pair.vector = -pair.vector;
  }
  return pairs;
}

std::vector<EigenPair> PencilSolver::lanczos(const SparseSym& A, const SparseSym& M, const Eigen::VectorXd& start)
{
  const Eigen::Index n = A.rows();
  const Eigen::Index max_basis = std::min<Eigen::Index>(n, 64);

  // The Krylov basis is built from A^{-1} M x so that it lies in the range
  // of T, where the M semi-inner product is definite even for singular M.
  Eigen::VectorXd x = start;
  Eigen::VectorXd Mx = sym_multiply(M, x);
  for (std::uint64_t attempt = 1; !(x.dot(Mx) > 0.0); ++attempt) {
    if (attempt > 3) throw SolverError("iterate has zero M-norm: start vector lies in the null space of M");
    x = start_block(n, 1, attempt).col(0);
    Mx = sym_multiply(M, x);
  }

  basis_.resize(n, max_basis);
  m_basis_.resize(n, max_basis);
  Eigen::MatrixXd& Q = basis_;     // M-orthonormal Lanczos vectors
  Eigen::MatrixXd& MQ = m_basis_;  // M times the columns of Q
  Eigen::VectorXd alpha(max_basis);
  Eigen::VectorXd beta(max_basis);
  double lambda_old = std::numeric_limits<double>::infinity();
  int solves = 0;

  while (solves < cfg_.max_iter) {
    Eigen::VectorXd u = llt_.solve(Mx);
    ++solves;
    Eigen::VectorXd Mu = sym_multiply(M, u);
    double norm = std::sqrt(u.dot(Mu));
    if (!(norm > 0.0)) throw SolverError("iterate has zero M-norm");
    Q.col(0) = u / norm;
    MQ.col(0) = Mu / norm;

    Eigen::Index k = 0;
    for (;;) {
      u = llt_.solve(MQ.col(k));
      ++solves;
      alpha[k] = MQ.col(k).dot(u);
      // two passes of classical Gram-Schmidt against the whole basis
      for (int pass = 0; pass < 2; ++pass) {
        const Eigen::VectorXd c = MQ.leftCols(k + 1).transpose() * u;
        u.noalias() -= Q.leftCols(k + 1) * c;
      }
      Mu = sym_multiply(M, u);
      const double b = std::sqrt(std::max(0.0, u.dot(Mu)));
      beta[k] = b;

      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz;
      if (k == 0) {
        ritz.compute(Eigen::MatrixXd::Constant(1, 1, alpha[0]));
      } else {
        ritz.computeFromTridiagonal(alpha.head(k + 1), beta.head(k), Eigen::ComputeEigenvectors);
      }
      const double theta = ritz.eigenvalues()[k];  // largest eigenvalue of T
      const double lambda = 1.0 / theta;
      const bool invariant = b <= 1e-14 * std::abs(alpha[k]);
      const bool settled = std::abs(lambda - lambda_old) <= cfg_.tol * std::abs(lambda);
      lambda_old = lambda;

      if (settled || invariant || k + 1 == max_basis || solves >= cfg_.max_iter) {
        const Eigen::VectorXd s = ritz.eigenvectors().col(k);
        x.noalias() = Q.leftCols(k + 1) * s;
        Mx.noalias() = MQ.leftCols(k + 1) * s;
        if (settled || invariant) {
          const Eigen::VectorXd Ax = sym_multiply(A, x);
          EigenPair pair;
          pair.lambda = lambda;
          pair.residual = (Ax - lambda * Mx).norm() / Ax.norm();
          pair.iterations = solves;
          if (pair.residual <= cfg_.residual_tol) {
            pair.vector = std::move(x);
            return {std::move(pair)};
          }
        }
        if (invariant || k + 1 == max_basis || solves >= cfg_.max_iter) break;  // restart from the Ritz vector
      }
      Q.col(k + 1) = u / b;
      MQ.col(k + 1) = Mu / b;
      ++k;
    }
  }
  throw SolverError("eigensolver did not converge within " + std::to_string(cfg_.max_iter) + " solves");
}

std::vector<EigenPair> PencilSolver::subspace_iteration(const SparseSym& A, const SparseSym& M,
                                                        const Eigen::VectorXd& start)
{
  const Eigen::Index n = A.rows();
  const Eigen::Index p = std::min<Eigen::Index>(n, cfg_.n_pairs + 2);
  const int want = cfg_.n_pairs;
  const auto M_times = [&M](const Eigen::MatrixXd& X) -> Eigen::MatrixXd {
    return M.selfadjointView<Eigen::Lower>() * X;
  };

  for (std::uint64_t attempt = 0; attempt < 3; ++attempt) {
    Eigen::MatrixXd X = start_block(n, p, attempt);
    if (attempt == 0) X.col(0) = start;
    Eigen::MatrixXd W = M_times(X);
    if (!(X.col(0).dot(W.col(0)) > 0.0)) continue;  // M-null start: perturb and retry

    Eigen::VectorXd lambda = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::infinity());
    for (int it = 1; it <= cfg_.max_iter; ++it) {
      const Eigen::MatrixXd Y = llt_.solve(W);
      const Eigen::MatrixXd MY = M_times(Y);
      Eigen::MatrixXd Ahat = Y.transpose() * W;  // Y^T A Y, since A Y = W
      Eigen::MatrixXd Mhat = Y.transpose() * MY;
      Ahat = 0.5 * (Ahat + Ahat.transpose()).eval();
      Mhat = 0.5 * (Mhat + Mhat.transpose()).eval();

      if (Eigen::LLT<Eigen::MatrixXd>(Mhat).info() != Eigen::Success) break;
      Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> rr(Ahat, Mhat);
      if (rr.info() != Eigen::Success) throw SolverError("Rayleigh-Ritz step failed");
      const Eigen::VectorXd next = rr.eigenvalues();
      X.noalias() = Y * rr.eigenvectors();
      W.noalias() = MY * rr.eigenvectors();

      bool converged = true;
      for (int i = 0; i < want; ++i)
        if (!(std::abs(next[i] - lambda[i]) <= cfg_.tol * std::abs(next[i]))) converged = false;
      lambda = next;
      if (!converged) continue;

      std::vector<EigenPair> pairs(want);
      bool small_residual = true;
      for (int i = 0; i < want; ++i) {
        EigenPair& pair = pairs[i];
        pair.lambda = lambda[i];
        pair.iterations = it;
        pair.vector = X.col(i);
        const Eigen::VectorXd Av = sym_multiply(A, pair.vector);
        pair.residual = (Av - lambda[i] * W.col(i)).norm() / Av.norm();
        if (!(pair.residual <= cfg_.residual_tol)) small_residual = false;
      }
      if (small_residual) return pairs;
    }
    if (std::isfinite(lambda[0]))
      throw SolverError("eigensolver did not converge within " + std::to_string(cfg_.max_iter) + " iterations");
  }
  throw SolverError("iterate has zero M-norm: start vector lies in the null space of M");
}

std::vector<EigenPair> smallest_eigenpairs(const SparseSym& A, const SparseSym& M, const SolverConfig& cfg)
{
  PencilSolver solver(cfg);
  return solver.solve(A, M);
}

double functional_G(const Eigen::VectorXd& u, const TriMesh& mesh)
{
  if (mesh.m % 8 != 0)
    throw std::invalid_argument("functional_G needs m divisible by 8 (got " + std::to_string(mesh.m) + ")");
  if (u.size() != mesh.num_dofs) throw std::invalid_argument("vector size does not match the mesh dofs");

  constexpr double lo = 1.0 / 8.0;
  constexpr double hi = 3.0 / 8.0;
  constexpr double island_area = (hi - lo) * (hi - lo);
  double integral = 0.0;
  for (int t = 0; t < int(mesh.triangles.size()); ++t) {
    const Point c = mesh.centroid(t);
    if (c.x() < lo || c.x() > hi || c.y() < lo || c.y() > hi) continue;
    double sum = 0.0;
    for (int v : mesh.triangles[t])
      if (mesh.dof[v] >= 0) sum += u[mesh.dof[v]];
    integral += mesh.area(t) * sum / 3.0;
  }
  return integral / island_area;
}

}  // namespace qmcev
