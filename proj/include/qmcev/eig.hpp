// SPDX-License-Identifier: Apache-2.0

#ifndef QMCEV_EIG_HPP
#define QMCEV_EIG_HPP

#include "qmcev/fem.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCholesky>

#include <stdexcept>
#include <vector>

namespace qmcev
{

class SolverError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct EigenPair
{
  double lambda = 0.0;
  Eigen::VectorXd vector;  // M-normalised, sum of entries >= 0
  double residual = 0.0;   // ||A v - lambda M v|| / ||A v||
  int iterations = 0;
};

struct SolverConfig
{
  double tol = 1e-14;           // relative eigenvalue change
  double residual_tol = 1e-10;  // backstop on the relative residual
  int max_iter = 10000;
  int n_pairs = 1;

  void validate() const;
};

/// Generalised eigensolver for the smallest eigenpairs of A v = lambda M v,
/// with A symmetric positive definite and M symmetric positive semidefinite.
///
/// Works with the compact operator T = A^{-1} M, which is self-adjoint in
/// the M inner product and whose largest eigenvalues are 1 / lambda_k. A is
/// factored once per solve by sparse Cholesky (fixed shift 0); the symbolic
/// factorisation is cached while the sparsity pattern of A stays the same,
/// so one solver per worker amortises it over all y.
///
/// The fundamental pair comes from M-orthogonal Lanczos on T started from
/// A^{-1} M 1. Two pairs use block inverse iteration with Rayleigh-Ritz on a
/// block of four, which keeps the second Ritz value converging even when
/// lambda_2 and lambda_3 nearly coincide.
///
/// Converged when the relative change of every requested lambda is <= tol
/// and every relative residual ||A v - lambda M v|| / ||A v|| is <= residual_tol.
class PencilSolver
{
public:
  explicit PencilSolver(SolverConfig cfg = {});

  const SolverConfig& config() const { return cfg_; }

  /// Eigenpairs in ascending order of lambda.
  std::vector<EigenPair> solve(const SparseSym& A, const SparseSym& M);
  /// Same, with the iteration started from `start` instead of all-ones.
  std::vector<EigenPair> solve(const SparseSym& A, const SparseSym& M, const Eigen::VectorXd& start);

private:
  // CSR lower triangle reinterpreted as CSC upper triangle of the same matrix.
  using Factor = Eigen::SimplicialLLT<Eigen::SparseMatrix<double, Eigen::ColMajor, int>, Eigen::Upper,
                                      Eigen::AMDOrdering<int>>;

  void factorize(const SparseSym& A);
  std::vector<EigenPair> lanczos(const SparseSym& A, const SparseSym& M, const Eigen::VectorXd& start);
  std::vector<EigenPair> subspace_iteration(const SparseSym& A, const SparseSym& M, const Eigen::VectorXd& start);

  SolverConfig cfg_;
  Factor llt_;
  // workspace reused across solves
  Eigen::SparseMatrix<double, Eigen::ColMajor, int> upper_;
  Eigen::MatrixXd basis_;
  Eigen::MatrixXd m_basis_;
  std::vector<int> pattern_outer_;
  std::vector<int> pattern_inner_;
};

std::vector<EigenPair> smallest_eigenpairs(const SparseSym& A, const SparseSym& M, const SolverConfig& cfg = {});

/// Mean of the P1 interpolant of a dof vector over the island [1/8, 3/8]^2.
double functional_G(const Eigen::VectorXd& u, const TriMesh& mesh);

}  // namespace qmcev

#endif  // QMCEV_EIG_HPP
