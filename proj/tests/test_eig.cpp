// SPDX-License-Identifier: Apache-2.0

#include "qmcev/eig.hpp"
#include "qmcev/rng.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

using namespace qmcev;

namespace
{

constexpr double pi = std::numbers::pi;

Eigen::MatrixXd dense_sym(const SparseSym& S)
{
  Eigen::MatrixXd D = Eigen::MatrixXd(S);
  Eigen::MatrixXd full = D + D.transpose();
  full.diagonal() = D.diagonal();
  return full;
}

ParamVector random_y(int i, int s)
{
  ParamVector y(s);
  for (int j = 0; j < s; ++j) y[j] = uniform01(99, std::uint64_t(i), std::uint64_t(j)) - 0.5;
  return y;
}

// Eigenvalues of A^{-1} M from the symmetric form L^{-1} M L^{-T}; returns
// 1 / mu in ascending order of lambda, skipping mu <= 0.
std::vector<double> dense_lambdas(const SparseSym& As, const SparseSym& Ms)
{
  const Eigen::MatrixXd A = dense_sym(As);
  const Eigen::MatrixXd M = dense_sym(Ms);
  const Eigen::LLT<Eigen::MatrixXd> llt(A);
  const Eigen::MatrixXd L = llt.matrixL();
  const Eigen::MatrixXd Linv = L.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(A.rows(), A.cols()));
  Eigen::MatrixXd S = Linv * M * Linv.transpose();
  S = 0.5 * (S + S.transpose()).eval();
  const Eigen::VectorXd mu = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S).eigenvalues();
  std::vector<double> out;
  for (Eigen::Index i = mu.size() - 1; i >= 0; --i)
    if (mu[i] > 1e-12 * mu.maxCoeff()) out.push_back(1.0 / mu[i]);
  return out;
}

SparseSym diagonal(std::initializer_list<double> d)
{
  SparseSym S(Eigen::Index(d.size()), Eigen::Index(d.size()));
  int i = 0;
  for (double v : d) {
    S.insert(i, i) = v;
    ++i;
  }
  S.makeCompressed();
  return S;
}

}  // namespace

TEST_SUITE("eig")
{
  TEST_CASE("one by one pencil")
  {
    const Pencil p = assemble_pencil(build_mesh(2), CoefficientField::constant_laplace(), ParamVector::Zero(1));
    const auto pairs = smallest_eigenpairs(p.A, p.M);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].lambda == doctest::Approx(32.0).epsilon(1e-14));
    CHECK(pairs[0].vector[0] == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));
  }

  TEST_CASE("identical matrices give lambda = 1")
  {
    const Pencil p = assemble_pencil(build_mesh(8), CoefficientField::problem1(2.0), random_y(0, 5));
    const auto pairs = smallest_eigenpairs(p.A, p.A);
    CHECK(pairs[0].lambda == doctest::Approx(1.0).epsilon(1e-13));
  }

  TEST_CASE("fundamental eigenvalue of the Laplacian")
  {
    const Pencil p = assemble_pencil(build_mesh(64), CoefficientField::constant_laplace(), ParamVector::Zero(1));
    SolverConfig cfg;
    cfg.n_pairs = 2;
    const auto one = smallest_eigenpairs(p.A, p.M);
    const auto two = smallest_eigenpairs(p.A, p.M, cfg);
    CHECK(one[0].lambda > 2 * pi * pi);
    CHECK(one[0].lambda <= 2 * pi * pi + 0.05);
    CHECK(two[0].lambda == doctest::Approx(one[0].lambda).epsilon(1e-12));
    CHECK(two[1].lambda == doctest::Approx(5 * pi * pi).epsilon(5e-3));
    CHECK(two[1].lambda > 5 * pi * pi);
    CHECK(one[0].residual <= 1e-10);
  }

  TEST_CASE("eigenvectors are M-normalised, M-orthogonal and sign fixed")
  {
    const Pencil p = assemble_pencil(build_mesh(16), CoefficientField::problem1(4.0 / 3.0), random_y(1, 16));
    SolverConfig cfg;
    cfg.n_pairs = 2;
    const auto pairs = smallest_eigenpairs(p.A, p.M, cfg);
    const Eigen::VectorXd& v1 = pairs[0].vector;
    const Eigen::VectorXd& v2 = pairs[1].vector;
    CHECK(v1.dot(sym_multiply(p.M, v1)) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(v2.dot(sym_multiply(p.M, v2)) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(v1.dot(sym_multiply(p.M, v2))) < 1e-8);
    CHECK(v1.sum() >= 0.0);
    CHECK(v2.sum() >= 0.0);
    CHECK((v1.array() > 0.0).all());  // the ground state does not change sign
    for (const EigenPair& e : pairs) {
      const Eigen::VectorXd r = sym_multiply(p.A, e.vector) - e.lambda * sym_multiply(p.M, e.vector);
      CHECK(r.norm() / sym_multiply(p.A, e.vector).norm() <= 1e-10);
    }
  }

  TEST_CASE("dense generalised eigensolver agrees")
  {
    for (int i = 0; i < 5; ++i) {
      const Pencil p = assemble_pencil(build_mesh(8), CoefficientField::problem1(2.0), random_y(i, 12));
      const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> dense(dense_sym(p.A), dense_sym(p.M));
      SolverConfig cfg;
      cfg.n_pairs = 2;
      const auto pairs = smallest_eigenpairs(p.A, p.M, cfg);
      CHECK(pairs[0].lambda == doctest::Approx(dense.eigenvalues()[0]).epsilon(1e-12));
      CHECK(pairs[1].lambda == doctest::Approx(dense.eigenvalues()[1]).epsilon(1e-12));
      const auto single = smallest_eigenpairs(p.A, p.M);
      CHECK(single[0].lambda == doctest::Approx(dense.eigenvalues()[0]).epsilon(1e-12));
    }
  }

  TEST_CASE("singular mass matrix")
  {
    const auto field = CoefficientField::problem2(2, 2, 2, 2);
    for (int i = 0; i < 3; ++i) {
      const Pencil p = assemble_pencil(build_mesh(16), field, random_y(10 + i, 8));
      const std::vector<double> oracle = dense_lambdas(p.A, p.M);
      SolverConfig cfg;
      cfg.n_pairs = 2;
      const auto pairs = smallest_eigenpairs(p.A, p.M, cfg);
      CHECK(pairs[0].lambda == doctest::Approx(oracle[0]).epsilon(1e-11));
      CHECK(pairs[1].lambda == doctest::Approx(oracle[1]).epsilon(1e-11));
      CHECK(smallest_eigenpairs(p.A, p.M)[0].lambda == doctest::Approx(oracle[0]).epsilon(1e-11));
    }
  }

  TEST_CASE("eigenvalue decreases under mesh refinement")
  {
    const auto field = CoefficientField::problem1(2.0);
    const ParamVector y = random_y(7, 8);
    double prev = std::numeric_limits<double>::infinity();
    for (int m : {4, 8, 16, 32}) {
      const Pencil p = assemble_pencil(build_mesh(m), field, y);
      const double lambda = smallest_eigenpairs(p.A, p.M)[0].lambda;
      CHECK(lambda < prev);
      prev = lambda;
    }
  }

  TEST_CASE("explicit start vector")
  {
    const Pencil p = assemble_pencil(build_mesh(16), CoefficientField::problem1(2.0), random_y(3, 8));
    PencilSolver solver;
    const double ref = solver.solve(p.A, p.M)[0].lambda;
    const Eigen::VectorXd start = Eigen::VectorXd::LinSpaced(p.A.rows(), 0.5, 1.5);
    CHECK(solver.solve(p.A, p.M, start)[0].lambda == doctest::Approx(ref).epsilon(1e-13));
    CHECK_THROWS_AS(solver.solve(p.A, p.M, Eigen::VectorXd::Ones(3)), std::invalid_argument);
  }

  TEST_CASE("repeated solves are bitwise deterministic")
  {
    const auto field = CoefficientField::problem1(4.0 / 3.0);
    const TriMesh mesh = build_mesh(16);
    const PencilAssembler plan(mesh, field, 10);
    SparseSym A = plan.pattern(), M = plan.pattern();
    PencilSolver reused;
    for (int i = 0; i < 4; ++i) {
      plan.assemble(random_y(i, 10), A, M);
      const auto a = reused.solve(A, M);
      const auto b = smallest_eigenpairs(A, M);
      CHECK(a[0].lambda == b[0].lambda);
      CHECK((a[0].vector - b[0].vector).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  TEST_CASE("island functional")
  {
    const TriMesh mesh = build_mesh(16);
    CHECK(functional_G(Eigen::VectorXd::Ones(mesh.num_dofs), mesh) == doctest::Approx(1.0).epsilon(1e-14));
    Eigen::VectorXd x1(mesh.num_dofs);
    for (int k = 0; k < mesh.num_dofs; ++k) x1[k] = mesh.dof_point(k).x();
    CHECK(functional_G(x1, mesh) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK_THROWS_AS(functional_G(x1, build_mesh(12)), std::invalid_argument);
    CHECK_THROWS_AS(functional_G(Eigen::VectorXd::Ones(3), mesh), std::invalid_argument);
  }

  TEST_CASE("solver configuration and failures")
  {
    SolverConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.tol = 1e-5;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.n_pairs = 3;
    CHECK_THROWS_AS(PencilSolver{cfg}, std::invalid_argument);
    cfg = {};
    cfg.max_iter = 0;
    CHECK_THROWS_AS(PencilSolver{cfg}, std::invalid_argument);

    const Pencil p = assemble_pencil(build_mesh(16), CoefficientField::problem1(2.0), random_y(0, 4));
    cfg = {};
    cfg.max_iter = 2;
    CHECK_THROWS_AS(smallest_eigenpairs(p.A, p.M, cfg), SolverError);
    cfg.n_pairs = 2;
    CHECK_THROWS_AS(smallest_eigenpairs(p.A, p.M, cfg), SolverError);

    CHECK_THROWS_AS(smallest_eigenpairs(diagonal({-1.0, 2.0}), diagonal({1.0, 1.0})), SolverError);
    CHECK_THROWS_AS(smallest_eigenpairs(diagonal({1.0, 2.0}), diagonal({0.0, 0.0})), SolverError);
    cfg = {};
    cfg.n_pairs = 2;
    CHECK_THROWS_AS(smallest_eigenpairs(diagonal({1.0, 2.0}), diagonal({0.0, 0.0}), cfg), SolverError);
    CHECK_THROWS_AS(smallest_eigenpairs(diagonal({1.0}), diagonal({1.0}), cfg), std::invalid_argument);
    CHECK_THROWS_AS(smallest_eigenpairs(diagonal({1.0, 2.0}), diagonal({1.0})), std::invalid_argument);
  }
}
