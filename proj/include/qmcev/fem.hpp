// SPDX-License-Identifier: Apache-2.0

#ifndef QMCEV_FEM_HPP
#define QMCEV_FEM_HPP

#include "qmcev/coeff.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <iosfwd>
#include <vector>

namespace qmcev
{

/// Lower triangle of a symmetric matrix in compressed-row storage.
using SparseSym = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

/// Uniform triangulation of the unit square with m cells per side. Each cell
/// is split along its lower-left to upper-right diagonal. Nodes are numbered
/// row-major (node (i, j) at x = (i h, j h) has id j (m+1) + i); interior
/// nodes get degrees of freedom in the same order.
struct TriMesh
{
  int m = 0;
  std::vector<Point> nodes;
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise
  std::vector<int> dof;                       // node -> dof, -1 on the boundary
  int num_dofs = 0;

  double h() const { return 1.0 / m; }
  /// Grid node coordinates of dof k.
  Point dof_point(int k) const;
  Point centroid(int t) const;
  double area(int t) const;
};

/// Throws std::invalid_argument for m < 2.
TriMesh build_mesh(int m);

/// Edge-midpoint rule, exact for quadratics: point q sits on the edge from
/// local vertex q to vertex (q+1) mod 3, weights area/3.
struct QuadRule
{
  static constexpr int size = 3;
  /// Value of the local hat function `vertex` at quadrature point q.
  static constexpr double shape(int vertex, int q) { return (vertex == q || vertex == (q + 1) % 3) ? 0.5 : 0.0; }
  static Point point(const TriMesh& mesh, int t, int q);
};

/// Whether the mesh resolves the Problem 2 island boundaries.
bool compatible(const TriMesh& mesh, const CoefficientField& field);

/// Precomputed assembly plan for one (mesh, field, s): sparsity pattern,
/// scatter map and basis-function values at every quadrature point. The
/// plan is immutable after construction and may be shared across threads.
class PencilAssembler
{
public:
  PencilAssembler(const TriMesh& mesh, const CoefficientField& field, int s);

  int dimension() const { return s_; }
  const TriMesh& mesh() const { return *mesh_; }
  const CoefficientField& field() const { return field_; }

  /// Empty matrices with the pencil's sparsity pattern.
  SparseSym pattern() const { return pattern_; }

  /// Overwrites the values of A and M, which must carry pattern().
  void assemble(const ParamRef& y, SparseSym& A, SparseSym& M) const;

  /// Coefficient values at all quadrature points (3 per triangle).
  Eigen::VectorXd quadrature_values(Which which, const ParamRef& y) const;

private:
  // Quadrature points are edge midpoints and lie on the half-grid with
  // spacing h/2; the product-form basis turns the coefficient on that grid
  // into one small matrix product per region.
  struct Expansion
  {
    Eigen::VectorXd mean;               // per quadrature point
    std::array<Eigen::VectorXd, 2> weight;  // per region, s entries; empty if the coefficient is fixed
  };

  Expansion make_expansion(Which which) const;
  void add_parametric(const Expansion& e, const ParamRef& y, Eigen::VectorXd& v) const;

  const TriMesh* mesh_;
  CoefficientField field_;
  int s_;
  SparseSym pattern_;
  // per triangle: gradient Gram matrix times area, row-major 3x3
  std::vector<std::array<double, 9>> stiffness_;
  // per triangle, per local pair (a, b): value index or -1 if not in the lower interior block
  std::vector<std::array<int, 9>> scatter_;
  std::vector<double> area_;
  std::vector<int> region_;      // per triangle, index into Expansion::weight
  std::vector<int> grid_index_;  // per quadrature point, column-major index into the half-grid
  Eigen::MatrixXd wave_x_, wave_y_;  // (2m + 1) x s
  Expansion a_, b_, c_;
};

struct Pencil
{
  SparseSym A;
  SparseSym M;
};

/// One-shot assembly; builds a plan for (mesh, field, y.size()).
Pencil assemble_pencil(const TriMesh& mesh, const CoefficientField& field, const ParamRef& y);

/// Symmetric product with the stored lower triangle.
Eigen::VectorXd sym_multiply(const SparseSym& S, const Eigen::VectorXd& x);

/// Coordinate text dump: one `i j value` line per stored lower entry, 0-based.
void write_coordinate(std::ostream& os, const SparseSym& S);

}  // namespace qmcev

#endif  // QMCEV_FEM_HPP
