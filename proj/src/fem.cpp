// SPDX-License-Identifier: Apache-2.0

#include "qmcev/fem.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace qmcev
{

Point TriMesh::dof_point(int k) const
{
  const int side = m - 1;
  return Point(double(k % side + 1) / m, double(k / side + 1) / m);
}

Point TriMesh::centroid(int t) const
{
  const auto& tri = triangles[t];
  return (nodes[tri[0]] + nodes[tri[1]] + nodes[tri[2]]) / 3.0;
}

double TriMesh::area(int t) const
{
  const auto& tri = triangles[t];
  const Point e1 = nodes[tri[1]] - nodes[tri[0]];
  const Point e2 = nodes[tri[2]] - nodes[tri[0]];
  return 0.5 * (e1.x() * e2.y() - e1.y() * e2.x());
}

TriMesh build_mesh(int m)
{
  if (m < 2) throw std::invalid_argument("mesh needs m >= 2 cells per side, got " + std::to_string(m));

  TriMesh mesh;
  mesh.m = m;
  const int side = m + 1;
  mesh.nodes.reserve(std::size_t(side) * side);
  mesh.dof.assign(std::size_t(side) * side, -1);
  for (int j = 0; j <= m; ++j)
    for (int i = 0; i <= m; ++i) {
      const int id = j * side + i;
      // integer coordinates divided once, so island corners i/8 are exact
      mesh.nodes.emplace_back(double(i) / m, double(j) / m);
      if (i > 0 && i < m && j > 0 && j < m) mesh.dof[id] = mesh.num_dofs++;
    }

  mesh.triangles.reserve(2 * std::size_t(m) * m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      const int v00 = j * side + i;
      const int v10 = v00 + 1;
      const int v01 = v00 + side;
      const int v11 = v01 + 1;
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }
  return mesh;
}

Point QuadRule::point(const TriMesh& mesh, int t, int q)
{
  const auto& tri = mesh.triangles[t];
  return 0.5 * (mesh.nodes[tri[q]] + mesh.nodes[tri[(q + 1) % 3]]);
}

bool compatible(const TriMesh& mesh, const CoefficientField& field)
{
  return field.family() != Family::Problem2 || mesh.m % 8 == 0;
}

PencilAssembler::PencilAssembler(const TriMesh& mesh, const CoefficientField& field, int s)
    : mesh_(&mesh), field_(field), s_(s)
{
  if (s < 1) throw std::invalid_argument("truncation dimension must be >= 1");
  if (!compatible(mesh, field))
    throw std::invalid_argument("Problem 2 needs m divisible by 8 so the mesh resolves the islands (m = " +
                                std::to_string(mesh.m) + ")");

  const int nt = int(mesh.triangles.size());
  const int n = mesh.num_dofs;

  // pass 1: structure
  std::vector<Eigen::Triplet<double, int>> entries;
  entries.reserve(std::size_t(nt) * 6);
  for (const auto& tri : mesh.triangles)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const int r = mesh.dof[tri[a]];
        const int c = mesh.dof[tri[b]];
        if (r >= 0 && c >= 0 && r >= c) entries.emplace_back(r, c, 0.0);
      }
  pattern_.resize(n, n);
  pattern_.setFromTriplets(entries.begin(), entries.end());
  pattern_.makeCompressed();

  // pass 2: scatter positions and element geometry
  const int* outer = pattern_.outerIndexPtr();
  const int* inner = pattern_.innerIndexPtr();
  scatter_.resize(nt);
  stiffness_.resize(nt);
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangles[t];
    const double area = mesh.area(t);
    std::array<Point, 3> grad;
    for (int a = 0; a < 3; ++a) {
      const Point& p1 = mesh.nodes[tri[(a + 1) % 3]];
      const Point& p2 = mesh.nodes[tri[(a + 2) % 3]];
      grad[a] = Point(p1.y() - p2.y(), p2.x() - p1.x()) / (2.0 * area);
    }
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        stiffness_[t][3 * a + b] = area * grad[a].dot(grad[b]);
        const int r = mesh.dof[tri[a]];
        const int c = mesh.dof[tri[b]];
        int pos = -1;
        if (r >= 0 && c >= 0 && r >= c) {
          const int* hit = std::lower_bound(inner + outer[r], inner + outer[r + 1], c);
          pos = int(hit - inner);
        }
        scatter_[t][3 * a + b] = pos;
      }
  }

  const int g = 2 * mesh.m + 1;
  area_.resize(nt);
  region_.resize(nt);
  grid_index_.resize(std::size_t(nt) * QuadRule::size);
  for (int t = 0; t < nt; ++t) {
    area_[t] = mesh.area(t);
    // Triangles never straddle an island boundary on admissible meshes, so
    // the centroid decides the material for all three quadrature points.
    region_[t] = field_.region(mesh.centroid(t)) == Region::fuel ? 0 : 1;
    for (int q = 0; q < QuadRule::size; ++q) {
      const Point x = QuadRule::point(mesh, t, q);
      const int ix = int(std::lround(x.x() * (g - 1)));
      const int iy = int(std::lround(x.y() * (g - 1)));
      grid_index_[std::size_t(t) * QuadRule::size + q] = ix + g * iy;
    }
  }
  wave_x_.resize(g, s);
  wave_y_.resize(g, s);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < s; ++j) {
      wave_x_(i, j) = field_.wave_x(j + 1, double(i) / (g - 1));
      wave_y_(i, j) = field_.wave_y(j + 1, double(i) / (g - 1));
    }

  a_ = make_expansion(Which::a);
  b_ = make_expansion(Which::b);
  c_ = make_expansion(Which::c);
}

PencilAssembler::Expansion PencilAssembler::make_expansion(Which which) const
{
  const int nt = int(mesh_->triangles.size());
  Expansion e;
  e.mean.resize(std::size_t(nt) * QuadRule::size);
  for (int t = 0; t < nt; ++t) {
    const double mean = field_.mean(which, region_[t] == 0 ? Region::fuel : Region::moderator);
    for (int q = 0; q < QuadRule::size; ++q) e.mean[t * QuadRule::size + q] = mean;
  }
  if (!field_.is_parametric(which)) return e;
  for (int r = 0; r < 2; ++r) {
    e.weight[r].resize(s_);
    for (int j = 0; j < s_; ++j) e.weight[r][j] = field_.basis_weight(which, j + 1, r == 0 ? Region::fuel : Region::moderator);
  }
  return e;
}

void PencilAssembler::add_parametric(const Expansion& e, const ParamRef& y, Eigen::VectorXd& v) const
{
  if (e.weight[0].size() == 0) return;
  const int nt = int(mesh_->triangles.size());
  for (int r = 0; r < 2; ++r) {
    const Eigen::VectorXd coef = e.weight[r].cwiseProduct(y);
    if (coef.isZero(0.0) || std::find(region_.begin(), region_.end(), r) == region_.end()) continue;
    const Eigen::MatrixXd grid = (wave_x_ * coef.asDiagonal()) * wave_y_.transpose();
    const double* gv = grid.data();
    for (int t = 0; t < nt; ++t) {
      if (region_[t] != r) continue;
      for (int q = t * QuadRule::size; q < (t + 1) * QuadRule::size; ++q) v[q] += gv[grid_index_[q]];
    }
  }
}

Eigen::VectorXd PencilAssembler::quadrature_values(Which which, const ParamRef& y) const
{
  const Expansion& e = which == Which::a ? a_ : which == Which::b ? b_ : c_;
  if (e.weight[0].size() == 0) return e.mean;
  if (y.size() != s_)
    throw std::invalid_argument("parameter dimension " + std::to_string(y.size()) + " != assembler dimension " +
                                std::to_string(s_));
  Eigen::VectorXd v = e.mean;
  add_parametric(e, y, v);
  return v;
}

void PencilAssembler::assemble(const ParamRef& y, SparseSym& A, SparseSym& M) const
{
  check_param(y);
  if (y.size() != s_)
    throw std::invalid_argument("parameter dimension " + std::to_string(y.size()) + " != assembler dimension " +
                                std::to_string(s_));
  if (A.nonZeros() != pattern_.nonZeros() || M.nonZeros() != pattern_.nonZeros())
    throw std::invalid_argument("matrices do not carry the assembler pattern");

  // fixed coefficients are read from the plan without a copy
  const auto values = [&](const Expansion& e, Eigen::VectorXd& scratch) -> const Eigen::VectorXd& {
    if (e.weight[0].size() == 0) return e.mean;
    scratch = e.mean;
    add_parametric(e, y, scratch);
    return scratch;
  };
  Eigen::VectorXd as, bs, cs;
  const Eigen::VectorXd& av = values(a_, as);
  const Eigen::VectorXd& bv = values(b_, bs);
  const Eigen::VectorXd& cv = values(c_, cs);
  if (!av.allFinite() || !bv.allFinite() || !cv.allFinite())
    throw std::runtime_error("non-finite coefficient value during assembly");

  double* Av = A.valuePtr();
  double* Mv = M.valuePtr();
  std::fill(Av, Av + A.nonZeros(), 0.0);
  std::fill(Mv, Mv + M.nonZeros(), 0.0);

  const int nt = int(mesh_->triangles.size());
  for (int t = 0; t < nt; ++t) {
    const int q0 = t * QuadRule::size;
    const double w = area_[t] / 3.0;
    const double a_mean = (av[q0] + av[q0 + 1] + av[q0 + 2]) / 3.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        const int pos = scatter_[t][3 * a + b];
        if (pos < 0) continue;
        double bm = 0.0;
        double cm = 0.0;
        for (int q = 0; q < QuadRule::size; ++q) {
          const double phi = QuadRule::shape(a, q) * QuadRule::shape(b, q);
          bm += bv[q0 + q] * phi;
          cm += cv[q0 + q] * phi;
        }
        Av[pos] += a_mean * stiffness_[t][3 * a + b] + w * bm;
        Mv[pos] += w * cm;
      }
  }
}

Pencil assemble_pencil(const TriMesh& mesh, const CoefficientField& field, const ParamRef& y)
{
  const PencilAssembler assembler(mesh, field, int(y.size()));
  Pencil p{assembler.pattern(), assembler.pattern()};
  assembler.assemble(y, p.A, p.M);
  return p;
}

Eigen::VectorXd sym_multiply(const SparseSym& S, const Eigen::VectorXd& x)
{
  return S.selfadjointView<Eigen::Lower>() * x;
}

void write_coordinate(std::ostream& os, const SparseSym& S)
{
  const auto old = os.precision(17);
  for (int r = 0; r < S.outerSize(); ++r)
    for (SparseSym::InnerIterator it(S, r); it; ++it) os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
  os.precision(old);
}

}  // namespace qmcev
