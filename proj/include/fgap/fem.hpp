#pragma once

#include "fgap/mesh.hpp"

#include <Eigen/Sparse>
#include <fstream>

namespace fgap {

using SpMat = Eigen::SparseMatrix<double>;
using MetricFn = std::function<MetricTensor(const Vec&)>;

// P1 stiffness and mass forms of the Dirichlet Laplace-Beltrami operator.
// Element matrices are kept so local energies can be evaluated without
// cancellation against the global quadratic forms.
struct DiscreteForms {
  std::shared_ptr<const Mesh> mesh;
  std::vector<Eigen::Matrix4d> Ae, Me;  // top-left (dim+1) block used
  std::vector<int> dof_of_vertex;       // -1 on Dirichlet vertices
  std::vector<int> vertex_of_dof;
  SpMat A, M;                           // Dirichlet-reduced

  std::size_t num_dofs() const { return vertex_of_dof.size(); }
  int npc() const { return mesh->dim + 1; }

  Eigen::VectorXd to_full(const Eigen::VectorXd& u) const {
    Eigen::VectorXd f = Eigen::VectorXd::Zero(Eigen::Index(mesh->num_vertices()));
    for (std::size_t i = 0; i < vertex_of_dof.size(); ++i) f[vertex_of_dof[i]] = u[Eigen::Index(i)];
    return f;
  }
  Eigen::VectorXd to_reduced(const Eigen::VectorXd& f) const {
    Eigen::VectorXd u(Eigen::Index(vertex_of_dof.size()));
    for (std::size_t i = 0; i < vertex_of_dof.size(); ++i) u[Eigen::Index(i)] = f[vertex_of_dof[i]];
    return u;
  }
  // Local quadratic forms of a vertex function on cell c.
  double cell_stiffness(std::size_t c, const Eigen::VectorXd& f) const { return cell_form(Ae[c], c, f); }
  double cell_mass(std::size_t c, const Eigen::VectorXd& f) const { return cell_form(Me[c], c, f); }
  // w^T (A_e - lambda M_e) w
  double cell_energy(std::size_t c, const Eigen::VectorXd& f, double lambda) const {
    return cell_form(Ae[c] - lambda * Me[c], c, f);
  }

 private:
  double cell_form(const Eigen::Matrix4d& K, std::size_t c, const Eigen::VectorXd& f) const {
    const auto& C = mesh->cells[c];
    double s = 0;
    for (int i = 0; i < npc(); ++i)
      for (int j = 0; j < npc(); ++j) s += f[C[std::size_t(i)]] * K(i, j) * f[C[std::size_t(j)]];
    return s;
  }
};

namespace detail {
// Degree-2 rules in barycentric coordinates.
inline const std::vector<std::pair<std::array<double, 4>, double>>& quadrature(int dim) {
  static const std::vector<std::pair<std::array<double, 4>, double>> tri = {
      {{2.0 / 3, 1.0 / 6, 1.0 / 6, 0}, 1.0 / 3},
      {{1.0 / 6, 2.0 / 3, 1.0 / 6, 0}, 1.0 / 3},
      {{1.0 / 6, 1.0 / 6, 2.0 / 3, 0}, 1.0 / 3}};
  static const double a = 0.5854101966249685, b = 0.1381966011250105;
  static const std::vector<std::pair<std::array<double, 4>, double>> tet = {
      {{a, b, b, b}, 0.25}, {{b, a, b, b}, 0.25}, {{b, b, a, b}, 0.25}, {{b, b, b, a}, 0.25}};
  return dim == 2 ? tri : tet;
}
}  // namespace detail

inline DiscreteForms assemble(std::shared_ptr<const Mesh> mesh, const MetricFn& metric, unsigned workers = 1) {
  const Mesh& m = *mesh;
  const int d = m.dim, np = d + 1;
  DiscreteForms F;
  F.mesh = mesh;
  F.Ae.assign(m.num_cells(), Eigen::Matrix4d::Zero());
  F.Me.assign(m.num_cells(), Eigen::Matrix4d::Zero());
  std::vector<std::string> errors(m.num_cells());
  const auto& rule = detail::quadrature(d);
  parallel_for(m.num_cells(), workers, [&](std::size_t c) {
    const auto& C = m.cells[c];
    Mat E(d, d);
    for (int k = 0; k < d; ++k) E.col(k) = m.verts[std::size_t(C[std::size_t(k + 1)])] - m.verts[std::size_t(C[0])];
    const double vol = std::abs(m.cell_volume(c));
    // Rows of E^{-1} are the gradients of barycentric coordinates 1..d.
    const Mat Einv = E.inverse();
    Eigen::MatrixXd G(d, np);
    for (int k = 0; k < d; ++k) G.col(k + 1) = Einv.row(k).transpose();
    G.col(0) = -G.rightCols(d).rowwise().sum();
    Eigen::Matrix4d A = Eigen::Matrix4d::Zero(), M = Eigen::Matrix4d::Zero();
    for (const auto& [bary, w] : rule) {
      Vec x = Vec::Zero(d);
      for (int k = 0; k < np; ++k) x += bary[std::size_t(k)] * m.verts[std::size_t(C[std::size_t(k)])];
      MetricTensor g;
      try {
        g = metric(x);
      } catch (const Error& e) {
        errors[c] = e.what();
        return;
      }
      const Eigen::MatrixXd K = G.transpose() * Eigen::MatrixXd(g.g_inv) * G;
      for (int i = 0; i < np; ++i)
        for (int j = 0; j < np; ++j) {
          A(i, j) += w * vol * g.sqrt_det * K(i, j);
          M(i, j) += w * vol * g.sqrt_det * bary[std::size_t(i)] * bary[std::size_t(j)];
        }
    }
    F.Ae[c] = A;
    F.Me[c] = M;
  });
  for (const auto& e : errors)
    if (!e.empty()) fail(ErrorCode::quadrature_point_outside_chart, e);

  F.dof_of_vertex.assign(m.num_vertices(), -1);
  for (std::size_t v = 0; v < m.num_vertices(); ++v)
    if (!m.boundary[v]) {
      F.dof_of_vertex[v] = int(F.vertex_of_dof.size());
      F.vertex_of_dof.push_back(int(v));
    }
  std::vector<Eigen::Triplet<double>> ta, tm;
  for (std::size_t c = 0; c < m.num_cells(); ++c)
    for (int i = 0; i < np; ++i) {
      const int di = F.dof_of_vertex[std::size_t(m.cells[c][std::size_t(i)])];
      if (di < 0) continue;
      for (int j = 0; j < np; ++j) {
        const int dj = F.dof_of_vertex[std::size_t(m.cells[c][std::size_t(j)])];
        if (dj < 0) continue;
        ta.emplace_back(di, dj, F.Ae[c](i, j));
        tm.emplace_back(di, dj, F.Me[c](i, j));
      }
    }
  const auto n = Eigen::Index(F.vertex_of_dof.size());
  F.A.resize(n, n);
  F.M.resize(n, n);
  F.A.setFromTriplets(ta.begin(), ta.end());
  F.M.setFromTriplets(tm.begin(), tm.end());
  return F;
}

inline MetricFn catalog_metric(const MetricSpec& s) {
  return [s](const Vec& x) {
    if (!in_chart(s, x)) {
      std::ostringstream os;
      os << "quadrature point (" << x.transpose() << ") outside the " << s.id() << " chart";
      fail(ErrorCode::quadrature_point_outside_chart, os.str());
    }
    return metric_at(s, x);
  };
}

inline DiscreteForms assemble(std::shared_ptr<const Mesh> mesh, const MetricSpec& s, unsigned workers = 1) {
  return assemble(std::move(mesh), catalog_metric(s), workers);
}

// (h^T A h) / (h^T M h) for a vertex function vanishing on Dirichlet vertices.
inline double rayleigh_quotient(const DiscreteForms& F, const Eigen::VectorXd& f) {
  const double scale = f.cwiseAbs().maxCoeff();
  if (!(scale > 0)) fail(ErrorCode::zero_function, "Rayleigh quotient of the zero function");
  for (std::size_t v = 0; v < F.mesh->num_vertices(); ++v)
    if (F.mesh->boundary[v] && std::abs(f[Eigen::Index(v)]) > 1e-12 * scale)
      fail(ErrorCode::invalid_argument, "function does not vanish on the Dirichlet boundary");
  const Eigen::VectorXd u = F.to_reduced(f);
  const double den = u.dot(F.M * u);
  if (!(den > 0)) fail(ErrorCode::zero_function, "Rayleigh quotient of the zero function");
  return u.dot(F.A * u) / den;
}

// Coordinate text (Matrix Market) export.
inline void write_matrix_market(const std::string& path, const SpMat& A) {
  std::ofstream os(path);
  if (!os) fail(ErrorCode::io_failure, "cannot write " + path);
  os << "%%MatrixMarket matrix coordinate real general\n" << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n';
  os.precision(17);
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
  if (!os) fail(ErrorCode::io_failure, "write failed for " + path);
}

}  // namespace fgap
