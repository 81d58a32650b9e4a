#pragma once

#include "fgap/domains.hpp"

#include <numeric>

namespace fgap {

// Conforming simplicial mesh in chart coordinates. Cells use dim+1 entries.
struct Mesh {
  int dim = 2;
  std::vector<Vec> verts;
  std::vector<std::array<int, 4>> cells;
  std::vector<char> boundary;
  double h = 0;  // nominal edge length

  std::size_t num_vertices() const { return verts.size(); }
  std::size_t num_cells() const { return cells.size(); }
  int nodes_per_cell() const { return dim + 1; }

  // Signed chart volume (area in 2D).
  double cell_volume(std::size_t c) const {
    const auto& C = cells[c];
    if (dim == 2) {
      const Vec a = verts[std::size_t(C[1])] - verts[std::size_t(C[0])];
      const Vec b = verts[std::size_t(C[2])] - verts[std::size_t(C[0])];
      return 0.5 * (a[0] * b[1] - a[1] * b[0]);
    }
    Eigen::Matrix3d E;
    for (int k = 0; k < 3; ++k) E.col(k) = verts[std::size_t(C[std::size_t(k + 1)])] - verts[std::size_t(C[0])];
    return E.determinant() / 6.0;
  }
  Vec centroid(std::size_t c) const {
    Vec s = Vec::Zero(dim);
    for (int k = 0; k <= dim; ++k) s += verts[std::size_t(cells[c][std::size_t(k)])];
    return s / double(dim + 1);
  }
  double min_angle_deg() const {
    double worst = 180;
    for (const auto& C : cells)
      for (int k = 0; k < 3; ++k) {
        const Vec& p = verts[std::size_t(C[std::size_t(k)])];
        const Vec a = verts[std::size_t(C[std::size_t((k + 1) % 3)])] - p;
        const Vec b = verts[std::size_t(C[std::size_t((k + 2) % 3)])] - p;
        worst = std::min(worst, std::acos(std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0)) * 180 / kPi);
      }
    return worst;
  }
  // Circumradius over shortest edge, worst tetrahedron.
  double max_radius_edge() const {
    double worst = 0;
    for (const auto& C : cells) {
      Eigen::Matrix3d A;
      Eigen::Vector3d rhs;
      const Vec& p0 = verts[std::size_t(C[0])];
      double emin = 1e300;
      for (int k = 0; k < 3; ++k) {
        const Vec d = verts[std::size_t(C[std::size_t(k + 1)])] - p0;
        A.row(k) = d.transpose();
        rhs[k] = 0.5 * d.squaredNorm();
      }
      for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
          emin = std::min(emin, (verts[std::size_t(C[std::size_t(i)])] - verts[std::size_t(C[std::size_t(j)])]).norm());
      worst = std::max(worst, A.fullPivLu().solve(rhs).norm() / emin);
    }
    return worst;
  }
  std::size_t num_boundary() const { return std::size_t(std::count(boundary.begin(), boundary.end(), 1)); }
};

namespace detail {

// Bowyer-Watson Delaunay triangulation of a point set. Returns CCW triangles.
inline std::vector<std::array<int, 4>> delaunay(const std::vector<Eigen::Vector2d>& pts) {
  struct Tri {
    int v[3];
    Eigen::Vector2d c;
    double r2;
    bool alive;
  };
  std::vector<Eigen::Vector2d> P = pts;
  Eigen::Vector2d lo(1e300, 1e300), hi(-1e300, -1e300);
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Eigen::Vector2d mid = 0.5 * (lo + hi);
  const double span = std::max(hi[0] - lo[0], hi[1] - lo[1]) * 20 + 1;
  const int n = int(pts.size());
  P.push_back(mid + Eigen::Vector2d(-span, -span));
  P.push_back(mid + Eigen::Vector2d(span, -span));
  P.push_back(mid + Eigen::Vector2d(0, span));

  auto make = [&](int a, int b, int c) {
    Tri t{{a, b, c}, {}, 0, true};
    const Eigen::Vector2d A = P[std::size_t(a)], B = P[std::size_t(b)], C = P[std::size_t(c)];
    const double d = 2 * (A[0] * (B[1] - C[1]) + B[0] * (C[1] - A[1]) + C[0] * (A[1] - B[1]));
    if (d < 0) std::swap(t.v[1], t.v[2]);
    const double a2 = A.squaredNorm(), b2 = B.squaredNorm(), c2 = C.squaredNorm();
    t.c = Eigen::Vector2d((a2 * (B[1] - C[1]) + b2 * (C[1] - A[1]) + c2 * (A[1] - B[1])),
                          (a2 * (C[0] - B[0]) + b2 * (A[0] - C[0]) + c2 * (B[0] - A[0]))) /
          d;
    t.r2 = (A - t.c).squaredNorm();
    return t;
  };
  std::vector<Tri> tris{make(n, n + 1, n + 2)};
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d& p = P[std::size_t(i)];
    edges.clear();
    for (auto& t : tris) {
      if (!t.alive) continue;
      if ((p - t.c).squaredNorm() < t.r2 * (1 - 1e-12)) {
        t.alive = false;
        for (int k = 0; k < 3; ++k) {
          const int a = t.v[k], b = t.v[(k + 1) % 3];
          edges.emplace_back(std::min(a, b), std::max(a, b));
        }
      }
    }
    std::sort(edges.begin(), edges.end());
    for (std::size_t k = 0; k < edges.size(); ++k) {
      if (k + 1 < edges.size() && edges[k] == edges[k + 1]) {
        ++k;
        continue;
      }
      if (k > 0 && edges[k] == edges[k - 1]) continue;
      tris.push_back(make(edges[k].first, edges[k].second, i));
    }
    if (tris.size() > 64 && (i & 63) == 0)
      tris.erase(std::remove_if(tris.begin(), tris.end(), [](const Tri& t) { return !t.alive; }), tris.end());
  }
  std::vector<std::array<int, 4>> out;
  for (const auto& t : tris)
    if (t.alive && t.v[0] < n && t.v[1] < n && t.v[2] < n) out.push_back({t.v[0], t.v[1], t.v[2], -1});
  return out;
}

inline void orient_cells(Mesh& m) {
  for (std::size_t c = 0; c < m.cells.size(); ++c)
    if (m.cell_volume(c) < 0) std::swap(m.cells[c][1], m.cells[c][2]);
}

inline void check_mesh(const Mesh& m) {
  for (std::size_t c = 0; c < m.cells.size(); ++c)
    if (!(m.cell_volume(c) > 0)) fail(ErrorCode::quality_failure, "inverted or degenerate cell");
  if (m.dim == 2) {
    const double a = m.min_angle_deg();
    if (a < 20.0) fail(ErrorCode::quality_failure, "minimum angle " + std::to_string(a) + " below 20 degrees");
  } else {
    const double q = m.max_radius_edge();
    if (q > 2.0) fail(ErrorCode::quality_failure, "radius-edge ratio " + std::to_string(q) + " above 2");
  }
}

inline double segment_distance(const Eigen::Vector2d& q, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  const Eigen::Vector2d e = b - a;
  const double t = std::clamp((q - a).dot(e) / e.squaredNorm(), 0.0, 1.0);
  return (a + t * e - q).norm();
}
}  // namespace detail

// Boundary-fitted Delaunay mesh of a flat polygon: boundary points at spacing h,
// a triangular lattice inside, and up to three smoothing passes for quality.
inline Mesh triangulate(const PolygonDomain& d, double h) {
  require(h > 0, ErrorCode::invalid_argument, "mesh size must be positive");
  if (!(h < d.scale() / 4)) fail(ErrorCode::h_too_coarse, "h must be below a quarter of the domain scale");
  const auto& poly = d.polygon();
  const std::size_t nb = poly.size();
  std::vector<Eigen::Vector2d> pts;
  for (std::size_t i = 0; i < nb; ++i) {
    const Eigen::Vector2d a = poly[i], b = poly[(i + 1) % nb];
    const int k = std::max(1, int(std::ceil((b - a).norm() / h - 1e-9)));
    for (int j = 0; j < k; ++j) pts.push_back(a + (b - a) * (double(j) / k));
  }
  const std::size_t n_boundary = pts.size();
  auto boundary_distance = [&](const Eigen::Vector2d& q) {
    double dm = 1e300;
    for (std::size_t i = 0; i < nb; ++i) dm = std::min(dm, detail::segment_distance(q, poly[i], poly[(i + 1) % nb]));
    return dm;
  };
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& p : poly) {
    x0 = std::min(x0, p[0]);
    x1 = std::max(x1, p[0]);
    y0 = std::min(y0, p[1]);
    y1 = std::max(y1, p[1]);
  }
  const double dy = h * std::sqrt(3.0) / 2;
  for (int row = 0; y0 + row * dy <= y1; ++row) {
    const double y = y0 + row * dy;
    for (double x = x0 + (row % 2 ? h / 2 : 0.0); x <= x1; x += h) {
      const Eigen::Vector2d q(x, y);
      Vec v(2);
      v << x, y;
      if (d.contains(v, 0) && boundary_distance(q) > 0.7 * h) pts.push_back(q);
    }
  }

  Mesh m;
  m.dim = 2;
  m.h = h;
  for (int pass = 0;; ++pass) {
    auto tris = detail::delaunay(pts);
    std::vector<std::array<int, 4>> kept;
    for (const auto& t : tris) {
      const Eigen::Vector2d c = (pts[std::size_t(t[0])] + pts[std::size_t(t[1])] + pts[std::size_t(t[2])]) / 3.0;
      Vec v(2);
      v << c[0], c[1];
      if (d.contains(v, 0)) kept.push_back(t);
    }
    m.verts.clear();
    for (const auto& p : pts) {
      Vec v(2);
      v << p[0], p[1];
      m.verts.push_back(v);
    }
    m.cells = kept;
    detail::orient_cells(m);
    if (m.min_angle_deg() >= 20.0 || pass == 3) break;
    // Laplacian smoothing of interior points.
    std::vector<Eigen::Vector2d> acc(pts.size(), Eigen::Vector2d::Zero());
    std::vector<int> cnt(pts.size(), 0);
    for (const auto& t : kept)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          if (a != b) {
            acc[std::size_t(t[std::size_t(a)])] += pts[std::size_t(t[std::size_t(b)])];
            ++cnt[std::size_t(t[std::size_t(a)])];
          }
    for (std::size_t i = n_boundary; i < pts.size(); ++i)
      if (cnt[i] > 0) pts[i] = acc[i] / cnt[i];
  }
  m.boundary.assign(m.verts.size(), 0);
  for (std::size_t i = 0; i < n_boundary; ++i) m.boundary[i] = 1;
  detail::check_mesh(m);
  return m;
}

struct SlabMeshOptions {
  int ny = 16;          // cells across the full width, even
  double aspect = 1.5;  // dx / dy
  double max_dx = 0;    // 0: no cap
};

// Structured mesh of a 2D neck domain, graded in x with dx proportional to the
// local half-width. Each cell is split along its shorter diagonal (alternating
// on ties), which keeps the mesh mirror symmetric.
inline Mesh mesh_slab(const ConvexDomain2D& d, const SlabMeshOptions& opt = {}) {
  if (opt.ny < 8) fail(ErrorCode::h_too_coarse, "slab mesh needs at least 8 cells across (h <= half-width / 4)");
  require(opt.ny % 2 == 0 && opt.aspect > 0 && opt.aspect <= 2.5, ErrorCode::invalid_argument,
          "slab mesh needs even ny and aspect in (0, 2.5]");
  const auto [a, b] = d.x_range();
  auto dx_at = [&](double x) {
    double dx = opt.aspect * (d.upper(x) - d.lower(x)) / opt.ny;
    if (opt.max_dx > 0) dx = std::min(dx, opt.max_dx);
    return dx;
  };
  const int nt = 4000;
  std::vector<double> xs(nt + 1), S(nt + 1, 0.0);
  for (int i = 0; i <= nt; ++i) xs[std::size_t(i)] = a + (b - a) * i / nt;
  for (int i = 1; i <= nt; ++i) {
    const double x0 = xs[std::size_t(i - 1)], x1 = xs[std::size_t(i)];
    S[std::size_t(i)] = S[std::size_t(i - 1)] + 0.5 * (x1 - x0) * (1 / dx_at(x0) + 1 / dx_at(x1));
  }
  int nx = std::max(8, int(std::ceil(S.back())));
  nx += nx % 2;
  std::vector<double> xn(std::size_t(nx + 1));
  xn.front() = a;
  xn.back() = b;
  for (int i = 1; i < nx; ++i) {
    const double target = S.back() * i / nx;
    const std::size_t k = std::size_t(std::lower_bound(S.begin(), S.end(), target) - S.begin());
    const double w = (target - S[k - 1]) / (S[k] - S[k - 1]);
    xn[std::size_t(i)] = xs[k - 1] + w * (xs[k] - xs[k - 1]);
  }
  Mesh m;
  m.dim = 2;
  m.h = opt.aspect * 2 * d.r() / opt.ny;
  const int ny = opt.ny;
  auto id = [ny](int i, int j) { return i * (ny + 1) + j; };
  for (int i = 0; i <= nx; ++i) {
    const double x = xn[std::size_t(i)], lo = d.lower(x), hi = d.upper(x);
    for (int j = 0; j <= ny; ++j) {
      Vec v(2);
      v << x, lo + (hi - lo) * j / ny;
      m.verts.push_back(v);
      m.boundary.push_back(i == 0 || i == nx || j == 0 || j == ny);
    }
  }
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const int p00 = id(i, j), p10 = id(i + 1, j), p01 = id(i, j + 1), p11 = id(i + 1, j + 1);
      const double d0 = (m.verts[std::size_t(p11)] - m.verts[std::size_t(p00)]).norm();
      const double d1 = (m.verts[std::size_t(p10)] - m.verts[std::size_t(p01)]).norm();
      const bool main_diag = std::abs(d0 - d1) <= 1e-9 * (d0 + d1) ? (i + j) % 2 == 0 : d0 < d1;
      if (main_diag) {
        m.cells.push_back({p00, p10, p11, -1});
        m.cells.push_back({p00, p11, p01, -1});
      } else {
        m.cells.push_back({p00, p10, p01, -1});
        m.cells.push_back({p10, p11, p01, -1});
      }
    }
  detail::orient_cells(m);
  detail::check_mesh(m);
  return m;
}

struct HullMeshOptions {
  int nx = 24, ny = 8, nz = 16;
};

// Structured mesh of the 3D hull: x columns of Coons cross-sections, each hex
// split into six tetrahedra around its main diagonal.
inline Mesh mesh_hull(const ConvexDomain3D& d, const HullMeshOptions& opt = {}) {
  if (opt.ny < 4 || opt.nz < 4 || opt.nx < 4) fail(ErrorCode::h_too_coarse, "hull mesh needs at least 4 cells per axis");
  const auto [a, b] = d.x_range();
  const int nx = opt.nx, ny = opt.ny, nz = opt.nz;
  Mesh m;
  m.dim = 3;
  m.h = std::max({(b - a) / nx, 2 * d.r() / ny, 2 * d.rho() * d.r() / nz});
  auto id = [&](int i, int j, int k) { return (i * (nz + 1) + j) * (ny + 1) + k; };
  m.verts.resize(std::size_t((nx + 1) * (nz + 1) * (ny + 1)));
  m.boundary.resize(m.verts.size());
  for (int i = 0; i <= nx; ++i) {
    const double x = a + (b - a) * i / nx;
    const auto cs = d.cross_section(x, std::max(nz, ny) * 2);
    for (int j = 0; j <= nz; ++j)
      for (int k = 0; k <= ny; ++k) {
        const Eigen::Vector2d yz = cs.eval(double(j) / nz, double(k) / ny);
        Vec v(3);
        v << x, yz[0], yz[1];
        m.verts[std::size_t(id(i, j, k))] = v;
        m.boundary[std::size_t(id(i, j, k))] = i == 0 || i == nx || j == 0 || j == nz || k == 0 || k == ny;
      }
  }
  static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < nz; ++j)
      for (int k = 0; k < ny; ++k)
        for (const auto& p : perms) {
          int c[3] = {0, 0, 0};
          std::array<int, 4> tet;
          tet[0] = id(i, j, k);
          for (int s = 0; s < 3; ++s) {
            c[p[s]] = 1;
            tet[std::size_t(s + 1)] = id(i + c[0], j + c[1], k + c[2]);
          }
          m.cells.push_back(tet);
        }
  detail::orient_cells(m);
  detail::check_mesh(m);
  return m;
}

}  // namespace fgap
