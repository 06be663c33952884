// Finite element space construction: dof layouts, dual-basis shape
// functions, quadrature tables, and canonical interpolation.
#include "tdnns/fespace.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

namespace tdnns {

namespace {

// ---------------------------------------------------------------- monomials

/// Exponent pairs of all monomials up to total `degree`, degree-major.
std::vector<std::array<int, 2>> mono_exponents(int degree) {
  std::vector<std::array<int, 2>> exps;
  for (int d = 0; d <= degree; ++d)
    for (int a = d; a >= 0; --a) exps.push_back({a, d - a});
  return exps;
}

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

double mono_value(const std::array<int, 2>& e, double u, double v) {
  return ipow(u, e[0]) * ipow(v, e[1]);
}

/// Gradient with respect to (u, v).
Vec2 mono_gradient(const std::array<int, 2>& e, double u, double v) {
  const double gx = e[0] == 0 ? 0.0 : e[0] * ipow(u, e[0] - 1) * ipow(v, e[1]);
  const double gy = e[1] == 0 ? 0.0 : e[1] * ipow(u, e[0]) * ipow(v, e[1] - 1);
  return {gx, gy};
}

// ------------------------------------------------------- element geometry

struct ElementGeometry {
  std::array<Vec2, 3> v;
  Vec2 center;
  double h = 0.0;  ///< longest edge, used as the monomial scaling length
  double area = 0.0;

  Vec2 to_local(Vec2 x) const { return (1.0 / h) * (x - center); }
};

ElementGeometry element_geometry(const TriMesh& mesh, int t) {
  ElementGeometry g;
  for (int i = 0; i < 3; ++i) g.v[i] = mesh.vertices[mesh.triangles[t][i]];
  g.center = (1.0 / 3.0) * (g.v[0] + g.v[1] + g.v[2]);
  g.h = std::max({norm(g.v[1] - g.v[0]), norm(g.v[2] - g.v[1]), norm(g.v[0] - g.v[2])});
  g.area = 0.5 * cross(g.v[1] - g.v[0], g.v[2] - g.v[0]);
  return g;
}

/// Global orientation data for the local edge `le` (opposite local vertex le).
struct EdgeFrame {
  int edge;            ///< global edge id
  Vec2 lo, hi;         ///< endpoints in global (lo -> hi) order
  double length;
  Vec2 t_global;       ///< unit tangent lo -> hi
  Vec2 n_global;       ///< t_global rotated by -90 degrees
  Vec2 t_ccw, n_out;   ///< element-side frame (CCW tangent, outward normal)
  double s_sign;       ///< dot(t_ccw, t_global)

  Vec2 at(double s) const { return lo + s * (hi - lo); }
};

EdgeFrame edge_frame(const TriMesh& mesh, int t, int le) {
  EdgeFrame f;
  f.edge = mesh.tri_edges[t][le];
  const auto& tri = mesh.triangles[t];
  const Vec2 a = mesh.vertices[tri[(le + 1) % 3]];  // CCW start
  const Vec2 b = mesh.vertices[tri[(le + 2) % 3]];  // CCW end
  f.lo = mesh.vertices[mesh.edges[f.edge][0]];
  f.hi = mesh.vertices[mesh.edges[f.edge][1]];
  f.length = norm(f.hi - f.lo);
  f.t_global = (1.0 / f.length) * (f.hi - f.lo);
  f.n_global = rot_minus90(f.t_global);
  f.t_ccw = (1.0 / norm(b - a)) * (b - a);
  f.n_out = rot_minus90(f.t_ccw);
  f.s_sign = dot(f.t_ccw, f.t_global) > 0.0 ? 1.0 : -1.0;
  return f;
}

/// Projection weights turning a component basis vector into the requested
/// edge trace: for vectors dir . e_c, for Voigt tensors a' (tau) b on e_c.
double vector_trace(const Vec2& dir, int c) { return c == 0 ? dir.x : dir.y; }
double tensor_trace(const Vec2& a, const Vec2& b, int c) {
  switch (c) {
    case 0: return a.x * b.x;
    case 1: return a.y * b.y;
    default: return a.x * b.y + a.y * b.x;
  }
}

// ------------------------------------------------------------- local basis

/// Shape functions of one element as monomial coefficient rows, built by
/// inverting the dof-functional matrix (dual basis).
struct LocalBasis {
  int nloc = 0, ncomp = 1, nmono = 0, degree = 0;
  ElementGeometry geo;
  std::vector<std::array<int, 2>> exps;
  Eigen::MatrixXd coeff;    ///< nloc x (nmono*ncomp), column j*ncomp + c
  Eigen::MatrixXd bubbles;  ///< (nmono*ncomp) x n_interior: orthonormal bubble coefficients
};

/// Component weights of the natural inner product (Voigt xy carries 2).
double component_weight(int ncomp, int c) { return (ncomp == 3 && c == 2) ? 2.0 : 1.0; }

/// Rows of the edge dof functionals applied to every monomial-component
/// basis function.  Row order: local edge 0..2, Legendre index 0..order.
Eigen::MatrixXd edge_functional_matrix(const FESpace& space, int t,
                                       const ElementGeometry& geo,
                                       const std::vector<std::array<int, 2>>& exps) {
  const TriMesh& mesh = *space.mesh;
  const int k = space.order;
  const int ncomp = space.num_components();
  const int nmono = static_cast<int>(exps.size());
  const QuadRule& rule = segment_rule(2 * k);

  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(3 * (k + 1), nmono * ncomp);
  for (int le = 0; le < 3; ++le) {
    const EdgeFrame f = edge_frame(mesh, t, le);
    for (int q = 0; q < rule.size(); ++q) {
      const double s = rule.points[q].x, w = rule.weights[q];
      const Vec2 u = geo.to_local(f.at(s));
      for (int r = 0; r <= k; ++r) {
        const double qr = legendre01(r, s);
        for (int j = 0; j < nmono; ++j) {
          const double m = mono_value(exps[j], u.x, u.y);
          for (int c = 0; c < ncomp; ++c) {
            const double proj = (space.kind == SpaceKind::Rotation)
                                    ? vector_trace(f.t_global, c)
                                    : tensor_trace(f.n_global, f.n_global, c);
            E(le * (k + 1) + r, j * ncomp + c) += w * qr * proj * m;
          }
        }
      }
    }
  }
  return E;
}

LocalBasis build_local_basis(const FESpace& space, int t) {
  TDNNS_REQUIRE(space.kind != SpaceKind::Multiplier,
                "multiplier spaces have no volume polynomial basis");
  const TriMesh& mesh = *space.mesh;
  LocalBasis b;
  b.degree = space.order;
  b.ncomp = space.num_components();
  b.geo = element_geometry(mesh, t);
  b.exps = mono_exponents(b.degree);
  b.nmono = static_cast<int>(b.exps.size());
  b.nloc = b.nmono * b.ncomp;
  const int n = b.nloc;

  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);

  if (space.kind == SpaceKind::Deflection) {
    // Nodal functionals: vertices, edge lattice nodes (global orientation),
    // interior lattice nodes.
    const int m = space.order;
    std::vector<Vec2> nodes;
    for (int i = 0; i < 3; ++i) nodes.push_back(b.geo.v[i]);
    for (int le = 0; le < 3; ++le) {
      const EdgeFrame f = edge_frame(mesh, t, le);
      for (int r = 1; r < m; ++r) nodes.push_back(f.at(static_cast<double>(r) / m));
    }
    for (int a = 1; a <= m - 2; ++a)
      for (int bb = 1; bb <= m - 1 - a; ++bb) {
        const int c = m - a - bb;
        nodes.push_back((1.0 / m) * (a * b.geo.v[0] + bb * b.geo.v[1] + c * b.geo.v[2]));
      }
    TDNNS_REQUIRE(static_cast<int>(nodes.size()) == n, "deflection node count mismatch");
    for (int a = 0; a < n; ++a) {
      const Vec2 u = b.geo.to_local(nodes[a]);
      for (int j = 0; j < b.nmono; ++j) D(a, j) = mono_value(b.exps[j], u.x, u.y);
    }
  } else {
    const int k = space.order;
    const int n_edge = 3 * (k + 1);
    const int n_int = n - n_edge;
    const Eigen::MatrixXd E = edge_functional_matrix(space, t, b.geo, b.exps);
    D.topRows(n_edge) = E;

    if (n_int > 0) {
      // Interior shapes are dual to moments against an orthonormal "bubble"
      // basis: the null space of the edge functionals, orthonormalized in
      // the scaled L2 inner product (1/|T|) int_T a . b dx.
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(E, Eigen::ComputeFullV);
      const double tol = svd.singularValues()(0) * 1e-12 * std::max(E.rows(), E.cols());
      int rank = 0;
      for (int i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > tol) ++rank;
      TDNNS_REQUIRE(rank == n_edge, "element " + std::to_string(t) +
                                        ": edge dof functionals are linearly dependent");
      const Eigen::MatrixXd N = svd.matrixV().rightCols(n_int);

      // Component-block-diagonal Gram matrix of the monomial basis.
      const QuadRule& vrule = triangle_rule(2 * k);
      Eigen::MatrixXd Gm = Eigen::MatrixXd::Zero(b.nmono, b.nmono);
      for (int q = 0; q < vrule.size(); ++q) {
        const Vec2 xq = b.geo.v[0] + vrule.points[q].x * (b.geo.v[1] - b.geo.v[0]) +
                        vrule.points[q].y * (b.geo.v[2] - b.geo.v[0]);
        const Vec2 u = b.geo.to_local(xq);
        const double w = vrule.weights[q] * 2.0;  // physical weight times (1/|T|)
        std::vector<double> mv(b.nmono);
        for (int j = 0; j < b.nmono; ++j) mv[j] = mono_value(b.exps[j], u.x, u.y);
        for (int j = 0; j < b.nmono; ++j)
          for (int j2 = 0; j2 < b.nmono; ++j2) Gm(j, j2) += w * mv[j] * mv[j2];
      }
      Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
      for (int j = 0; j < b.nmono; ++j)
        for (int j2 = 0; j2 < b.nmono; ++j2)
          for (int c = 0; c < b.ncomp; ++c)
            G(j * b.ncomp + c, j2 * b.ncomp + c) = component_weight(b.ncomp, c) * Gm(j, j2);

      const Eigen::MatrixXd M = N.transpose() * G * N;
      Eigen::LLT<Eigen::MatrixXd> llt(M);
      TDNNS_REQUIRE(llt.info() == Eigen::Success,
                    "element " + std::to_string(t) + ": bubble Gram matrix not positive definite");
      b.bubbles = llt.matrixL()
                      .solve(N.transpose())
                      .transpose();  // N L^{-T}: columns orthonormal in G
      D.bottomRows(n_int) = (G * b.bubbles).transpose();
    }
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(D);
  TDNNS_REQUIRE(qr.rank() == n, "element " + std::to_string(t) +
                                    ": dof functional matrix is singular (unisolvence failed)");
  b.coeff = qr.solve(Eigen::MatrixXd::Identity(n, n)).transpose();
  return b;
}

}  // namespace

// ---------------------------------------------------------------- Legendre

double legendre01(int r, double s) {
  // Shifted Legendre polynomials on [0,1], L2-orthonormal.
  const double sq3 = 1.7320508075688772, sq5 = 2.2360679774997896, sq7 = 2.6457513110645906;
  switch (r) {
    case 0: return 1.0;
    case 1: return sq3 * (2.0 * s - 1.0);
    case 2: return sq5 * ((6.0 * s - 6.0) * s + 1.0);
    case 3: return sq7 * (((20.0 * s - 30.0) * s + 12.0) * s - 1.0);
    case 4: return 3.0 * ((((70.0 * s - 140.0) * s + 90.0) * s - 20.0) * s + 1.0);
    default: TDNNS_REQUIRE(false, "Legendre index " + std::to_string(r) + " out of range [0,4]");
  }
}

// ----------------------------------------------------------------- FESpace

int FESpace::num_components() const {
  switch (kind) {
    case SpaceKind::Rotation: return 2;
    case SpaceKind::Moment: return 3;
    default: return 1;
  }
}

std::vector<int> FESpace::element_dofs(int t) const {
  std::vector<int> out;
  const auto& tri = mesh->triangles[t];
  if (broken) {
    out.reserve(dofs_per_element);
    for (int i = 0; i < dofs_per_element; ++i) out.push_back(t * dofs_per_element + i);
    return out;
  }
  if (kind == SpaceKind::Deflection)
    for (int i = 0; i < 3; ++i) out.push_back(tri[i]);
  for (int le = 0; le < 3; ++le) {
    const int e = mesh->tri_edges[t][le];
    for (int r = 0; r < dofs_per_edge; ++r) out.push_back(edge_offset + e * dofs_per_edge + r);
  }
  for (int i = 0; i < dofs_per_interior; ++i)
    out.push_back(interior_offset + t * dofs_per_interior + i);
  return out;
}

std::vector<int> FESpace::edge_dofs(int e) const {
  std::vector<int> out;
  if (broken) return out;  // no globally shared edge dofs
  for (int r = 0; r < dofs_per_edge; ++r) out.push_back(edge_offset + e * dofs_per_edge + r);
  return out;
}

std::vector<int> FESpace::interior_dofs(int t) const {
  std::vector<int> out;
  if (broken) {
    for (int i = 0; i < dofs_per_element; ++i) out.push_back(t * dofs_per_element + i);
    return out;
  }
  for (int i = 0; i < dofs_per_interior; ++i)
    out.push_back(interior_offset + t * dofs_per_interior + i);
  return out;
}

FESpace build_space(const TriMesh& mesh, SpaceKind kind, int order, bool broken) {
  TDNNS_REQUIRE(broken == false || kind == SpaceKind::Moment,
                "only moment spaces support the broken variant");
  FESpace s;
  s.kind = kind;
  s.order = order;
  s.broken = broken;
  s.mesh = &mesh;
  const int V = mesh.num_vertices(), E = mesh.num_edges(), T = mesh.num_triangles();

  switch (kind) {
    case SpaceKind::Deflection:
      TDNNS_REQUIRE(order >= 1 && order <= 5, "deflection order must lie in [1,5]");
      s.dofs_per_vertex = 1;
      s.dofs_per_edge = order - 1;
      s.dofs_per_interior = (order - 1) * (order - 2) / 2;
      s.edge_offset = V;
      s.interior_offset = V + E * s.dofs_per_edge;
      s.ndof = s.interior_offset + T * s.dofs_per_interior;
      break;
    case SpaceKind::Rotation:
      TDNNS_REQUIRE(order >= 1 && order <= 4, "rotation order must lie in [1,4]");
      s.dofs_per_edge = order + 1;
      s.dofs_per_interior = order * order - 1;
      s.edge_offset = 0;
      s.interior_offset = E * s.dofs_per_edge;
      s.ndof = s.interior_offset + T * s.dofs_per_interior;
      break;
    case SpaceKind::Moment:
      TDNNS_REQUIRE(order >= 1 && order <= 4, "moment order must lie in [1,4]");
      if (broken) {
        s.dofs_per_element = 3 * (order + 1) * (order + 2) / 2;
        s.dofs_per_edge = order + 1;  // leading block of the element-local order
        s.dofs_per_interior = s.dofs_per_element - 3 * (order + 1);
        s.ndof = T * s.dofs_per_element;
      } else {
        s.dofs_per_edge = order + 1;
        s.dofs_per_interior = 3 * order * (order + 1) / 2;
        s.edge_offset = 0;
        s.interior_offset = E * s.dofs_per_edge;
        s.ndof = s.interior_offset + T * s.dofs_per_interior;
      }
      break;
    case SpaceKind::Multiplier:
      TDNNS_REQUIRE(order >= 1 && order <= 4, "multiplier order must lie in [1,4]");
      s.dofs_per_edge = order + 1;
      s.edge_offset = 0;
      s.interior_offset = E * s.dofs_per_edge;
      s.ndof = E * s.dofs_per_edge;
      break;
  }
  return s;
}

// ----------------------------------------------------------- shape tables

ElementShapes element_shapes(const FESpace& space, int t, int vol_degree, int edge_degree) {
  const TriMesh& mesh = *space.mesh;
  ElementShapes sh;
  sh.element = t;
  sh.ncomp = space.num_components();
  sh.dofs = space.element_dofs(t);
  sh.nloc = static_cast<int>(sh.dofs.size());

  const QuadRule& erule = segment_rule(edge_degree);
  const int neq = erule.size();

  if (space.kind == SpaceKind::Multiplier) {
    const int k = space.order;
    for (int le = 0; le < 3; ++le) {
      const EdgeFrame f = edge_frame(mesh, t, le);
      auto& tr = sh.edge[le];
      tr.edge = f.edge;
      tr.length = f.length;
      tr.s_sign = f.s_sign;
      tr.normal = f.n_out;
      tr.tangent = f.t_ccw;
      tr.value_n.assign(static_cast<size_t>(neq) * sh.nloc, 0.0);
      for (int q = 0; q < neq; ++q) {
        const double s = erule.points[q].x;
        tr.s.push_back(s);
        tr.points.push_back(f.at(s));
        tr.weights.push_back(erule.weights[q] * f.length);
        for (int r = 0; r <= k; ++r)
          tr.value_n[static_cast<size_t>(q) * sh.nloc + le * (k + 1) + r] = legendre01(r, s);
      }
    }
    return sh;
  }

  const LocalBasis basis = build_local_basis(space, t);
  const int nm = basis.nmono, nc = basis.ncomp;
  const auto shape_component = [&](int i, int c, const std::vector<double>& mv) {
    double r = 0.0;
    for (int j = 0; j < nm; ++j) r += basis.coeff(i, j * nc + c) * mv[j];
    return r;
  };

  // Volume tables.
  const QuadRule& vrule = triangle_rule(vol_degree);
  const double inv_h = 1.0 / basis.geo.h;
  std::vector<double> mv(nm);
  std::vector<Vec2> mg(nm);
  for (int q = 0; q < vrule.size(); ++q) {
    const Vec2 xq = basis.geo.v[0] + vrule.points[q].x * (basis.geo.v[1] - basis.geo.v[0]) +
                    vrule.points[q].y * (basis.geo.v[2] - basis.geo.v[0]);
    sh.points.push_back(xq);
    sh.weights.push_back(vrule.weights[q] * 2.0 * basis.geo.area);
    const Vec2 u = basis.geo.to_local(xq);
    for (int j = 0; j < nm; ++j) {
      mv[j] = mono_value(basis.exps[j], u.x, u.y);
      mg[j] = inv_h * mono_gradient(basis.exps[j], u.x, u.y);  // physical gradient
    }
    for (int i = 0; i < sh.nloc; ++i) {
      for (int c = 0; c < nc; ++c) sh.value_tab.push_back(shape_component(i, c, mv));
      // Physical component gradients g[c] = (d/dx, d/dy) of component c.
      std::array<Vec2, 3> g{};
      for (int c = 0; c < nc; ++c)
        for (int j = 0; j < nm; ++j) g[c] += basis.coeff(i, j * nc + c) * mg[j];
      if (nc == 1) {
        sh.grad_tab.push_back(g[0].x);
        sh.grad_tab.push_back(g[0].y);
      } else if (nc == 2) {
        sh.eps_tab.push_back(g[0].x);
        sh.eps_tab.push_back(g[1].y);
        sh.eps_tab.push_back(g[0].y + g[1].x);  // engineering shear
      } else {
        sh.div_tab.push_back(g[0].x + g[2].y);  // d/dx txx + d/dy txy
        sh.div_tab.push_back(g[2].x + g[1].y);  // d/dx txy + d/dy tyy
      }
    }
  }

  // Edge trace tables.
  for (int le = 0; le < 3; ++le) {
    const EdgeFrame f = edge_frame(mesh, t, le);
    auto& tr = sh.edge[le];
    tr.edge = f.edge;
    tr.length = f.length;
    tr.s_sign = f.s_sign;
    tr.normal = f.n_out;
    tr.tangent = f.t_ccw;
    for (int q = 0; q < neq; ++q) {
      const double s = erule.points[q].x;
      tr.s.push_back(s);
      tr.points.push_back(f.at(s));
      tr.weights.push_back(erule.weights[q] * f.length);
      const Vec2 u = basis.geo.to_local(f.at(s));
      for (int j = 0; j < nm; ++j) {
        mv[j] = mono_value(basis.exps[j], u.x, u.y);
        mg[j] = inv_h * mono_gradient(basis.exps[j], u.x, u.y);
      }
      for (int i = 0; i < sh.nloc; ++i) {
        if (nc == 1) {
          tr.value_n.push_back(shape_component(i, 0, mv));
          Vec2 g{};
          for (int j = 0; j < nm; ++j) g += basis.coeff(i, j) * mg[j];
          tr.grad_n.push_back(dot(g, f.n_out));
          tr.grad_t.push_back(dot(g, f.t_ccw));
        } else if (nc == 2) {
          const Vec2 val{shape_component(i, 0, mv), shape_component(i, 1, mv)};
          tr.value_n.push_back(dot(val, f.n_out));
          tr.value_t.push_back(dot(val, f.t_ccw));
        } else {
          const Voigt tau{shape_component(i, 0, mv), shape_component(i, 1, mv),
                          shape_component(i, 2, mv)};
          double nn = 0.0, nt = 0.0;
          for (int c = 0; c < 3; ++c) {
            nn += tensor_trace(f.n_out, f.n_out, c) * tau[c];
            nt += tensor_trace(f.t_ccw, f.n_out, c) * tau[c];
          }
          tr.value_n.push_back(nn);
          tr.value_t.push_back(nt);
        }
      }
    }
  }
  return sh;
}

// ------------------------------------------------------- point evaluation

LocalPoly local_field(const FESpace& space, const std::vector<double>& coeffs, int t) {
  TDNNS_REQUIRE(static_cast<int>(coeffs.size()) == space.ndof,
                "coefficient vector length does not match the space");
  const LocalBasis basis = build_local_basis(space, t);
  const std::vector<int> dofs = space.element_dofs(t);
  LocalPoly p;
  p.center = basis.geo.center;
  p.scale = basis.geo.h;
  p.degree = basis.degree;
  p.ncomp = basis.ncomp;
  p.coeff.assign(static_cast<size_t>(basis.nmono) * basis.ncomp, 0.0);
  for (size_t i = 0; i < dofs.size(); ++i) {
    const double ci = coeffs[dofs[i]];
    if (ci == 0.0) continue;
    for (int j = 0; j < basis.nmono * basis.ncomp; ++j) p.coeff[j] += ci * basis.coeff(i, j);
  }
  return p;
}

namespace {
void eval_components(const LocalPoly& p, Vec2 x, double* out) {
  const auto exps = mono_exponents(p.degree);
  const Vec2 u = (1.0 / p.scale) * (x - p.center);
  for (int c = 0; c < p.ncomp; ++c) out[c] = 0.0;
  for (size_t j = 0; j < exps.size(); ++j) {
    const double m = mono_value(exps[j], u.x, u.y);
    for (int c = 0; c < p.ncomp; ++c) out[c] += p.coeff[j * p.ncomp + c] * m;
  }
}
}  // namespace

double eval_scalar(const LocalPoly& p, Vec2 x) {
  TDNNS_REQUIRE(p.ncomp == 1, "eval_scalar on a non-scalar field");
  double v;
  eval_components(p, x, &v);
  return v;
}

Vec2 eval_vector(const LocalPoly& p, Vec2 x) {
  TDNNS_REQUIRE(p.ncomp == 2, "eval_vector on a non-vector field");
  double v[2];
  eval_components(p, x, v);
  return {v[0], v[1]};
}

Voigt eval_tensor(const LocalPoly& p, Vec2 x) {
  TDNNS_REQUIRE(p.ncomp == 3, "eval_tensor on a non-tensor field");
  Voigt v;
  eval_components(p, x, v.data());
  return v;
}

// ----------------------------------------------------------- interpolation

namespace {

/// Edge moments of a scalar trace against the orthonormal Legendre basis.
template <typename TraceFn>
void edge_moments(const TriMesh& mesh, int e, int k, const TraceFn& trace, double* out) {
  const QuadRule& rule = segment_rule(kMaxQuadDegree);
  const Vec2 lo = mesh.vertices[mesh.edges[e][0]], hi = mesh.vertices[mesh.edges[e][1]];
  for (int r = 0; r <= k; ++r) out[r] = 0.0;
  for (int q = 0; q < rule.size(); ++q) {
    const double s = rule.points[q].x, w = rule.weights[q];
    const double v = trace(lo + s * (hi - lo));
    for (int r = 0; r <= k; ++r) out[r] += w * legendre01(r, s) * v;
  }
}

/// Interior moments (1/|T|) int f . b_i against the orthonormal bubbles.
template <int NC, typename Fn>
void interior_moments(const FESpace& space, int t, const Fn& f, std::vector<double>& vals) {
  const LocalBasis basis = build_local_basis(space, t);
  const int n_int = static_cast<int>(basis.bubbles.cols());
  vals.assign(n_int, 0.0);
  if (n_int == 0) return;
  const QuadRule& rule = triangle_rule(kMaxQuadDegree);
  for (int q = 0; q < rule.size(); ++q) {
    const Vec2 xq = basis.geo.v[0] + rule.points[q].x * (basis.geo.v[1] - basis.geo.v[0]) +
                    rule.points[q].y * (basis.geo.v[2] - basis.geo.v[0]);
    const double w = rule.weights[q] * 2.0;  // (1/|T|) * physical weight
    const Vec2 u = basis.geo.to_local(xq);
    const std::array<double, NC> fv = f(xq);
    std::vector<double> mv(basis.nmono);
    for (int j = 0; j < basis.nmono; ++j) mv[j] = mono_value(basis.exps[j], u.x, u.y);
    for (int i = 0; i < n_int; ++i) {
      double bi_dot_f = 0.0;
      for (int j = 0; j < basis.nmono; ++j)
        for (int c = 0; c < NC; ++c)
          bi_dot_f += component_weight(NC, c) * basis.bubbles(j * NC + c, i) * mv[j] * fv[c];
      vals[i] += w * bi_dot_f;
    }
  }
}

}  // namespace

std::vector<double> interpolate(const FESpace& space, const std::function<double(Vec2)>& f) {
  std::vector<double> out(space.ndof, 0.0);
  const TriMesh& mesh = *space.mesh;
  if (space.kind == SpaceKind::Deflection) {
    const int m = space.order;
    for (int v = 0; v < mesh.num_vertices(); ++v) out[v] = f(mesh.vertices[v]);
    for (int e = 0; e < mesh.num_edges(); ++e) {
      const Vec2 lo = mesh.vertices[mesh.edges[e][0]], hi = mesh.vertices[mesh.edges[e][1]];
      for (int r = 1; r < m; ++r)
        out[space.edge_offset + e * (m - 1) + (r - 1)] =
            f(lo + (static_cast<double>(r) / m) * (hi - lo));
    }
    for (int t = 0; t < mesh.num_triangles(); ++t) {
      const auto g = element_geometry(mesh, t);
      int idx = 0;
      for (int a = 1; a <= m - 2; ++a)
        for (int bb = 1; bb <= m - 1 - a; ++bb, ++idx)
          out[space.interior_offset + t * space.dofs_per_interior + idx] =
              f((1.0 / m) * (a * g.v[0] + bb * g.v[1] + (m - a - bb) * g.v[2]));
    }
    return out;
  }
  TDNNS_REQUIRE(space.kind == SpaceKind::Multiplier,
                "scalar interpolation requires a deflection or multiplier space");
  std::vector<double> mom(space.order + 1);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    edge_moments(mesh, e, space.order, f, mom.data());
    for (int r = 0; r <= space.order; ++r) out[e * (space.order + 1) + r] = mom[r];
  }
  return out;
}

std::vector<double> interpolate(const FESpace& space, const std::function<Vec2(Vec2)>& f) {
  TDNNS_REQUIRE(space.kind == SpaceKind::Rotation, "vector interpolation requires a rotation space");
  const TriMesh& mesh = *space.mesh;
  std::vector<double> out(space.ndof, 0.0);
  std::vector<double> mom(space.order + 1);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const Vec2 te = edge_tangent(mesh, e);
    edge_moments(mesh, e, space.order, [&](Vec2 x) { return dot(f(x), te); }, mom.data());
    for (int r = 0; r <= space.order; ++r) out[e * (space.order + 1) + r] = mom[r];
  }
  std::vector<double> vals;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    interior_moments<2>(space, t,
                        [&](Vec2 x) {
                          const Vec2 v = f(x);
                          return std::array<double, 2>{v.x, v.y};
                        },
                        vals);
    for (size_t i = 0; i < vals.size(); ++i)
      out[space.interior_offset + t * space.dofs_per_interior + i] = vals[i];
  }
  return out;
}

std::vector<double> interpolate(const FESpace& space, const std::function<Voigt(Vec2)>& f) {
  TDNNS_REQUIRE(space.kind == SpaceKind::Moment, "tensor interpolation requires a moment space");
  const TriMesh& mesh = *space.mesh;
  std::vector<double> out(space.ndof, 0.0);
  std::vector<double> mom(space.order + 1);

  if (!space.broken) {
    for (int e = 0; e < mesh.num_edges(); ++e) {
      const Vec2 ne = edge_normal(mesh, e);
      edge_moments(mesh, e, space.order,
                   [&](Vec2 x) {
                     const Voigt v = f(x);
                     return tensor_trace(ne, ne, 0) * v[0] + tensor_trace(ne, ne, 1) * v[1] +
                            tensor_trace(ne, ne, 2) * v[2];
                   },
                   mom.data());
      for (int r = 0; r <= space.order; ++r) out[e * (space.order + 1) + r] = mom[r];
    }
  }
  std::vector<double> vals;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const std::vector<int> dofs = space.element_dofs(t);
    if (space.broken) {
      for (int le = 0; le < 3; ++le) {
        const EdgeFrame fr = edge_frame(mesh, t, le);
        edge_moments(mesh, fr.edge, space.order,
                     [&](Vec2 x) {
                       const Voigt v = f(x);
                       return tensor_trace(fr.n_global, fr.n_global, 0) * v[0] +
                              tensor_trace(fr.n_global, fr.n_global, 1) * v[1] +
                              tensor_trace(fr.n_global, fr.n_global, 2) * v[2];
                     },
                     mom.data());
        for (int r = 0; r <= space.order; ++r) out[dofs[le * (space.order + 1) + r]] = mom[r];
      }
    }
    interior_moments<3>(space, t, [&](Vec2 x) { return std::array<double, 3>(f(x)); }, vals);
    const int base = 3 * (space.order + 1);
    for (size_t i = 0; i < vals.size(); ++i) out[dofs[base + i]] = vals[i];
  }
  return out;
}

std::vector<double> interpolate_gradient(const FESpace& deflection, const FESpace& rotation,
                                         const std::vector<double>& w_coeffs) {
  TDNNS_REQUIRE(deflection.kind == SpaceKind::Deflection && rotation.kind == SpaceKind::Rotation,
                "interpolate_gradient needs a deflection and a rotation space");
  TDNNS_REQUIRE(deflection.mesh == rotation.mesh, "spaces live on different meshes");
  TDNNS_REQUIRE(deflection.order == rotation.order + 1,
                "gradient interpolation requires deflection order = rotation order + 1");
  TDNNS_REQUIRE(static_cast<int>(w_coeffs.size()) == deflection.ndof,
                "coefficient vector length does not match the deflection space");

  const TriMesh& mesh = *deflection.mesh;
  const int k = rotation.order;
  std::vector<double> out(rotation.ndof, 0.0);

  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const LocalPoly w = local_field(deflection, w_coeffs, t);
    const auto exps = mono_exponents(w.degree);
    const auto grad_w = [&](Vec2 x) {
      const Vec2 u = (1.0 / w.scale) * (x - w.center);
      Vec2 g{};
      for (size_t j = 0; j < exps.size(); ++j)
        g += (w.coeff[j] / w.scale) * mono_gradient(exps[j], u.x, u.y);
      return g;
    };

    // Edge dofs: tangential moments of grad w, identical from both sides.
    const QuadRule& erule = segment_rule(2 * k);
    for (int le = 0; le < 3; ++le) {
      const EdgeFrame f = edge_frame(mesh, t, le);
      for (int r = 0; r <= k; ++r) {
        double val = 0.0;
        for (int q = 0; q < erule.size(); ++q) {
          const double s = erule.points[q].x;
          val += erule.weights[q] * legendre01(r, s) * dot(grad_w(f.at(s)), f.t_global);
        }
        out[f.edge * (k + 1) + r] = val;
      }
    }

    // Interior dofs: bubble moments of grad w.
    if (rotation.dofs_per_interior > 0) {
      const LocalBasis rb = build_local_basis(rotation, t);
      const QuadRule& vrule = triangle_rule(2 * k);
      for (int q = 0; q < vrule.size(); ++q) {
        const Vec2 xq = rb.geo.v[0] + vrule.points[q].x * (rb.geo.v[1] - rb.geo.v[0]) +
                        vrule.points[q].y * (rb.geo.v[2] - rb.geo.v[0]);
        const double wq = vrule.weights[q] * 2.0;  // (1/|T|) * physical weight
        const Vec2 u = rb.geo.to_local(xq);
        const Vec2 g = grad_w(xq);
        for (int i = 0; i < rotation.dofs_per_interior; ++i) {
          double bi_dot_g = 0.0;
          for (int j = 0; j < rb.nmono; ++j) {
            const double m = mono_value(rb.exps[j], u.x, u.y);
            bi_dot_g += m * (rb.bubbles(j * 2, i) * g.x + rb.bubbles(j * 2 + 1, i) * g.y);
          }
          out[rotation.interior_offset + t * rotation.dofs_per_interior + i] += wq * bi_dot_g;
        }
      }
    }
  }
  return out;
}

}  // namespace tdnns
