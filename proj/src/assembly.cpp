// Assembly of the mixed plate system: element matrices, boundary conditions,
// monolithic and hybrid-condensed forms, solves, and field recovery.
#include "tdnns/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <set>
#include <thread>

namespace tdnns {

namespace {

// Runs fn(chunk, begin, end) over contiguous element ranges, one per thread.
// Chunk results must be merged in chunk order to keep determinism.
template <typename Fn>
int for_chunks(int n, int threads, Fn&& fn) {
  const int nch = std::max(1, std::min(threads, n));
  if (nch == 1) {
    fn(0, 0, n);
    return 1;
  }
  const int per = (n + nch - 1) / nch;
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(nch);
  for (int c = 0; c < nch; ++c) {
    const int b = c * per, e = std::min(n, b + per);
    if (b >= e) break;
    pool.emplace_back([&, c, b, e] {
      try {
        fn(c, b, e);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& err : errors)
    if (err) std::rethrow_exception(err);
  return nch;
}

const BoundaryCondition& marker_bc(const BCSpec& bc, int marker) {
  const auto it = bc.markers.find(marker);
  TDNNS_REQUIRE(it != bc.markers.end(),
                "no boundary condition for marker " + std::to_string(marker));
  return it->second;
}

/// Legendre moments int_0^1 f(x(s)) q_r(s) ds of a scalar trace datum.
std::vector<double> data_edge_moments(const TriMesh& mesh, int e, int k,
                                      const std::function<double(Vec2)>& f) {
  std::vector<double> mom(k + 1, 0.0);
  if (!f) return mom;
  const QuadRule& rule = segment_rule(kMaxQuadDegree);
  const Vec2 lo = mesh.vertices[mesh.edges[e][0]], hi = mesh.vertices[mesh.edges[e][1]];
  for (int q = 0; q < rule.size(); ++q) {
    const double s = rule.points[q].x;
    const double v = f(lo + s * (hi - lo));
    for (int r = 0; r <= k; ++r) mom[r] += rule.weights[q] * legendre01(r, s) * v;
  }
  return mom;
}

void finish_essential(EssentialSet& s) {
  const int n = static_cast<int>(s.flag.size());
  s.free_index.assign(n, -1);
  s.free_dofs.clear();
  for (int i = 0; i < n; ++i)
    if (!s.flag[i]) {
      s.free_index[i] = static_cast<int>(s.free_dofs.size());
      s.free_dofs.push_back(i);
    }
}

EssentialSet empty_essential(int ndof) {
  EssentialSet s;
  s.flag.assign(ndof, 0);
  s.value.assign(ndof, 0.0);
  finish_essential(s);
  return s;
}

}  // namespace

// ------------------------------------------------------------------- BCSpec

void BCSpec::validate(const TriMesh& mesh) const {
  std::set<int> present;
  for (int e = 0; e < mesh.num_edges(); ++e)
    if (mesh.edge_markers[e] > 0) present.insert(mesh.edge_markers[e]);
  for (int m : present)
    TDNNS_REQUIRE(markers.count(m) > 0,
                  "boundary marker " + std::to_string(m) + " has no boundary condition");
  for (const auto& [m, c] : markers) {
    TDNNS_REQUIRE(!(c.essential_deflection && c.edge_force),
                  "marker " + std::to_string(m) +
                      ": essential deflection excludes a natural edge force");
    TDNNS_REQUIRE(!(c.essential_rotation && c.edge_moment),
                  "marker " + std::to_string(m) +
                      ": essential rotation excludes a natural edge moment");
    TDNNS_REQUIRE(!(c.essential_moment && c.edge_rotation),
                  "marker " + std::to_string(m) +
                      ": essential moment excludes a natural edge rotation");
  }
}

Spaces make_spaces(const TriMesh& mesh, int order, bool hybrid) {
  Spaces s;
  s.hybrid = hybrid;
  s.moment = build_space(mesh, SpaceKind::Moment, order, hybrid);
  s.rotation = build_space(mesh, SpaceKind::Rotation, order);
  s.deflection = build_space(mesh, SpaceKind::Deflection, order + 1);
  if (hybrid)
    s.multiplier = build_space(mesh, SpaceKind::Multiplier, order);
  else
    s.multiplier.mesh = &mesh;  // ndof stays 0
  return s;
}

// ---------------------------------------------------------- essential sets

std::vector<double> EssentialSet::expand(const std::vector<double>& free_values) const {
  TDNNS_REQUIRE(free_values.size() == free_dofs.size(), "free value vector length mismatch");
  std::vector<double> full = value;
  for (size_t i = 0; i < free_dofs.size(); ++i) full[free_dofs[i]] = free_values[i];
  return full;
}

EssentialSet essential_deflection(const FESpace& space, const BCSpec& bc) {
  TDNNS_REQUIRE(space.kind == SpaceKind::Deflection, "deflection space expected");
  const TriMesh& mesh = *space.mesh;
  EssentialSet s = empty_essential(space.ndof);
  const int m = space.order;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.edge_markers[e] == 0) continue;
    const BoundaryCondition& c = marker_bc(bc, mesh.edge_markers[e]);
    if (!c.essential_deflection) continue;
    const auto eval = [&](Vec2 x) { return c.deflection_value ? c.deflection_value(x) : 0.0; };
    const Vec2 lo = mesh.vertices[mesh.edges[e][0]], hi = mesh.vertices[mesh.edges[e][1]];
    // Vertex dofs: a vertex is constrained by any adjacent essential edge.
    for (int end = 0; end < 2; ++end) {
      const int v = mesh.edges[e][end];
      s.flag[v] = 1;
      s.value[v] = eval(mesh.vertices[v]);
    }
    for (int r = 1; r < m; ++r) {
      const int dof = space.edge_offset + e * (m - 1) + (r - 1);
      s.flag[dof] = 1;
      s.value[dof] = eval(lo + (static_cast<double>(r) / m) * (hi - lo));
    }
  }
  finish_essential(s);
  return s;
}

EssentialSet essential_rotation(const FESpace& space, const BCSpec& bc) {
  TDNNS_REQUIRE(space.kind == SpaceKind::Rotation, "rotation space expected");
  const TriMesh& mesh = *space.mesh;
  EssentialSet s = empty_essential(space.ndof);
  const int k = space.order;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.edge_markers[e] == 0) continue;
    const BoundaryCondition& c = marker_bc(bc, mesh.edge_markers[e]);
    if (!c.essential_rotation) continue;
    const Vec2 te = edge_tangent(mesh, e);
    std::function<double(Vec2)> trace;
    if (c.rotation_value) trace = [&c, te](Vec2 x) { return dot(c.rotation_value(x), te); };
    const std::vector<double> mom = data_edge_moments(mesh, e, k, trace);
    for (int r = 0; r <= k; ++r) {
      const int dof = e * (k + 1) + r;
      s.flag[dof] = 1;
      s.value[dof] = mom[r];
    }
  }
  finish_essential(s);
  return s;
}

EssentialSet essential_moment(const FESpace& space, const BCSpec& bc) {
  TDNNS_REQUIRE(space.kind == SpaceKind::Moment, "moment space expected");
  const TriMesh& mesh = *space.mesh;
  EssentialSet s = empty_essential(space.ndof);
  const int k = space.order;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.edge_markers[e] == 0) continue;
    const BoundaryCondition& c = marker_bc(bc, mesh.edge_markers[e]);
    if (!c.essential_moment) continue;
    const std::vector<double> mom = data_edge_moments(mesh, e, k, c.moment_value);
    if (space.broken) {
      // The edge block of the single adjacent element carries the nn-trace.
      const int t = mesh.edge_tris[e][0];
      int le = 0;
      while (mesh.tri_edges[t][le] != e) ++le;
      for (int r = 0; r <= k; ++r) {
        const int dof = t * space.dofs_per_element + le * (k + 1) + r;
        s.flag[dof] = 1;
        s.value[dof] = mom[r];
      }
    } else {
      for (int r = 0; r <= k; ++r) {
        const int dof = e * (k + 1) + r;
        s.flag[dof] = 1;
        s.value[dof] = mom[r];
      }
    }
  }
  finish_essential(s);
  return s;
}

EssentialSet essential_multiplier(const FESpace& space, const BCSpec& bc) {
  TDNNS_REQUIRE(space.kind == SpaceKind::Multiplier, "multiplier space expected");
  const TriMesh& mesh = *space.mesh;
  EssentialSet s = empty_essential(space.ndof);
  const int k = space.order;
  // Boundary multipliers are always essential: where the normal rotation is
  // natural data g they represent its trace on the global edge normal
  // (sign = adjacent element orientation); where the moment is essential the
  // multiplier is inert and pinned to zero (the eliminated moment edge block
  // carries the data instead).
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (mesh.edge_markers[e] == 0) continue;
    const BoundaryCondition& c = marker_bc(bc, mesh.edge_markers[e]);
    std::vector<double> mom(k + 1, 0.0);
    if (!c.essential_moment && c.edge_rotation) {
      mom = data_edge_moments(mesh, e, k, c.edge_rotation);
      // Orientation of the single adjacent element relative to the edge.
      const int t = mesh.edge_tris[e][0];
      int le = 0;
      while (mesh.tri_edges[t][le] != e) ++le;
      const auto& tri = mesh.triangles[t];
      const Vec2 a = mesh.vertices[tri[(le + 1) % 3]], b = mesh.vertices[tri[(le + 2) % 3]];
      const double sgn = dot(b - a, mesh.vertices[mesh.edges[e][1]] - mesh.vertices[mesh.edges[e][0]]);
      if (sgn < 0.0)
        for (double& v : mom) v = -v;
    }
    for (int r = 0; r <= k; ++r) {
      const int dof = e * (k + 1) + r;
      s.flag[dof] = 1;
      s.value[dof] = mom[r];
    }
  }
  finish_essential(s);
  return s;
}

// --------------------------------------------------------- element system

ElementSystem element_system(const PlateProblem& problem, const Spaces& spaces, int t) {
  const int k = problem.order;
  const int vol_deg = 2 * k + 2, edge_deg = 2 * k + 2;
  const TriMesh& mesh = *problem.mesh;
  const BendingTensors mat = make_bending_tensors(problem.material);
  const double shear_coef = mat.shear_modulus / (problem.thickness * problem.thickness);

  const ElementShapes msh = element_shapes(spaces.moment, t, vol_deg, edge_deg);
  const ElementShapes tsh = element_shapes(spaces.rotation, t, vol_deg, edge_deg);
  const ElementShapes wsh = element_shapes(spaces.deflection, t, vol_deg, edge_deg);
  ElementShapes lsh;
  if (spaces.hybrid) lsh = element_shapes(spaces.multiplier, t, vol_deg, edge_deg);

  ElementSystem es;
  es.mdofs = msh.dofs;
  es.tdofs = tsh.dofs;
  es.wdofs = wsh.dofs;
  es.ldofs = lsh.dofs;
  const int nm = msh.nloc, nt = tsh.nloc, nw = wsh.nloc, nl = lsh.nloc;
  const int nu = nt + nw + nl;
  es.A = Eigen::MatrixXd::Zero(nm, nm);
  es.B = Eigen::MatrixXd::Zero(nm, nu);
  es.S = Eigen::MatrixXd::Zero(nu, nu);
  es.l1 = Eigen::VectorXd::Zero(nm);
  es.l2 = Eigen::VectorXd::Zero(nu);

  // Volume terms: compliance, -tau : eps(theta), shear penalty, volume load.
  const int nq = static_cast<int>(msh.points.size());
  std::vector<Voigt> tau(nm), ce(nm);
  std::vector<Vec2> z(nt + nw);
  for (int q = 0; q < nq; ++q) {
    const double wq = msh.weights[q];
    for (int i = 0; i < nm; ++i) {
      tau[i] = {msh.value(q, i, 0), msh.value(q, i, 1), msh.value(q, i, 2)};
      ce[i] = mat.apply_compliance(tau[i]);
    }
    for (int i = 0; i < nm; ++i)
      for (int j = 0; j <= i; ++j) {
        // (A tau_i) : tau_j; the compliance result is strain-like, so the
        // contraction with a stress-like tensor is the plain triple product.
        const double v = wq * (ce[i][0] * tau[j][0] + ce[i][1] * tau[j][1] + ce[i][2] * tau[j][2]);
        es.A(i, j) += v;
        if (i != j) es.A(j, i) += v;
      }
    for (int j = 0; j < nt; ++j) {
      const Voigt ej = tsh.eps(q, j);  // engineering Voigt: plain dot against stress
      for (int i = 0; i < nm; ++i)
        es.B(i, j) -= wq * (tau[i][0] * ej[0] + tau[i][1] * ej[1] + tau[i][2] * ej[2]);
    }
    // Shear penalty over (theta, w): z = -theta for rotation columns,
    // z = grad w for deflection columns.
    for (int j = 0; j < nt; ++j) z[j] = {-tsh.value(q, j, 0), -tsh.value(q, j, 1)};
    for (int j = 0; j < nw; ++j) z[nt + j] = wsh.grad(q, j);
    for (int i = 0; i < nt + nw; ++i)
      for (int j = 0; j <= i; ++j) {
        const double v = wq * shear_coef * dot(z[i], z[j]);
        es.S(i, j) += v;
        if (i != j) es.S(j, i) += v;
      }
    if (problem.load) {
      const double g = problem.load(msh.points[q]);
      for (int j = 0; j < nw; ++j) es.l2(nt + j) += wq * g * wsh.value(q, j);
    }
  }

  // Edge terms: duality boundary part, multiplier coupling, natural data.
  for (int le = 0; le < 3; ++le) {
    const auto& med = msh.edge[le];
    const auto& ted = tsh.edge[le];
    const auto& wed = wsh.edge[le];
    const int neq = static_cast<int>(med.weights.size());
    for (int q = 0; q < neq; ++q) {
      const double wq = med.weights[q];
      for (int i = 0; i < nm; ++i) {
        const double nn = med.value_n[q * nm + i];
        if (nn == 0.0) continue;
        for (int j = 0; j < nt; ++j) es.B(i, j) += wq * nn * ted.value_n[q * nt + j];
        if (nl > 0) {
          const auto& led = lsh.edge[le];
          for (int j = 0; j < nl; ++j)
            es.B(i, nt + nw + j) -= wq * med.s_sign * nn * led.value_n[q * nl + j];
        }
      }
    }
    const int marker = mesh.edge_markers[med.edge];
    if (marker == 0) continue;
    const BoundaryCondition& c = marker_bc(problem.bc, marker);
    for (int q = 0; q < neq; ++q) {
      const double wq = med.weights[q];
      const Vec2 x = med.points[q];
      if (c.edge_force) {
        const double g0 = c.edge_force(x);
        for (int j = 0; j < nw; ++j) es.l2(nt + j) += wq * g0 * wed.value_n[q * nw + j];
      }
      if (c.edge_moment) {
        const double g1t = dot(c.edge_moment(x), ted.tangent);
        for (int j = 0; j < nt; ++j) es.l2(j) += wq * g1t * ted.value_t[q * nt + j];
      }
      if (!spaces.hybrid && c.edge_rotation && !c.essential_moment) {
        // Natural normal rotation datum enters the moment equation; in
        // hybrid mode the essential multiplier values carry it instead.
        const double g2 = c.edge_rotation(x);
        for (int i = 0; i < nm; ++i) es.l1(i) += wq * g2 * med.value_n[q * nm + i];
      }
    }
  }
  return es;
}

// ----------------------------------------------------------------- assemble

BlockSystem assemble(const PlateProblem& problem) {
  TDNNS_REQUIRE(problem.mesh != nullptr, "problem has no mesh");
  TDNNS_REQUIRE(problem.thickness > 0.0, "thickness must be positive");
  const TriMesh& mesh = *problem.mesh;
  problem.bc.validate(mesh);

  BlockSystem bs;
  bs.spaces = make_spaces(mesh, problem.order, problem.hybrid);
  bs.ess_m = essential_moment(bs.spaces.moment, problem.bc);
  bs.ess_t = essential_rotation(bs.spaces.rotation, problem.bc);
  bs.ess_w = essential_deflection(bs.spaces.deflection, problem.bc);
  bs.ess_l = problem.hybrid ? essential_multiplier(bs.spaces.multiplier, problem.bc)
                            : empty_essential(0);
  bs.off_m = 0;
  bs.off_t = bs.ess_m.free_count();
  bs.off_w = bs.off_t + bs.ess_t.free_count();
  bs.off_l = bs.off_w + bs.ess_w.free_count();
  bs.n_free = bs.off_l + bs.ess_l.free_count();
  const int n_u_free = bs.n_free - bs.off_t;

  // The rhs is accumulated as an ordered list of adds so that applying the
  // chunks in order reproduces the sequential element-order sum bit-for-bit
  // regardless of the thread count (the matrix gets this for free from
  // triplet concatenation).
  struct ChunkOut {
    std::vector<Triplet> k, a, b, s;
    std::vector<std::pair<int, double>> radds;
  };
  const int T = mesh.num_triangles();
  std::vector<ChunkOut> chunks(std::max(1, std::min(problem.threads, T)));

  const int nch = for_chunks(T, problem.threads, [&](int chunk, int begin, int end) {
    ChunkOut& out = chunks[chunk];
    for (int t = begin; t < end; ++t) {
      const ElementSystem es = element_system(problem, bs.spaces, t);
      const int nm = static_cast<int>(es.mdofs.size());
      const int nt = static_cast<int>(es.tdofs.size());
      const int nw = static_cast<int>(es.wdofs.size());
      const int nu = es.n_u();
      // Global free indices (-1 = essential) and essential values.
      std::vector<int> mrow(nm), urow(nu);
      std::vector<double> mval(nm, 0.0), uval(nu, 0.0);
      for (int i = 0; i < nm; ++i) {
        const int d = es.mdofs[i];
        mrow[i] = bs.ess_m.free_index[d];
        if (mrow[i] < 0) mval[i] = bs.ess_m.value[d];
      }
      for (int i = 0; i < nu; ++i) {
        if (i < nt) {
          const int d = es.tdofs[i];
          urow[i] = bs.ess_t.free_index[d] < 0 ? -1 : bs.off_t + bs.ess_t.free_index[d];
          if (urow[i] < 0) uval[i] = bs.ess_t.value[d];
        } else if (i < nt + nw) {
          const int d = es.wdofs[i - nt];
          urow[i] = bs.ess_w.free_index[d] < 0 ? -1 : bs.off_w + bs.ess_w.free_index[d];
          if (urow[i] < 0) uval[i] = bs.ess_w.value[d];
        } else {
          const int d = es.ldofs[i - nt - nw];
          urow[i] = bs.ess_l.free_index[d] < 0 ? -1 : bs.off_l + bs.ess_l.free_index[d];
          if (urow[i] < 0) uval[i] = bs.ess_l.value[d];
        }
      }

      for (int i = 0; i < nm; ++i) {
        if (mrow[i] >= 0) out.radds.push_back({mrow[i], es.l1(i)});
        for (int j = 0; j < nm; ++j) {
          const double v = es.A(i, j);
          if (v == 0.0) continue;
          if (mrow[i] >= 0 && mrow[j] >= 0) {
            out.k.push_back({mrow[i], mrow[j], v});
            out.a.push_back({mrow[i], mrow[j], v});
          } else if (mrow[i] >= 0) {
            out.radds.push_back({mrow[i], -v * mval[j]});
          }
        }
        for (int j = 0; j < nu; ++j) {
          const double v = es.B(i, j);
          if (v == 0.0) continue;
          if (mrow[i] >= 0 && urow[j] >= 0) {
            out.k.push_back({mrow[i], urow[j], v});
            out.k.push_back({urow[j], mrow[i], v});
            out.b.push_back({mrow[i], urow[j] - bs.off_t, v});
          } else if (mrow[i] >= 0) {
            out.radds.push_back({mrow[i], -v * uval[j]});
          } else if (urow[j] >= 0) {
            out.radds.push_back({urow[j], -v * mval[i]});
          }
        }
      }
      for (int i = 0; i < nu; ++i) {
        if (urow[i] >= 0) out.radds.push_back({urow[i], -es.l2(i)});
        for (int j = 0; j < nu; ++j) {
          const double v = es.S(i, j);
          if (v == 0.0) continue;
          if (urow[i] >= 0 && urow[j] >= 0) {
            out.k.push_back({urow[i], urow[j], -v});
            out.s.push_back({urow[i] - bs.off_t, urow[j] - bs.off_t, v});
          } else if (urow[i] >= 0) {
            out.radds.push_back({urow[i], v * uval[j]});
          }
        }
      }
    }
  });

  std::vector<Triplet> k_all, a_all, b_all, s_all;
  bs.rhs.assign(bs.n_free, 0.0);
  for (int c = 0; c < nch; ++c) {
    k_all.insert(k_all.end(), chunks[c].k.begin(), chunks[c].k.end());
    a_all.insert(a_all.end(), chunks[c].a.begin(), chunks[c].a.end());
    b_all.insert(b_all.end(), chunks[c].b.begin(), chunks[c].b.end());
    s_all.insert(s_all.end(), chunks[c].s.begin(), chunks[c].s.end());
    for (const auto& [i, v] : chunks[c].radds) bs.rhs[i] += v;
  }
  bs.matrix = from_triplets(bs.n_free, bs.n_free, k_all);
  bs.compliance = from_triplets(bs.off_t, bs.off_t, a_all);
  bs.duality = from_triplets(bs.off_t, n_u_free, b_all);
  bs.shear = from_triplets(n_u_free, n_u_free, s_all);
  return bs;
}

// ----------------------------------------------------------------- condense

CondensedSystem condense(const PlateProblem& problem) {
  TDNNS_REQUIRE(problem.mesh != nullptr, "problem has no mesh");
  TDNNS_REQUIRE(problem.hybrid, "condensation requires the hybrid formulation");
  TDNNS_REQUIRE(problem.thickness > 0.0, "thickness must be positive");
  const TriMesh& mesh = *problem.mesh;
  problem.bc.validate(mesh);

  CondensedSystem cs;
  cs.spaces = make_spaces(mesh, problem.order, true);
  cs.ess_m = essential_moment(cs.spaces.moment, problem.bc);
  cs.ess_t = essential_rotation(cs.spaces.rotation, problem.bc);
  cs.ess_w = essential_deflection(cs.spaces.deflection, problem.bc);
  cs.ess_l = essential_multiplier(cs.spaces.multiplier, problem.bc);

  // Interface numbering: free edge rotation dofs, free vertex/edge deflection
  // dofs, free multipliers.
  cs.iface_t.assign(cs.spaces.rotation.ndof, -1);
  cs.iface_w.assign(cs.spaces.deflection.ndof, -1);
  cs.iface_l.assign(cs.spaces.multiplier.ndof, -1);
  int idx = 0;
  for (int d = 0; d < cs.spaces.rotation.interior_offset; ++d)
    if (!cs.ess_t.flag[d]) cs.iface_t[d] = idx++;
  for (int d = 0; d < cs.spaces.deflection.interior_offset; ++d)
    if (!cs.ess_w.flag[d]) cs.iface_w[d] = idx++;
  for (int d = 0; d < cs.spaces.multiplier.ndof; ++d)
    if (!cs.ess_l.flag[d]) cs.iface_l[d] = idx++;
  cs.n_interface = idx;

  const int k = problem.order;
  const int nt_edge = 3 * (k + 1);
  const int nw_iface = 3 + 3 * k;  // vertices + edge nodes of the order k+1 space

  const int T = mesh.num_triangles();
  cs.elements.resize(T);
  // Ordered rhs adds for thread-count-independent bits; see assemble_monolithic.
  struct ChunkOut {
    std::vector<Triplet> trip;
    std::vector<std::pair<int, double>> radds;
  };
  std::vector<ChunkOut> chunks(std::max(1, std::min(problem.threads, T)));

  const int nch = for_chunks(T, problem.threads, [&](int chunk, int begin, int end) {
    ChunkOut& out = chunks[chunk];
    for (int t = begin; t < end; ++t) {
      const ElementSystem es = element_system(problem, cs.spaces, t);
      const int nm = static_cast<int>(es.mdofs.size());
      const int nt = static_cast<int>(es.tdofs.size());
      const int nw = static_cast<int>(es.wdofs.size());
      const int nu = es.n_u();
      CondensedSystem::ElementRecovery& rec = cs.elements[t];
      rec.mdofs = es.mdofs;
      rec.tdofs = es.tdofs;
      rec.wdofs = es.wdofs;
      rec.ldofs = es.ldofs;

      // Eliminate the element moments (free rows; essential ones are data).
      std::vector<int> m_ess;
      for (int i = 0; i < nm; ++i)
        (cs.ess_m.flag[es.mdofs[i]] ? m_ess : rec.m_free).push_back(i);
      const int nf = static_cast<int>(rec.m_free.size());
      Eigen::MatrixXd a_ff(nf, nf), b_f(nf, nu);
      Eigen::VectorXd r1(nf);
      for (int i = 0; i < nf; ++i) {
        for (int j = 0; j < nf; ++j) a_ff(i, j) = es.A(rec.m_free[i], rec.m_free[j]);
        b_f.row(i) = es.B.row(rec.m_free[i]);
        r1(i) = es.l1(rec.m_free[i]);
        for (int j : m_ess) r1(i) -= es.A(rec.m_free[i], j) * cs.ess_m.value[es.mdofs[j]];
      }
      Eigen::LLT<Eigen::MatrixXd> allt(a_ff);
      TDNNS_REQUIRE(allt.info() == Eigen::Success,
                    "element " + std::to_string(t) + ": compliance block is not positive definite");
      rec.inv_a_b = allt.solve(b_f);
      rec.inv_a_l1 = allt.solve(r1);

      Eigen::MatrixXd K = es.S + b_f.transpose() * rec.inv_a_b;
      Eigen::VectorXd g = es.l2 + b_f.transpose() * rec.inv_a_l1;
      for (int j : m_ess) g += es.B.row(j).transpose() * cs.ess_m.value[es.mdofs[j]];

      // Interior (single-element) rotation/deflection dofs are eliminated.
      for (int i = 0; i < nu; ++i) {
        const bool is_bubble = (i < nt && i >= nt_edge) || (i >= nt && i < nt + nw && i - nt >= nw_iface);
        (is_bubble ? rec.bubble : rec.rest).push_back(i);
      }
      const int nb = static_cast<int>(rec.bubble.size());
      const int nr = static_cast<int>(rec.rest.size());
      Eigen::MatrixXd kbb(nb, nb), kbr(nb, nr), krr(nr, nr);
      Eigen::VectorXd gb(nb), gr(nr);
      for (int i = 0; i < nb; ++i) {
        for (int j = 0; j < nb; ++j) kbb(i, j) = K(rec.bubble[i], rec.bubble[j]);
        for (int j = 0; j < nr; ++j) kbr(i, j) = K(rec.bubble[i], rec.rest[j]);
        gb(i) = g(rec.bubble[i]);
      }
      for (int i = 0; i < nr; ++i) {
        for (int j = 0; j < nr; ++j) krr(i, j) = K(rec.rest[i], rec.rest[j]);
        gr(i) = g(rec.rest[i]);
      }
      if (nb > 0) {
        Eigen::LLT<Eigen::MatrixXd> kllt(kbb);
        TDNNS_REQUIRE(kllt.info() == Eigen::Success,
                      "element " + std::to_string(t) + ": interior block is not positive definite");
        rec.inv_kbb_kbr = kllt.solve(kbr);
        rec.inv_kbb_g = kllt.solve(gb);
        krr -= kbr.transpose() * rec.inv_kbb_kbr;
        gr -= kbr.transpose() * rec.inv_kbb_g;
      } else {
        rec.inv_kbb_kbr = Eigen::MatrixXd::Zero(0, nr);
        rec.inv_kbb_g = Eigen::VectorXd::Zero(0);
      }

      // Emit the interface contribution with essential elimination.
      std::vector<int> gi(nr);
      std::vector<double> gval(nr, 0.0);
      for (int i = 0; i < nr; ++i) {
        const int u = rec.rest[i];
        if (u < nt) {
          const int d = es.tdofs[u];
          gi[i] = cs.iface_t[d];
          if (gi[i] < 0) gval[i] = cs.ess_t.value[d];
        } else if (u < nt + nw) {
          const int d = es.wdofs[u - nt];
          gi[i] = cs.iface_w[d];
          if (gi[i] < 0) gval[i] = cs.ess_w.value[d];
        } else {
          const int d = es.ldofs[u - nt - nw];
          gi[i] = cs.iface_l[d];
          if (gi[i] < 0) gval[i] = cs.ess_l.value[d];
        }
      }
      for (int i = 0; i < nr; ++i) {
        if (gi[i] < 0) continue;
        out.radds.push_back({gi[i], gr(i)});
        for (int j = 0; j < nr; ++j) {
          if (krr(i, j) == 0.0) continue;
          if (gi[j] >= 0)
            out.trip.push_back({gi[i], gi[j], krr(i, j)});
          else
            out.radds.push_back({gi[i], -krr(i, j) * gval[j]});
        }
      }
    }
  });

  std::vector<Triplet> all;
  cs.rhs.assign(cs.n_interface, 0.0);
  for (int c = 0; c < nch; ++c) {
    all.insert(all.end(), chunks[c].trip.begin(), chunks[c].trip.end());
    for (const auto& [i, v] : chunks[c].radds) cs.rhs[i] += v;
  }
  cs.matrix = from_triplets(cs.n_interface, cs.n_interface, all);
  return cs;
}

// ------------------------------------------------------------------- solves

SolutionFields solve_monolithic(const PlateProblem& problem) {
  const BlockSystem bs = assemble(problem);
  TDNNS_REQUIRE(bs.n_free <= 20000,
                "monolithic dense solve limited to 20000 unknowns, got " +
                    std::to_string(bs.n_free));
  std::vector<double> dense(static_cast<size_t>(bs.n_free) * bs.n_free, 0.0);
  for (int i = 0; i < bs.matrix.rows; ++i)
    for (int p = bs.matrix.row_ptr[i]; p < bs.matrix.row_ptr[i + 1]; ++p)
      dense[static_cast<size_t>(i) * bs.n_free + bs.matrix.col_idx[p]] = bs.matrix.values[p];
  const std::vector<double> x = solve_symmetric_indefinite(std::move(dense), bs.n_free, bs.rhs);

  SolutionFields f;
  f.n_free = bs.n_free;
  f.stats = {SolveMethod::Direct, 0, 0.0};
  const auto block = [&x](int off, int count) {
    return std::vector<double>(x.begin() + off, x.begin() + off + count);
  };
  f.moment = bs.ess_m.expand(block(bs.off_m, bs.ess_m.free_count()));
  f.rotation = bs.ess_t.expand(block(bs.off_t, bs.ess_t.free_count()));
  f.deflection = bs.ess_w.expand(block(bs.off_w, bs.ess_w.free_count()));
  f.multiplier = bs.ess_l.expand(block(bs.off_l, bs.ess_l.free_count()));
  return f;
}

SolutionFields solve_condensed(const PlateProblem& /*problem*/, const CondensedSystem& cs,
                               const SolveOptions& opts) {
  SolveStats stats;
  const std::vector<double> x = solve_spd(cs.matrix, cs.rhs, opts, &stats);

  SolutionFields f;
  f.n_free = cs.n_interface;
  f.stats = stats;
  f.moment = cs.ess_m.value;
  f.rotation = cs.ess_t.value;
  f.deflection = cs.ess_w.value;
  f.multiplier = cs.ess_l.value;
  for (int d = 0; d < cs.spaces.rotation.ndof; ++d)
    if (cs.iface_t[d] >= 0) f.rotation[d] = x[cs.iface_t[d]];
  for (int d = 0; d < cs.spaces.deflection.ndof; ++d)
    if (cs.iface_w[d] >= 0) f.deflection[d] = x[cs.iface_w[d]];
  for (int d = 0; d < cs.spaces.multiplier.ndof; ++d)
    if (cs.iface_l[d] >= 0) f.multiplier[d] = x[cs.iface_l[d]];

  // Element-level back substitution: interior dofs, then moments.
  for (const auto& rec : cs.elements) {
    const int nt = static_cast<int>(rec.tdofs.size());
    const int nw = static_cast<int>(rec.wdofs.size());
    const int nu = nt + nw + static_cast<int>(rec.ldofs.size());
    const auto local_value = [&](int u) {
      if (u < nt) return f.rotation[rec.tdofs[u]];
      if (u < nt + nw) return f.deflection[rec.wdofs[u - nt]];
      return f.multiplier[rec.ldofs[u - nt - nw]];
    };
    Eigen::VectorXd u_rest(rec.rest.size());
    for (size_t i = 0; i < rec.rest.size(); ++i) u_rest(i) = local_value(rec.rest[i]);
    if (!rec.bubble.empty()) {
      const Eigen::VectorXd u_b = rec.inv_kbb_g - rec.inv_kbb_kbr * u_rest;
      for (size_t i = 0; i < rec.bubble.size(); ++i) {
        const int u = rec.bubble[i];
        if (u < nt)
          f.rotation[rec.tdofs[u]] = u_b(i);
        else
          f.deflection[rec.wdofs[u - nt]] = u_b(i);
      }
    }
    Eigen::VectorXd u_full(nu);
    for (int u = 0; u < nu; ++u) u_full(u) = local_value(u);
    const Eigen::VectorXd m_f = rec.inv_a_l1 - rec.inv_a_b * u_full;
    for (size_t i = 0; i < rec.m_free.size(); ++i) f.moment[rec.mdofs[rec.m_free[i]]] = m_f(i);
  }
  return f;
}

SolutionFields solve_condensed(const PlateProblem& problem, const SolveOptions& opts) {
  return solve_condensed(problem, condense(problem), opts);
}

// -------------------------------------------------------- duality products

namespace {
void check_duality_pair(const ElementShapes& tau, const ElementShapes& eta,
                        const std::vector<double>& tc, const std::vector<double>& ec) {
  TDNNS_REQUIRE(tau.ncomp == 3 && eta.ncomp == 2,
                "duality product needs moment and rotation shapes");
  TDNNS_REQUIRE(tau.element == eta.element, "shapes belong to different elements");
  TDNNS_REQUIRE(tau.points.size() == eta.points.size(),
                "shapes tabulated with different volume rules");
  TDNNS_REQUIRE(static_cast<int>(tc.size()) == tau.nloc && static_cast<int>(ec.size()) == eta.nloc,
                "local coefficient length mismatch");
}
}  // namespace

double duality_product_element(const ElementShapes& tau, const ElementShapes& eta,
                               const std::vector<double>& tau_local,
                               const std::vector<double>& eta_local) {
  check_duality_pair(tau, eta, tau_local, eta_local);
  double acc = 0.0;
  for (size_t q = 0; q < tau.points.size(); ++q) {
    Voigt tv{};
    for (int i = 0; i < tau.nloc; ++i)
      for (int c = 0; c < 3; ++c) tv[c] += tau_local[i] * tau.value(static_cast<int>(q), i, c);
    Voigt ev{};
    for (int i = 0; i < eta.nloc; ++i) {
      const Voigt e = eta.eps(static_cast<int>(q), i);
      for (int c = 0; c < 3; ++c) ev[c] += eta_local[i] * e[c];
    }
    acc -= tau.weights[q] * (tv[0] * ev[0] + tv[1] * ev[1] + tv[2] * ev[2]);
  }
  for (int le = 0; le < 3; ++le) {
    const auto& te = tau.edge[le];
    const auto& ee = eta.edge[le];
    for (size_t q = 0; q < te.weights.size(); ++q) {
      double nn = 0.0, en = 0.0;
      for (int i = 0; i < tau.nloc; ++i) nn += tau_local[i] * te.value_n[q * tau.nloc + i];
      for (int i = 0; i < eta.nloc; ++i) en += eta_local[i] * ee.value_n[q * eta.nloc + i];
      acc += te.weights[q] * nn * en;
    }
  }
  return acc;
}

double duality_product_element_divform(const ElementShapes& tau, const ElementShapes& eta,
                                       const std::vector<double>& tau_local,
                                       const std::vector<double>& eta_local) {
  check_duality_pair(tau, eta, tau_local, eta_local);
  double acc = 0.0;
  for (size_t q = 0; q < tau.points.size(); ++q) {
    Vec2 dv{};
    for (int i = 0; i < tau.nloc; ++i) dv += tau_local[i] * tau.div(static_cast<int>(q), i);
    Vec2 ev{};
    for (int i = 0; i < eta.nloc; ++i) {
      ev.x += eta_local[i] * eta.value(static_cast<int>(q), i, 0);
      ev.y += eta_local[i] * eta.value(static_cast<int>(q), i, 1);
    }
    acc += tau.weights[q] * dot(dv, ev);
  }
  for (int le = 0; le < 3; ++le) {
    const auto& te = tau.edge[le];
    const auto& ee = eta.edge[le];
    for (size_t q = 0; q < te.weights.size(); ++q) {
      double nt = 0.0, et = 0.0;
      for (int i = 0; i < tau.nloc; ++i) nt += tau_local[i] * te.value_t[q * tau.nloc + i];
      for (int i = 0; i < eta.nloc; ++i) et += eta_local[i] * ee.value_t[q * eta.nloc + i];
      acc -= te.weights[q] * nt * et;
    }
  }
  return acc;
}

// ------------------------------------------------------------ shear fields

std::vector<double> recover_shear(const PlateProblem& problem, const SolutionFields& fields) {
  const Spaces spaces = make_spaces(*problem.mesh, problem.order, problem.hybrid);
  const BendingTensors mat = make_bending_tensors(problem.material);
  const double coef = mat.shear_modulus / (problem.thickness * problem.thickness);
  std::vector<double> gamma =
      interpolate_gradient(spaces.deflection, spaces.rotation, fields.deflection);
  TDNNS_REQUIRE(gamma.size() == fields.rotation.size(), "rotation coefficient length mismatch");
  for (size_t i = 0; i < gamma.size(); ++i)
    gamma[i] = coef * (gamma[i] - fields.rotation[i]);
  return gamma;
}

ShearResidual shear_residual(const PlateProblem& problem, const SolutionFields& fields) {
  const Spaces spaces = make_spaces(*problem.mesh, problem.order, problem.hybrid);
  const BendingTensors mat = make_bending_tensors(problem.material);
  const double inv_coef = problem.thickness * problem.thickness / mat.shear_modulus;
  const std::vector<double>& gamma =
      fields.shear.size() == fields.rotation.size() ? fields.shear : recover_shear(problem, fields);

  // grad w_h lies in the rotation space (certified by the gradient-inclusion
  // property), so both integrals are formed over the same rotation tables:
  // the residual then measures the constitutive identity itself, not
  // quadrature table roundoff.
  const std::vector<double> grad_w =
      interpolate_gradient(spaces.deflection, spaces.rotation, fields.deflection);
  std::vector<double> diff(grad_w.size());
  for (size_t j = 0; j < diff.size(); ++j) diff[j] = grad_w[j] - fields.rotation[j];

  const int k = problem.order;
  std::vector<double> term_a(spaces.rotation.ndof, 0.0), term_b(spaces.rotation.ndof, 0.0);
  for (int t = 0; t < problem.mesh->num_triangles(); ++t) {
    const ElementShapes tsh = element_shapes(spaces.rotation, t, 2 * k + 2, 2 * k + 2);
    for (size_t q = 0; q < tsh.points.size(); ++q) {
      const double wq = tsh.weights[q];
      Vec2 dv{}, ga{};
      for (int i = 0; i < tsh.nloc; ++i) {
        const Vec2 v{tsh.value(static_cast<int>(q), i, 0), tsh.value(static_cast<int>(q), i, 1)};
        dv += diff[tsh.dofs[i]] * v;
        ga += gamma[tsh.dofs[i]] * v;
      }
      for (int i = 0; i < tsh.nloc; ++i) {
        const Vec2 v{tsh.value(static_cast<int>(q), i, 0), tsh.value(static_cast<int>(q), i, 1)};
        term_a[tsh.dofs[i]] += wq * dot(dv, v);
        term_b[tsh.dofs[i]] += wq * inv_coef * dot(ga, v);
      }
    }
  }
  ShearResidual r;
  for (int i = 0; i < spaces.rotation.ndof; ++i) {
    r.residual = std::max(r.residual, std::abs(term_a[i] - term_b[i]));
    r.scale = std::max({r.scale, std::abs(term_a[i]), std::abs(term_b[i])});
  }
  return r;
}

// ---------------------------------------------------- discrete moment norm

double discrete_moment_norm(const FESpace& moment, const std::vector<double>& coeffs,
                            const FESpace& deflection, const EssentialSet& deflection_ess) {
  TDNNS_REQUIRE(moment.kind == SpaceKind::Moment && deflection.kind == SpaceKind::Deflection,
                "discrete_moment_norm needs a moment and a deflection space");
  TDNNS_REQUIRE(moment.mesh == deflection.mesh, "spaces live on different meshes");
  TDNNS_REQUIRE(static_cast<int>(coeffs.size()) == moment.ndof,
                "coefficient vector length mismatch");
  TDNNS_REQUIRE(!deflection_ess.free_dofs.empty() &&
                    static_cast<int>(deflection_ess.flag.size()) == deflection.ndof &&
                    deflection_ess.free_count() < deflection.ndof,
                "the dual term needs a constrained deflection space");

  const TriMesh& mesh = *moment.mesh;
  const int deg = 2 * moment.order + 2;
  double l2_sq = 0.0, edge_sq = 0.0;
  const int n_free = deflection_ess.free_count();
  std::vector<double> c(n_free, 0.0);
  std::vector<Triplet> g_trip;

  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const ElementShapes msh = element_shapes(moment, t, deg, deg);
    const ElementShapes wsh = element_shapes(deflection, t, deg, deg);
    const std::vector<int>& mdofs = msh.dofs;

    for (size_t q = 0; q < msh.points.size(); ++q) {
      Voigt mv{};
      for (int i = 0; i < msh.nloc; ++i)
        for (int cc = 0; cc < 3; ++cc)
          mv[cc] += coeffs[mdofs[i]] * msh.value(static_cast<int>(q), i, cc);
      l2_sq += msh.weights[q] * voigt_ddot(mv, mv);

      // Dual term: <div M, grad v> in the divergence form.
      Vec2 dv{};
      for (int i = 0; i < msh.nloc; ++i)
        dv += coeffs[mdofs[i]] * msh.div(static_cast<int>(q), i);
      for (int i = 0; i < wsh.nloc; ++i) {
        const int fi = deflection_ess.free_index[wsh.dofs[i]];
        if (fi < 0) continue;
        c[fi] += msh.weights[q] * dot(dv, wsh.grad(static_cast<int>(q), i));
        for (int j = 0; j < wsh.nloc; ++j) {
          const int fj = deflection_ess.free_index[wsh.dofs[j]];
          if (fj < 0) continue;
          g_trip.push_back({fi, fj, msh.weights[q] * dot(wsh.grad(static_cast<int>(q), i),
                                                         wsh.grad(static_cast<int>(q), j))});
        }
      }
    }
    for (int le = 0; le < 3; ++le) {
      const auto& me = msh.edge[le];
      const auto& we = wsh.edge[le];
      const bool first_side = mesh.edge_tris[me.edge][0] == t;
      for (size_t q = 0; q < me.weights.size(); ++q) {
        double nn = 0.0, nt = 0.0;
        for (int i = 0; i < msh.nloc; ++i) {
          nn += coeffs[mdofs[i]] * me.value_n[q * msh.nloc + i];
          nt += coeffs[mdofs[i]] * me.value_t[q * msh.nloc + i];
        }
        if (first_side) edge_sq += me.length * me.weights[q] * nn * nn;
        for (int i = 0; i < wsh.nloc; ++i) {
          const int fi = deflection_ess.free_index[wsh.dofs[i]];
          if (fi < 0) continue;
          c[fi] -= me.weights[q] * nt * we.grad_t[q * wsh.nloc + i];
        }
      }
    }
  }

  const SparseMatrix g = from_triplets(n_free, n_free, g_trip);
  const std::vector<double> y = solve_spd(g, c);
  double sup_sq = 0.0;
  for (int i = 0; i < n_free; ++i) sup_sq += c[i] * y[i];
  return std::sqrt(l2_sq + edge_sq + std::max(0.0, sup_sq));
}

}  // namespace tdnns
