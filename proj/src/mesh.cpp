// Triangle mesh connectivity, generators, refinement, and text I/O.
#include "tdnns/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace tdnns {

namespace {

std::array<int, 2> sorted_pair(int a, int b) {
  return a < b ? std::array<int, 2>{a, b} : std::array<int, 2>{b, a};
}

/// Local edge i is opposite local vertex i.
std::array<int, 2> local_edge_vertices(const std::array<int, 3>& tri, int le) {
  return {tri[(le + 1) % 3], tri[(le + 2) % 3]};
}

}  // namespace

double TriMesh::area(int t) const {
  const auto& tri = triangles[t];
  const Vec2 a = vertices[tri[0]], b = vertices[tri[1]], c = vertices[tri[2]];
  return 0.5 * cross(b - a, c - a);
}

Vec2 TriMesh::centroid(int t) const {
  const auto& tri = triangles[t];
  return (1.0 / 3.0) * (vertices[tri[0]] + vertices[tri[1]] + vertices[tri[2]]);
}

double TriMesh::edge_length(int e) const {
  return norm(vertices[edges[e][1]] - vertices[edges[e][0]]);
}

double TriMesh::max_edge_length() const {
  double h = 0.0;
  for (int e = 0; e < num_edges(); ++e) h = std::max(h, edge_length(e));
  return h;
}

double TriMesh::min_edge_length() const {
  double h = std::numeric_limits<double>::max();
  for (int e = 0; e < num_edges(); ++e) h = std::min(h, edge_length(e));
  return h;
}

void TriMesh::finalize() {
  edges.clear();
  tri_edges.clear();
  edge_tris.clear();
  edge_markers.clear();

  const int nv = num_vertices(), nt = num_triangles();
  for (int t = 0; t < nt; ++t)
    for (int v : triangles[t])
      TDNNS_REQUIRE(v >= 0 && v < nv,
                    "triangle " + std::to_string(t) + " has vertex index out of range");

  // Unique sorted edge list; sorting by (lo,hi) fixes deterministic edge ids.
  edges.reserve(3 * nt);
  for (int t = 0; t < nt; ++t)
    for (int le = 0; le < 3; ++le) {
      auto [a, b] = local_edge_vertices(triangles[t], le);
      TDNNS_REQUIRE(a != b, "triangle " + std::to_string(t) + " has a repeated vertex");
      edges.push_back(sorted_pair(a, b));
    }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  std::map<std::array<int, 2>, int> edge_id;
  for (int e = 0; e < num_edges(); ++e) edge_id[edges[e]] = e;

  tri_edges.resize(nt);
  edge_tris.assign(num_edges(), {-1, -1});
  for (int t = 0; t < nt; ++t)
    for (int le = 0; le < 3; ++le) {
      auto [a, b] = local_edge_vertices(triangles[t], le);
      const int e = edge_id.at(sorted_pair(a, b));
      tri_edges[t][le] = e;
      if (edge_tris[e][0] < 0)
        edge_tris[e][0] = t;
      else if (edge_tris[e][1] < 0)
        edge_tris[e][1] = t;
      else
        TDNNS_REQUIRE(false, "edge " + std::to_string(e) + " is shared by more than two triangles");
    }

  edge_markers.assign(num_edges(), 0);
  TDNNS_REQUIRE(boundary.size() == boundary_markers.size(),
                "boundary edge list and marker list differ in length");
  for (size_t i = 0; i < boundary.size(); ++i) {
    const auto key = sorted_pair(boundary[i][0], boundary[i][1]);
    const auto it = edge_id.find(key);
    TDNNS_REQUIRE(it != edge_id.end(),
                  "boundary entry " + std::to_string(i) + " is not an edge of any triangle");
    TDNNS_REQUIRE(boundary_markers[i] >= 1,
                  "boundary entry " + std::to_string(i) + " has marker < 1");
    TDNNS_REQUIRE(edge_markers[it->second] == 0,
                  "boundary entry " + std::to_string(i) + " duplicates an earlier entry");
    edge_markers[it->second] = boundary_markers[i];
  }

  validate();
}

void TriMesh::validate() const {
  TDNNS_REQUIRE(!vertices.empty() && !triangles.empty(), "mesh has no vertices or no triangles");
  TDNNS_REQUIRE(edges.size() == edge_tris.size() && edges.size() == edge_markers.size() &&
                    triangles.size() == tri_edges.size(),
                "derived connectivity missing; call finalize() first");

  for (int t = 0; t < num_triangles(); ++t)
    TDNNS_REQUIRE(area(t) > 0.0, "triangle " + std::to_string(t) +
                                     " is degenerate or clockwise (non-positive area)");

  // Boundary edges are exactly the single-triangle edges, and carry markers.
  for (int e = 0; e < num_edges(); ++e) {
    const bool on_boundary = edge_tris[e][1] < 0;
    TDNNS_REQUIRE(edge_tris[e][0] >= 0, "edge " + std::to_string(e) + " has no triangle");
    if (on_boundary)
      TDNNS_REQUIRE(edge_markers[e] >= 1,
                    "boundary edge " + std::to_string(e) + " (" + std::to_string(edges[e][0]) +
                        "," + std::to_string(edges[e][1]) + ") is missing from the boundary list");
    else
      TDNNS_REQUIRE(edge_markers[e] == 0,
                    "interior edge " + std::to_string(e) + " appears in the boundary list");
  }

  // Each boundary vertex must join exactly two boundary edges; count loops.
  std::map<int, std::vector<int>> bnd_at_vertex;
  int n_bnd = 0;
  for (int e = 0; e < num_edges(); ++e)
    if (edge_tris[e][1] < 0) {
      ++n_bnd;
      bnd_at_vertex[edges[e][0]].push_back(e);
      bnd_at_vertex[edges[e][1]].push_back(e);
    }
  for (const auto& [v, es] : bnd_at_vertex)
    TDNNS_REQUIRE(es.size() == 2, "boundary vertex " + std::to_string(v) +
                                      " joins " + std::to_string(es.size()) +
                                      " boundary edges (expected 2)");
  int loops = 0;
  std::map<int, bool> seen;
  for (const auto& [v0, es0] : bnd_at_vertex) {
    if (seen[v0]) continue;
    ++loops;
    int v = v0, e_prev = -1;
    do {
      seen[v] = true;
      const auto& es = bnd_at_vertex.at(v);
      const int e_next = (es[0] == e_prev) ? es[1] : es[0];
      v = (edges[e_next][0] == v) ? edges[e_next][1] : edges[e_next][0];
      e_prev = e_next;
    } while (v != v0);
  }
  (void)n_bnd;

  const long euler = static_cast<long>(num_vertices()) - num_edges() + num_triangles();
  TDNNS_REQUIRE(euler == 2 - loops,
                "Euler characteristic mismatch: V-E+T = " + std::to_string(euler) +
                    " but 2 - loops = " + std::to_string(2 - loops));
}

TriMesh unit_square_mesh(int n) {
  TDNNS_REQUIRE(n >= 1, "unit_square_mesh: n must be >= 1");
  TriMesh m;
  const int np = n + 1;
  const double h = 1.0 / n;
  m.vertices.reserve(static_cast<size_t>(np) * np);
  for (int j = 0; j < np; ++j)
    for (int i = 0; i < np; ++i) m.vertices.push_back({i * h, j * h});
  const auto vid = [np](int i, int j) { return j * np + i; };

  m.triangles.reserve(2 * static_cast<size_t>(n) * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int a = vid(i, j), b = vid(i + 1, j), c = vid(i + 1, j + 1), d = vid(i, j + 1);
      m.triangles.push_back({a, b, c});  // diagonal from lower-left to upper-right
      m.triangles.push_back({a, c, d});
    }

  for (int i = 0; i < n; ++i) m.boundary.push_back({vid(i, 0), vid(i + 1, 0)});
  for (int j = 0; j < n; ++j) m.boundary.push_back({vid(n, j), vid(n, j + 1)});
  for (int i = 0; i < n; ++i) m.boundary.push_back({vid(i + 1, n), vid(i, n)});
  for (int j = 0; j < n; ++j) m.boundary.push_back({vid(0, j + 1), vid(0, j)});
  m.boundary_markers.assign(m.boundary.size(), 1);

  m.finalize();
  return m;
}

TriMesh refine_uniform(const TriMesh& mesh) {
  TriMesh fine;
  fine.vertices = mesh.vertices;
  // One midpoint per parent edge, appended in parent edge order.
  const int nv = mesh.num_vertices();
  for (int e = 0; e < mesh.num_edges(); ++e)
    fine.vertices.push_back(0.5 * (mesh.vertices[mesh.edges[e][0]] + mesh.vertices[mesh.edges[e][1]]));
  const auto mid = [&](int e) { return nv + e; };

  fine.triangles.reserve(4 * mesh.triangles.size());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const int m12 = mid(mesh.tri_edges[t][0]);  // midpoint of (v1,v2)
    const int m20 = mid(mesh.tri_edges[t][1]);  // midpoint of (v2,v0)
    const int m01 = mid(mesh.tri_edges[t][2]);  // midpoint of (v0,v1)
    fine.triangles.push_back({tri[0], m01, m20});
    fine.triangles.push_back({tri[1], m12, m01});
    fine.triangles.push_back({tri[2], m20, m12});
    fine.triangles.push_back({m01, m12, m20});
  }

  std::map<std::array<int, 2>, int> edge_id;
  for (int e = 0; e < mesh.num_edges(); ++e) edge_id[mesh.edges[e]] = e;
  for (size_t i = 0; i < mesh.boundary.size(); ++i) {
    const int a = mesh.boundary[i][0], b = mesh.boundary[i][1];
    const int m = mid(edge_id.at(a < b ? std::array<int, 2>{a, b} : std::array<int, 2>{b, a}));
    fine.boundary.push_back({a, m});
    fine.boundary.push_back({m, b});
    fine.boundary_markers.push_back(mesh.boundary_markers[i]);
    fine.boundary_markers.push_back(mesh.boundary_markers[i]);
  }

  fine.finalize();
  return fine;
}

TriMesh plate_with_hole_mesh(double side, double hole_diameter, int segments,
                             int graded_levels) {
  TDNNS_REQUIRE(side > 0.0, "plate_with_hole_mesh: side must be positive");
  TDNNS_REQUIRE(hole_diameter > 0.0 && hole_diameter < side,
                "plate_with_hole_mesh: hole diameter must lie in (0, side)");
  TDNNS_REQUIRE(segments >= 4, "plate_with_hole_mesh: need at least 4 segments");
  TDNNS_REQUIRE(graded_levels >= 0, "plate_with_hole_mesh: graded_levels must be >= 0");

  const int s4 = 4 * ((segments + 3) / 4);  // multiple of 4: quadrant boundaries hit corners
  const int nr = std::max(2, s4 / 4);
  const double R = 0.5 * hole_diameter;
  const double a = 0.5 * side;
  const Vec2 c{a, a};
  const double pi = std::numbers::pi;

  // Angular parameter values.  Base spacing puts the rays phi = -45 + 90 q
  // through the square corners; columns adjacent to those rays are split
  // geometrically (ratio 1/2, finest at the ray) `graded_levels` times.
  std::vector<double> phis;
  const double dphi = 2.0 * pi / s4;
  for (int j = 0; j < s4; ++j) {
    const double lo = -0.25 * pi + j * dphi;
    phis.push_back(lo);
    const bool at_corner_lo = (j % (s4 / 4)) == 0;
    const bool at_corner_hi = ((j + 1) % (s4 / 4)) == 0;
    if (graded_levels > 0 && (at_corner_lo || at_corner_hi)) {
      // Geometric interior split points of [lo, lo+dphi], finest at the corner ray.
      double total = 0.0;
      for (int l = 0; l <= graded_levels; ++l) total += std::pow(2.0, l);
      double acc = 0.0;
      std::vector<double> cuts;
      for (int l = 0; l < graded_levels; ++l) {
        acc += std::pow(2.0, at_corner_lo ? l : graded_levels - l);
        cuts.push_back(lo + dphi * acc / total);
      }
      for (double s : cuts) phis.push_back(s);
    }
  }
  std::sort(phis.begin(), phis.end());
  const int nphi = static_cast<int>(phis.size());

  // Radial parameter values in [0,1] (0 = hole, 1 = outer square); innermost
  // interval split geometrically towards the hole.
  std::vector<double> rhos;
  for (int i = 0; i <= nr; ++i) rhos.push_back(static_cast<double>(i) / nr);
  if (graded_levels > 0) {
    const double lo = rhos[0], hi = rhos[1];
    double total = 0.0;
    for (int l = 0; l <= graded_levels; ++l) total += std::pow(2.0, l);
    double acc = 0.0;
    for (int l = 0; l < graded_levels; ++l) {
      acc += std::pow(2.0, l);
      rhos.push_back(lo + (hi - lo) * acc / total);
    }
    std::sort(rhos.begin(), rhos.end());
  }
  const int nrho = static_cast<int>(rhos.size());

  TriMesh m;
  const double snap = 1e-9 * side;
  for (int i = 0; i < nrho; ++i)
    for (int j = 0; j < nphi; ++j) {
      const double phi = phis[j];
      const Vec2 dir{std::cos(phi), std::sin(phi)};
      const Vec2 inner = c + R * dir;
      Vec2 outer = c + (a / std::max(std::abs(dir.x), std::abs(dir.y))) * dir;
      if (std::abs(outer.x) < snap) outer.x = 0.0;
      if (std::abs(outer.x - side) < snap) outer.x = side;
      if (std::abs(outer.y) < snap) outer.y = 0.0;
      if (std::abs(outer.y - side) < snap) outer.y = side;
      m.vertices.push_back(inner + rhos[i] * (outer - inner));
    }
  const auto vid = [nphi](int i, int j) { return i * nphi + (j % nphi); };

  for (int i = 0; i + 1 < nrho; ++i)
    for (int j = 0; j < nphi; ++j) {
      // Counterclockwise: radially outward first, then against the angle.
      const int p00 = vid(i, j), p10 = vid(i, j + 1);
      const int p11 = vid(i + 1, j + 1), p01 = vid(i + 1, j);
      m.triangles.push_back({p00, p01, p11});
      m.triangles.push_back({p00, p11, p10});
    }

  for (int j = 0; j < nphi; ++j) {  // hole circle
    m.boundary.push_back({vid(0, j + 1), vid(0, j)});
    m.boundary_markers.push_back(4);
  }
  for (int j = 0; j < nphi; ++j) {  // outer square: classify by edge midpoint
    const int v0 = vid(nrho - 1, j), v1 = vid(nrho - 1, j + 1);
    const Vec2 mid = 0.5 * (m.vertices[v0] + m.vertices[v1]);
    int marker = 3;
    if (std::abs(mid.x) < snap)
      marker = 1;
    else if (std::abs(mid.x - side) < snap)
      marker = 2;
    m.boundary.push_back({v0, v1});
    m.boundary_markers.push_back(marker);
  }

  m.finalize();
  return m;
}

void write_mesh(const TriMesh& mesh, std::ostream& out) {
  char buf[64];
  out << "tdnnsmesh 1\n";
  out << "vertices " << mesh.num_vertices() << "\n";
  for (const Vec2& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", v.x, v.y);
    out << buf;
  }
  out << "triangles " << mesh.num_triangles() << "\n";
  for (const auto& t : mesh.triangles) out << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "boundary " << mesh.boundary.size() << "\n";
  for (size_t i = 0; i < mesh.boundary.size(); ++i)
    out << mesh.boundary[i][0] << " " << mesh.boundary[i][1] << " " << mesh.boundary_markers[i]
        << "\n";
}

void write_mesh_file(const TriMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  TDNNS_REQUIRE(out.good(), "cannot open '" + path + "' for writing");
  write_mesh(mesh, out);
  TDNNS_REQUIRE(out.good(), "write to '" + path + "' failed");
}

TriMesh read_mesh(std::istream& in, std::vector<std::string>* warnings) {
  std::string word;
  int version = 0;
  TDNNS_REQUIRE(static_cast<bool>(in >> word >> version) && word == "tdnnsmesh" && version == 1,
                "mesh file: expected header 'tdnnsmesh 1'");

  TriMesh m;
  int count = 0;
  TDNNS_REQUIRE(static_cast<bool>(in >> word >> count) && word == "vertices" && count >= 0,
                "mesh file: expected 'vertices <count>'");
  m.vertices.resize(count);
  for (int i = 0; i < count; ++i)
    TDNNS_REQUIRE(static_cast<bool>(in >> m.vertices[i].x >> m.vertices[i].y),
                  "mesh file: bad vertex line " + std::to_string(i));

  TDNNS_REQUIRE(static_cast<bool>(in >> word >> count) && word == "triangles" && count >= 0,
                "mesh file: expected 'triangles <count>'");
  m.triangles.resize(count);
  for (int i = 0; i < count; ++i)
    TDNNS_REQUIRE(
        static_cast<bool>(in >> m.triangles[i][0] >> m.triangles[i][1] >> m.triangles[i][2]),
        "mesh file: bad triangle line " + std::to_string(i));

  TDNNS_REQUIRE(static_cast<bool>(in >> word >> count) && word == "boundary" && count >= 0,
                "mesh file: expected 'boundary <count>'");
  m.boundary.resize(count);
  m.boundary_markers.resize(count);
  for (int i = 0; i < count; ++i)
    TDNNS_REQUIRE(
        static_cast<bool>(in >> m.boundary[i][0] >> m.boundary[i][1] >> m.boundary_markers[i]),
        "mesh file: bad boundary line " + std::to_string(i));

  // Reorient clockwise triangles (warn rather than fail on import).
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    bool ok = true;
    for (int v : tri) ok = ok && v >= 0 && v < m.num_vertices();
    TDNNS_REQUIRE(ok, "mesh file: triangle " + std::to_string(t) + " has vertex index out of range");
    const Vec2 a = m.vertices[tri[0]], b = m.vertices[tri[1]], c = m.vertices[tri[2]];
    if (cross(b - a, c - a) < 0.0) {
      std::swap(m.triangles[t][1], m.triangles[t][2]);
      if (warnings)
        warnings->push_back("triangle " + std::to_string(t) + " was clockwise; reoriented");
    }
  }

  m.finalize();
  return m;
}

TriMesh read_mesh_file(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  TDNNS_REQUIRE(in.good(), "cannot open mesh file '" + path + "'");
  return read_mesh(in, warnings);
}

}  // namespace tdnns
