#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "tdnns/mesh.hpp"

using namespace tdnns;

TEST_CASE("unit square mesh: counts, areas, markers") {
  for (int n : {1, 2, 4, 7}) {
    const TriMesh m = unit_square_mesh(n);
    CHECK(m.num_vertices() == (n + 1) * (n + 1));
    CHECK(m.num_triangles() == 2 * n * n);
    CHECK(m.num_edges() == 3 * n * n + 2 * n);

    double total = 0.0;
    for (int t = 0; t < m.num_triangles(); ++t) {
      CHECK(m.area(t) == doctest::Approx(0.5 / (n * n)).epsilon(1e-14));
      total += m.area(t);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-14));

    int nbdry = 0;
    for (int e = 0; e < m.num_edges(); ++e) {
      if (m.edge_markers[e] == 0) continue;
      CHECK(m.edge_markers[e] == 1);
      ++nbdry;
    }
    CHECK(nbdry == 4 * n);
    CHECK(m.min_edge_length() == doctest::Approx(1.0 / n).epsilon(1e-14));
    CHECK(m.max_edge_length() == doctest::Approx(std::sqrt(2.0) / n).epsilon(1e-14));
  }
  CHECK_THROWS_AS(unit_square_mesh(0), std::invalid_argument);
}

TEST_CASE("edge conventions: sorted pairs, opposite-vertex numbering, adjacency") {
  const TriMesh m = unit_square_mesh(3);
  for (int e = 0; e < m.num_edges(); ++e) {
    CHECK(m.edges[e][0] < m.edges[e][1]);
    if (e > 0) CHECK(m.edges[e - 1] < m.edges[e]);  // lexicographic order
  }
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles[t];
    for (int le = 0; le < 3; ++le) {
      // Local edge le joins the two vertices other than local vertex le.
      const int a = tri[(le + 1) % 3];
      const int b = tri[(le + 2) % 3];
      const int e = m.tri_edges[t][le];
      CHECK(std::min(a, b) == m.edges[e][0]);
      CHECK(std::max(a, b) == m.edges[e][1]);
      CHECK((m.edge_tris[e][0] == t || m.edge_tris[e][1] == t));
    }
  }
  // Each edge has one or two adjacent triangles; boundary iff one.
  for (int e = 0; e < m.num_edges(); ++e) {
    CHECK(m.edge_tris[e][0] >= 0);
    const bool interior = m.edge_tris[e][1] >= 0;
    CHECK((m.edge_markers[e] == 0) == interior);
  }
}

TEST_CASE("uniform refinement: counts, child ordering, conservation") {
  const TriMesh coarse = unit_square_mesh(2);
  const TriMesh fine = refine_uniform(coarse);
  CHECK(fine.num_triangles() == 4 * coarse.num_triangles());
  CHECK(fine.num_vertices() == coarse.num_vertices() + coarse.num_edges());

  // The first V_coarse vertices are the coarse vertices themselves.
  for (int v = 0; v < coarse.num_vertices(); ++v) {
    CHECK(fine.vertices[v].x == coarse.vertices[v].x);
    CHECK(fine.vertices[v].y == coarse.vertices[v].y);
  }

  // Children 4t..4t+3 tile parent t: areas are a quarter, centroids inside.
  for (int t = 0; t < coarse.num_triangles(); ++t) {
    double sum = 0.0;
    for (int c = 0; c < 4; ++c) {
      const int tf = 4 * t + c;
      sum += fine.area(tf);
      // Barycentric coordinates of the child's centroid w.r.t. parent t.
      const Vec2 p = fine.centroid(tf);
      const Vec2 a = coarse.vertices[coarse.triangles[t][0]];
      const Vec2 b = coarse.vertices[coarse.triangles[t][1]];
      const Vec2 cc = coarse.vertices[coarse.triangles[t][2]];
      const double det = (b.x - a.x) * (cc.y - a.y) - (cc.x - a.x) * (b.y - a.y);
      const double l1 = ((p.x - a.x) * (cc.y - a.y) - (cc.x - a.x) * (p.y - a.y)) / det;
      const double l2 = ((b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y)) / det;
      CHECK(l1 > 0.0);
      CHECK(l2 > 0.0);
      CHECK(1.0 - l1 - l2 > 0.0);
    }
    CHECK(sum == doctest::Approx(coarse.area(t)).epsilon(1e-14));
  }

  // Boundary markers are inherited: still a single marker-1 boundary.
  std::set<int> markers;
  for (int e = 0; e < fine.num_edges(); ++e)
    if (fine.edge_markers[e] != 0) markers.insert(fine.edge_markers[e]);
  CHECK(markers == std::set<int>{1});
  fine.validate();
}

TEST_CASE("plate with hole mesh: validity, markers, geometry") {
  const double side = 100.0, diameter = 20.0;
  const TriMesh m = plate_with_hole_mesh(side, diameter, 16);
  m.validate();

  std::set<int> markers;
  for (int e = 0; e < m.num_edges(); ++e)
    if (m.edge_markers[e] != 0) markers.insert(m.edge_markers[e]);
  CHECK(markers == std::set<int>{1, 2, 3, 4});

  // Marker semantics: 1 left, 2 right, 3 top/bottom, 4 the hole circle.
  for (int e = 0; e < m.num_edges(); ++e) {
    if (m.edge_markers[e] == 0) continue;
    const Vec2 a = m.vertices[m.edges[e][0]];
    const Vec2 b = m.vertices[m.edges[e][1]];
    switch (m.edge_markers[e]) {
      case 1:
        CHECK(a.x == doctest::Approx(0.0));
        CHECK(b.x == doctest::Approx(0.0));
        break;
      case 2:
        CHECK(a.x == doctest::Approx(side));
        CHECK(b.x == doctest::Approx(side));
        break;
      case 3:
        CHECK((std::abs(a.y) < 1e-12 || std::abs(a.y - side) < 1e-12));
        break;
      case 4: {
        const Vec2 c{side / 2, side / 2};
        CHECK(norm(a - c) == doctest::Approx(diameter / 2).epsilon(1e-12));
        CHECK(norm(b - c) == doctest::Approx(diameter / 2).epsilon(1e-12));
        break;
      }
    }
  }

  SUBCASE("segments round up to a multiple of four") {
    const TriMesh m5 = plate_with_hole_mesh(side, diameter, 5);
    const TriMesh m8 = plate_with_hole_mesh(side, diameter, 8);
    CHECK(m5.num_triangles() == m8.num_triangles());
    CHECK(m5.num_vertices() == m8.num_vertices());
  }

  SUBCASE("grading refines towards hole and corners") {
    const TriMesh g = plate_with_hole_mesh(side, diameter, 16, 2);
    g.validate();
    CHECK(g.num_triangles() > m.num_triangles());
    CHECK(g.min_edge_length() < m.min_edge_length());
  }

  SUBCASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(plate_with_hole_mesh(-1.0, 20.0, 16), std::invalid_argument);
    CHECK_THROWS_AS(plate_with_hole_mesh(100.0, 120.0, 16), std::invalid_argument);
    CHECK_THROWS_AS(plate_with_hole_mesh(100.0, 20.0, 2), std::invalid_argument);
    CHECK_THROWS_AS(plate_with_hole_mesh(100.0, 20.0, 16, -1), std::invalid_argument);
  }
}

TEST_CASE("mesh text format round-trips bit-exactly") {
  const TriMesh m = plate_with_hole_mesh(100.0, 20.0, 8, 1);
  std::stringstream ss;
  write_mesh(m, ss);
  const TriMesh r = read_mesh(ss);
  REQUIRE(r.num_vertices() == m.num_vertices());
  REQUIRE(r.num_triangles() == m.num_triangles());
  for (int v = 0; v < m.num_vertices(); ++v) {
    CHECK(r.vertices[v].x == m.vertices[v].x);  // %.17g round-trip is exact
    CHECK(r.vertices[v].y == m.vertices[v].y);
  }
  for (int t = 0; t < m.num_triangles(); ++t) CHECK(r.triangles[t] == m.triangles[t]);
  REQUIRE(r.num_edges() == m.num_edges());
  for (int e = 0; e < m.num_edges(); ++e) CHECK(r.edge_markers[e] == m.edge_markers[e]);
}

TEST_CASE("mesh reader: errors and clockwise repair") {
  SUBCASE("bad header") {
    std::stringstream ss("nonsense 1\n");
    CHECK_THROWS_AS(read_mesh(ss), std::invalid_argument);
  }
  SUBCASE("unsupported version") {
    std::stringstream ss("tdnnsmesh 2\nvertices 0\ntriangles 0\nboundary 0\n");
    CHECK_THROWS_AS(read_mesh(ss), std::invalid_argument);
  }
  SUBCASE("vertex index out of range") {
    std::stringstream ss(
        "tdnnsmesh 1\nvertices 3\n0 0\n1 0\n0 1\n"
        "triangles 1\n0 1 9\nboundary 3\n0 1 1\n1 9 1\n9 0 1\n");
    CHECK_THROWS_AS(read_mesh(ss), std::invalid_argument);
  }
  SUBCASE("clockwise triangle is reoriented with a warning") {
    std::stringstream ss(
        "tdnnsmesh 1\nvertices 3\n0 0\n1 0\n0 1\n"
        "triangles 1\n0 2 1\nboundary 3\n0 1 1\n1 2 1\n2 0 1\n");
    std::vector<std::string> warnings;
    const TriMesh m = read_mesh(ss, &warnings);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("clockwise") != std::string::npos);
    CHECK(m.area(0) > 0.0);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_mesh_file("/nonexistent/path.mesh"), std::invalid_argument);
  }
}

TEST_CASE("finalize rejects broken connectivity") {
  SUBCASE("repeated vertex in a triangle") {
    TriMesh m;
    m.vertices = {{0, 0}, {1, 0}, {0, 1}};
    m.triangles = {{0, 1, 1}};
    m.boundary = {{0, 1}, {1, 2}, {2, 0}};
    m.boundary_markers = {1, 1, 1};
    CHECK_THROWS_AS(m.finalize(), std::invalid_argument);
  }
  SUBCASE("edge shared by three triangles") {
    TriMesh m;
    m.vertices = {{0, 0}, {1, 0}, {0, 1}, {1, 1}, {-1, 0.5}};
    m.triangles = {{0, 1, 2}, {1, 3, 2}, {0, 2, 4}, {0, 1, 2}};
    m.boundary = {};
    m.boundary_markers = {};
    CHECK_THROWS_AS(m.finalize(), std::invalid_argument);
  }
  SUBCASE("boundary edge listed as interior") {
    TriMesh m = unit_square_mesh(1);
    m.boundary.pop_back();
    m.boundary_markers.pop_back();
    CHECK_THROWS_AS(m.finalize(), std::invalid_argument);
  }
}
