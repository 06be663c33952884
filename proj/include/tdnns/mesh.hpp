// Triangle meshes: storage, derived edge connectivity, generators, refinement, I/O.
#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "tdnns/common.hpp"

namespace tdnns {

/// Unstructured triangle mesh with boundary markers.
///
/// Conventions:
///  - triangles are counter-clockwise vertex index triples;
///  - local edge i of a triangle is the edge opposite local vertex i,
///    i.e. edge 0 = (v1,v2), edge 1 = (v2,v0), edge 2 = (v0,v1);
///  - global edges are stored as (lo,hi) vertex pairs sorted lexicographically,
///    which fixes a global orientation (tangent lo -> hi) per edge;
///  - boundary markers are positive integers, 0 marks interior edges.
struct TriMesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  /// Boundary edges as vertex pairs (any order) with parallel marker list.
  std::vector<std::array<int, 2>> boundary;
  std::vector<int> boundary_markers;

  // Derived connectivity, built by finalize().
  std::vector<std::array<int, 2>> edges;       ///< unique edges, lo < hi, sorted
  std::vector<std::array<int, 3>> tri_edges;   ///< global edge id per local edge
  std::vector<std::array<int, 2>> edge_tris;   ///< adjacent triangles, -1 if none
  std::vector<int> edge_markers;               ///< per global edge, 0 = interior

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  int num_edges() const { return static_cast<int>(edges.size()); }

  double area(int t) const;
  Vec2 centroid(int t) const;
  double edge_length(int e) const;
  /// Longest edge in the mesh.
  double max_edge_length() const;
  /// Shortest edge in the mesh.
  double min_edge_length() const;

  /// Builds derived connectivity and runs validate().  Must be called after
  /// vertices/triangles/boundary are filled and before the mesh is used.
  void finalize();

  /// Consistency checks: index ranges, positive CCW areas, edge/triangle
  /// adjacency (1 or 2 triangles per edge), boundary list matching the set of
  /// single-triangle edges, positive markers, and the Euler identity
  /// V - E + T = 2 - L with L the number of boundary loops.
  void validate() const;
};

/// Structured unit square mesh: n x n cells, each split along the
/// lower-left -> upper-right diagonal; 2n^2 triangles, legs of length 1/n.
/// All boundary edges get marker 1.
TriMesh unit_square_mesh(int n);

/// Uniform red refinement: each triangle splits into four via edge midpoints.
/// Children of parent t occupy 4t..4t+3 (corner children first, center last);
/// midpoint vertices are appended in parent edge order.  Boundary markers are
/// inherited by the two halves of each boundary edge.
TriMesh refine_uniform(const TriMesh& mesh);

/// Square plate with a centred circular hole, meshed by an O-grid of quads
/// (split into triangles) between the hole circle and the outer square.
/// `segments` is rounded up to a multiple of 4; `graded_levels` adds geometric
/// grading (ratio 1/2) towards the hole and the square corners.
/// Markers: 1 = left side, 2 = right side, 3 = top/bottom, 4 = hole circle.
TriMesh plate_with_hole_mesh(double side, double hole_diameter, int segments,
                             int graded_levels = 0);

/// Reads a mesh in the native text format.  Clockwise triangles are reoriented
/// with a warning appended to `warnings` (if given).  The result is finalized.
TriMesh read_mesh(std::istream& in, std::vector<std::string>* warnings = nullptr);
TriMesh read_mesh_file(const std::string& path, std::vector<std::string>* warnings = nullptr);

/// Writes the native text format with full double precision round-trip.
void write_mesh(const TriMesh& mesh, std::ostream& out);
void write_mesh_file(const TriMesh& mesh, const std::string& path);

}  // namespace tdnns
