#pragma once

#include "quadcarve/geometry.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace quadcarve {

// Raised for malformed or unsupported input meshes. `entity` names the
// offending element (e.g. "edge 3-7", "triangle 12").
class MeshError : public std::runtime_error {
 public:
  enum class Kind { Parse, NonManifoldEdge, NonManifoldVertex, NonOrientable, Degenerate, Disconnected, Geometry };
  MeshError(Kind kind, const std::string& entity, const std::string& what)
      : std::runtime_error(what + " (" + entity + ")"), kind_(kind), entity_(entity) {}
  Kind kind() const { return kind_; }
  const std::string& entity() const { return entity_; }

 private:
  Kind kind_;
  std::string entity_;
};

using Triangle = std::array<int, 3>;

// Indexed, consistently oriented triangle surface with edge/triangle adjacency.
// Edge k of a triangle runs from corner k to corner k+1.
class TriMesh {
 public:
  // Validates and indexes the surface. Triangles are re-wound to agree with the
  // first triangle in file order; closed surfaces are then oriented outward.
  static TriMesh build(std::vector<Vec3> positions, std::vector<Triangle> triangles);

  int num_nodes() const { return static_cast<int>(positions_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const Vec3& position(int node) const { return positions_[node]; }
  const std::vector<Vec3>& positions() const { return positions_; }
  const Triangle& triangle(int t) const { return triangles_[t]; }
  const std::vector<Triangle>& triangles() const { return triangles_; }

  // Undirected edge as (lower node, higher node).
  const std::array<int, 2>& edge(int e) const { return edges_[e]; }
  // Triangles on either side of an edge; second entry is -1 on the boundary.
  const std::array<int, 2>& edge_triangles(int e) const { return edge_triangles_[e]; }
  const std::array<int, 3>& triangle_edges(int t) const { return triangle_edges_[t]; }
  int find_edge(int a, int b) const;
  // Triangle across edge k of t, or -1.
  int neighbor(int t, int k) const;
  // Local corner index of `node` in triangle t, or -1.
  int corner_of(int t, int node) const;

  // Incident edges of a node, sorted by edge index.
  const std::vector<int>& node_edges(int node) const { return node_edges_[node]; }
  const std::vector<int>& node_triangles(int node) const { return node_triangles_[node]; }
  int other_node(int e, int node) const { return edges_[e][0] == node ? edges_[e][1] : edges_[e][0]; }

  bool is_boundary_edge(int e) const { return edge_triangles_[e][1] < 0; }
  bool is_boundary_node(int node) const { return boundary_node_[node]; }
  bool has_boundary() const { return !boundary_loops_.empty(); }
  // Boundary cycles as node sequences with the surface on the left.
  const std::vector<std::vector<int>>& boundary_loops() const { return boundary_loops_; }
  // Next node along the boundary (surface on the left), or -1 for interior nodes.
  int boundary_next(int node) const { return boundary_next_[node]; }
  int boundary_prev(int node) const { return boundary_prev_[node]; }

  // Triangles around a node in counter-clockwise order. For boundary nodes
  // the fan starts at the triangle holding the outgoing boundary edge.
  std::vector<int> fan(int node) const;

  Vec3 triangle_normal(int t) const;
  double triangle_area(int t) const;
  Vec3 barycenter(int t) const;
  double tip_angle(int t, int corner) const;
  double edge_length(int e) const { return (positions_[edges_[e][0]] - positions_[edges_[e][1]]).norm(); }
  double mean_edge_length() const;
  double bounding_diameter() const;

  int euler_characteristic() const { return num_nodes() - num_edges() + num_triangles(); }

 private:
  std::vector<Vec3> positions_;
  std::vector<Triangle> triangles_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 2>> edge_triangles_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<std::vector<int>> node_edges_;
  std::vector<std::vector<int>> node_triangles_;
  std::vector<char> boundary_node_;
  std::vector<int> boundary_next_;
  std::vector<int> boundary_prev_;
  std::vector<std::vector<int>> boundary_loops_;
  std::unordered_map<std::uint64_t, int> edge_lookup_;
};

// Per-node unit normals and right-handed tangent bases (basis1 x basis2 = normal).
struct TangentFrames {
  std::vector<Vec3> normal;
  std::vector<Vec3> basis1;
  std::vector<Vec3> basis2;

  Frame frame(int node) const { return Frame{normal[node], basis1[node]}; }
  // Angle of a tangent vector in the node's basis.
  double angle_of(int node, const Vec3& v) const { return std::atan2(v.dot(basis2[node]), v.dot(basis1[node])); }
  Vec3 direction(int node, double angle) const {
    return std::cos(angle) * basis1[node] + std::sin(angle) * basis2[node];
  }
};

// Angle phi_ij = phi_j - phi_i per edge, stored for the direction edge(e)[0] -> edge(e)[1].
// phi_i (phi_j) is the angle of the edge vector x_j - x_i projected into T_i (T_j).
struct EdgeTransport {
  std::vector<double> phi;

  double directed(const TriMesh& mesh, int e, int from) const { return mesh.edge(e)[0] == from ? phi[e] : -phi[e]; }
  double between(const TriMesh& mesh, int from, int to) const;
};

// Table-1 boundary classification. Index is stored in quarter units:
// +1 (convex corner), 0 (straight), -1 (re-entrant), -2 (slit-like).
struct BoundaryInfo {
  std::vector<char> is_boundary;
  std::vector<double> interior_angle;
  std::vector<int> index_quarters;
  std::vector<Vec3> direction;  // alignment direction d_i
  std::vector<Complex> value;   // Dirichlet representation vector u_i = d_i^4

  int index_sum_quarters() const;
};

std::vector<Vec3> vertex_normals(const TriMesh& mesh);
TangentFrames build_tangent_frames(const TriMesh& mesh, const std::vector<Vec3>& normals);
EdgeTransport edge_transport_angles(const TriMesh& mesh, const TangentFrames& frames);
BoundaryInfo classify_boundary(const TriMesh& mesh, const TangentFrames& frames);

// Table-1 lookup on an interior angle (radians), in quarter units.
int boundary_index_quarters(double interior_angle);

// Mesh plus every derived per-node/per-edge quantity used downstream.
struct Surface {
  TriMesh mesh;
  TangentFrames frames;
  EdgeTransport transport;
  BoundaryInfo boundary;

  static Surface prepare(TriMesh mesh);
};

}  // namespace quadcarve
