#include "quadcarve/mesh.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

namespace quadcarve {
namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

std::string edge_name(int a, int b) { return "edge " + std::to_string(a) + "-" + std::to_string(b); }

// True when triangle `tri` traverses a->b (as opposed to b->a).
bool traverses(const Triangle& tri, int a, int b) {
  for (int k = 0; k < 3; ++k)
    if (tri[k] == a && tri[(k + 1) % 3] == b) return true;
  return false;
}

}  // namespace

TriMesh TriMesh::build(std::vector<Vec3> positions, std::vector<Triangle> triangles) {
  TriMesh m;
  m.positions_ = std::move(positions);
  m.triangles_ = std::move(triangles);
  const int n = m.num_nodes();
  const int nt = m.num_triangles();
  if (nt == 0) throw MeshError(MeshError::Kind::Parse, "mesh", "mesh has no triangles");

  std::vector<char> referenced(n, 0);
  double max_len = 0.0;
  for (int t = 0; t < nt; ++t) {
    const auto& tri = m.triangles_[t];
    for (int k = 0; k < 3; ++k) {
      if (tri[k] < 0 || tri[k] >= n)
        throw MeshError(MeshError::Kind::Parse, "triangle " + std::to_string(t), "node index out of range");
      referenced[tri[k]] = 1;
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw MeshError(MeshError::Kind::Degenerate, "triangle " + std::to_string(t), "triangle repeats a node");
    for (int k = 0; k < 3; ++k)
      max_len = std::max(max_len, (m.positions_[tri[k]] - m.positions_[tri[(k + 1) % 3]]).norm());
  }
  for (int i = 0; i < n; ++i)
    if (!referenced[i])
      throw MeshError(MeshError::Kind::Geometry, "node " + std::to_string(i), "node is not used by any triangle");
  for (int t = 0; t < nt; ++t) {
    if (m.triangle_area(t) <= 1e-14 * max_len * max_len)
      throw MeshError(MeshError::Kind::Degenerate, "triangle " + std::to_string(t), "degenerate triangle (zero area)");
  }

  // Edges in order of first appearance.
  std::vector<std::vector<int>> edge_tris;
  for (int t = 0; t < nt; ++t) {
    const auto& tri = m.triangles_[t];
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k], b = tri[(k + 1) % 3];
      auto [it, inserted] = m.edge_lookup_.try_emplace(edge_key(a, b), m.num_edges());
      if (inserted) {
        m.edges_.push_back({std::min(a, b), std::max(a, b)});
        edge_tris.emplace_back();
      }
      auto& list = edge_tris[it->second];
      list.push_back(t);
      if (list.size() > 2)
        throw MeshError(MeshError::Kind::NonManifoldEdge, edge_name(a, b), "edge shared by more than two triangles");
    }
  }

  // Consistent winding by breadth-first propagation from triangle 0.
  std::vector<int> state(nt, -1);  // -1 unvisited, 0 keep, 1 flip
  std::deque<int> queue{0};
  state[0] = 0;
  int visited = 1;
  auto wound = [&](int t) {
    Triangle tri = m.triangles_[t];
    if (state[t] == 1) std::swap(tri[1], tri[2]);
    return tri;
  };
  while (!queue.empty()) {
    const int t = queue.front();
    queue.pop_front();
    const Triangle tri = wound(t);
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k], b = tri[(k + 1) % 3];
      const auto& list = edge_tris[m.edge_lookup_.at(edge_key(a, b))];
      for (int other : list) {
        if (other == t) continue;
        const bool same_dir = traverses(m.triangles_[other], a, b);
        const int want = same_dir ? 1 : 0;
        if (state[other] < 0) {
          state[other] = want;
          ++visited;
          queue.push_back(other);
        } else if (state[other] != want) {
          throw MeshError(MeshError::Kind::NonOrientable, edge_name(a, b), "surface is not orientable");
        }
      }
    }
  }
  if (visited != nt) {
    int first = 0;
    while (state[first] >= 0) ++first;
    // Pieces touching at a single node make a bowtie rather than two surfaces.
    std::vector<char> seen(n, 0);
    for (int t = 0; t < nt; ++t)
      if (state[t] >= 0)
        for (int v : m.triangles_[t]) seen[v] = 1;
    for (int t = 0; t < nt; ++t)
      if (state[t] < 0)
        for (int v : m.triangles_[t])
          if (seen[v])
            throw MeshError(MeshError::Kind::NonManifoldVertex, "node " + std::to_string(v),
                            "triangles around node do not form a single fan");
    throw MeshError(MeshError::Kind::Disconnected, "triangle " + std::to_string(first), "surface is not connected");
  }
  for (int t = 0; t < nt; ++t) m.triangles_[t] = wound(t);

  // Adjacency.
  m.edge_triangles_.assign(m.num_edges(), {-1, -1});
  m.triangle_edges_.resize(nt);
  m.node_edges_.assign(n, {});
  m.node_triangles_.assign(n, {});
  for (int t = 0; t < nt; ++t) {
    const auto& tri = m.triangles_[t];
    for (int k = 0; k < 3; ++k) {
      const int e = m.edge_lookup_.at(edge_key(tri[k], tri[(k + 1) % 3]));
      m.triangle_edges_[t][k] = e;
      auto& et = m.edge_triangles_[e];
      if (et[0] < 0)
        et[0] = t;
      else
        et[1] = t;
      m.node_triangles_[tri[k]].push_back(t);
    }
  }
  for (int e = 0; e < m.num_edges(); ++e) {
    m.node_edges_[m.edges_[e][0]].push_back(e);
    m.node_edges_[m.edges_[e][1]].push_back(e);
  }

  // Boundary structure.
  m.boundary_node_.assign(n, 0);
  m.boundary_next_.assign(n, -1);
  m.boundary_prev_.assign(n, -1);
  for (int e = 0; e < m.num_edges(); ++e) {
    if (!m.is_boundary_edge(e)) continue;
    const auto& tri = m.triangles_[m.edge_triangles_[e][0]];
    int a = m.edges_[e][0], b = m.edges_[e][1];
    if (!traverses(tri, a, b)) std::swap(a, b);
    if (m.boundary_next_[a] >= 0 || m.boundary_prev_[b] >= 0)
      throw MeshError(MeshError::Kind::NonManifoldVertex, "node " + std::to_string(m.boundary_next_[a] >= 0 ? a : b),
                      "boundary passes through a node twice");
    m.boundary_next_[a] = b;
    m.boundary_prev_[b] = a;
    m.boundary_node_[a] = m.boundary_node_[b] = 1;
  }
  std::vector<char> on_loop(n, 0);
  for (int i = 0; i < n; ++i) {
    if (!m.boundary_node_[i] || on_loop[i]) continue;
    std::vector<int> loop;
    int cur = i;
    do {
      loop.push_back(cur);
      on_loop[cur] = 1;
      cur = m.boundary_next_[cur];
    } while (cur != i && cur >= 0);
    m.boundary_loops_.push_back(std::move(loop));
  }

  // Every node's triangles must form a single fan.
  for (int i = 0; i < n; ++i) {
    if (m.fan(i).size() != m.node_triangles_[i].size())
      throw MeshError(MeshError::Kind::NonManifoldVertex, "node " + std::to_string(i),
                      "triangles around node do not form a single fan");
  }

  if (!m.has_boundary()) {
    double volume = 0.0;
    for (const auto& tri : m.triangles_)
      volume += m.positions_[tri[0]].dot(m.positions_[tri[1]].cross(m.positions_[tri[2]]));
    if (volume < 0) {
      for (auto& tri : m.triangles_) std::swap(tri[1], tri[2]);
      return build(std::move(m.positions_), std::move(m.triangles_));
    }
  }
  return m;
}

int TriMesh::find_edge(int a, int b) const {
  auto it = edge_lookup_.find(edge_key(a, b));
  return it == edge_lookup_.end() ? -1 : it->second;
}

int TriMesh::neighbor(int t, int k) const {
  const auto& et = edge_triangles_[triangle_edges_[t][k]];
  return et[0] == t ? et[1] : et[0];
}

int TriMesh::corner_of(int t, int node) const {
  for (int k = 0; k < 3; ++k)
    if (triangles_[t][k] == node) return k;
  return -1;
}

std::vector<int> TriMesh::fan(int node) const {
  std::vector<int> out;
  if (node_triangles_[node].empty()) return out;
  int start = node_triangles_[node].front();
  if (boundary_next_[node] >= 0) {
    const int e = find_edge(node, boundary_next_[node]);
    start = edge_triangles_[e][0];
  }
  int t = start;
  const std::size_t cap = node_triangles_[node].size() + 1;
  while (t >= 0 && out.size() < cap) {
    out.push_back(t);
    const int c = corner_of(t, node);
    const int next = neighbor(t, (c + 2) % 3);
    if (next == start) break;
    t = next;
  }
  return out;
}

Vec3 TriMesh::triangle_normal(int t) const {
  const auto& tri = triangles_[t];
  return (positions_[tri[1]] - positions_[tri[0]]).cross(positions_[tri[2]] - positions_[tri[0]]).normalized();
}

double TriMesh::triangle_area(int t) const {
  const auto& tri = triangles_[t];
  return 0.5 * (positions_[tri[1]] - positions_[tri[0]]).cross(positions_[tri[2]] - positions_[tri[0]]).norm();
}

Vec3 TriMesh::barycenter(int t) const {
  const auto& tri = triangles_[t];
  return (positions_[tri[0]] + positions_[tri[1]] + positions_[tri[2]]) / 3.0;
}

double TriMesh::tip_angle(int t, int corner) const {
  const auto& tri = triangles_[t];
  const Vec3& p = positions_[tri[corner]];
  const Vec3 a = positions_[tri[(corner + 1) % 3]] - p;
  const Vec3 b = positions_[tri[(corner + 2) % 3]] - p;
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

double TriMesh::mean_edge_length() const {
  double sum = 0.0;
  for (int e = 0; e < num_edges(); ++e) sum += edge_length(e);
  return sum / std::max(1, num_edges());
}

double TriMesh::bounding_diameter() const {
  Vec3 lo = positions_.front(), hi = positions_.front();
  for (const auto& p : positions_) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  return (hi - lo).norm();
}

double EdgeTransport::between(const TriMesh& mesh, int from, int to) const {
  const int e = mesh.find_edge(from, to);
  if (e < 0) throw std::out_of_range("no edge between nodes");
  return directed(mesh, e, from);
}

int BoundaryInfo::index_sum_quarters() const {
  int sum = 0;
  for (std::size_t i = 0; i < is_boundary.size(); ++i)
    if (is_boundary[i]) sum += index_quarters[i];
  return sum;
}

std::vector<Vec3> vertex_normals(const TriMesh& mesh) {
  std::vector<Vec3> normals(mesh.num_nodes(), Vec3::Zero());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const Vec3 n = mesh.triangle_normal(t);
    for (int k = 0; k < 3; ++k) normals[mesh.triangle(t)[k]] += mesh.tip_angle(t, k) * n;
  }
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    const double len = normals[i].norm();
    if (len < 1e-12)
      throw MeshError(MeshError::Kind::Geometry, "node " + std::to_string(i),
                      "tip-angle weighted normal vanishes (folded surface)");
    normals[i] /= len;
  }
  return normals;
}

TangentFrames build_tangent_frames(const TriMesh& mesh, const std::vector<Vec3>& normals) {
  TangentFrames f;
  f.normal = normals;
  f.basis1.resize(mesh.num_nodes());
  f.basis2.resize(mesh.num_nodes());
  for (int i = 0; i < mesh.num_nodes(); ++i) {
    const Vec3& n = normals[i];
    Vec3 axis = Vec3::Zero();
    for (int e : mesh.node_edges(i)) {
      const Vec3 v = mesh.position(mesh.other_node(e, i)) - mesh.position(i);
      const Vec3 p = project_to_plane(v, n);
      if (p.norm() > 1e-10 * v.norm()) {
        axis = p.normalized();
        break;
      }
    }
    if (axis.isZero())
      throw MeshError(MeshError::Kind::Geometry, "node " + std::to_string(i), "no incident edge spans the tangent plane");
    // Re-orthogonalize so that basis1 . normal vanishes to rounding.
    axis = project_to_plane(axis, n).normalized();
    f.basis1[i] = axis;
    f.basis2[i] = n.cross(axis);
  }
  return f;
}

EdgeTransport edge_transport_angles(const TriMesh& mesh, const TangentFrames& frames) {
  EdgeTransport tr;
  tr.phi.resize(mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const int i = mesh.edge(e)[0], j = mesh.edge(e)[1];
    const Vec3 v = mesh.position(j) - mesh.position(i);
    const Vec3 pi = project_to_plane(v, frames.normal[i]);
    const Vec3 pj = project_to_plane(v, frames.normal[j]);
    if (pi.norm() < 1e-12 * v.norm() || pj.norm() < 1e-12 * v.norm())
      throw MeshError(MeshError::Kind::Geometry, edge_name(i, j), "edge is parallel to a node normal");
    tr.phi[e] = wrap_angle(frames.angle_of(j, pj) - frames.angle_of(i, pi));
  }
  return tr;
}

int boundary_index_quarters(double angle) {
  if (angle < 0.75 * kPi) return 1;
  if (angle <= 1.25 * kPi) return 0;
  if (angle <= 1.75 * kPi) return -1;
  return -2;
}

BoundaryInfo classify_boundary(const TriMesh& mesh, const TangentFrames& frames) {
  const int n = mesh.num_nodes();
  BoundaryInfo b;
  b.is_boundary.assign(n, 0);
  b.interior_angle.assign(n, 0.0);
  b.index_quarters.assign(n, 0);
  b.direction.assign(n, Vec3::Zero());
  b.value.assign(n, Complex(0.0, 0.0));

  for (int i = 0; i < n; ++i) {
    if (!mesh.is_boundary_node(i)) continue;
    b.is_boundary[i] = 1;
    double angle = 0.0;
    for (int t : mesh.node_triangles(i)) angle += mesh.tip_angle(t, mesh.corner_of(t, i));
    b.interior_angle[i] = angle;
    b.index_quarters[i] = boundary_index_quarters(angle);

    // Outward normals of the two boundary edges, in the plane of their faces.
    auto outward = [&](int a, int c) {
      const int e = mesh.find_edge(a, c);
      const Vec3 nt = mesh.triangle_normal(mesh.edge_triangles(e)[0]);
      return (mesh.position(c) - mesh.position(a)).cross(nt);
    };
    const Vec3 out_next = project_to_plane(outward(i, mesh.boundary_next(i)), frames.normal[i]);
    const Vec3 out_prev = project_to_plane(outward(mesh.boundary_prev(i), i), frames.normal[i]);
    const double a1 = frames.angle_of(i, out_next);
    const double a2 = frames.angle_of(i, out_prev);
    double bisector = a1 + 0.5 * wrap_angle(a2 - a1);
    b.direction[i] = frames.direction(i, bisector);
    if (b.index_quarters[i] == 1 || b.index_quarters[i] == -1) bisector += kQuarterPi;
    b.value[i] = std::polar(1.0, 4.0 * bisector);
  }
  return b;
}

Surface Surface::prepare(TriMesh mesh) {
  Surface s{std::move(mesh), {}, {}, {}};
  s.frames = build_tangent_frames(s.mesh, vertex_normals(s.mesh));
  s.transport = edge_transport_angles(s.mesh, s.frames);
  s.boundary = classify_boundary(s.mesh, s.frames);
  return s;
}

}  // namespace quadcarve
