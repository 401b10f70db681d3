#pragma once

#include "quadcarve/geometry.hpp"

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace quadcarve {

enum class NodeKind { Singularity, BoundaryCorner, TJunction, Crossing, BoundaryExit, Anchor, Merge };
const char* to_string(NodeKind k);
NodeKind node_kind_from_string(const std::string& s);

struct LayoutNode {
  NodeKind kind = NodeKind::Crossing;
  Vec3 position = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  int index_quarters = 0;  // d for singularities, Table-1 index for boundary corners
  int singularity = -1;    // id of the originating singularity
  bool on_boundary = false;
};

struct LayoutEdge {
  std::array<int, 2> nodes{-1, -1};
  std::vector<Vec3> polyline;  // nodes[0] -> nodes[1]
  int parent = -1;             // separatrix id; boundary loop l is stored as -1 - l
  bool boundary = false;       // boundary edges run with the surface on their left
};

struct LayoutFace {
  std::vector<int> halfedges;  // cycle with the face on the left
  std::vector<int> quarters;   // sector quarters at the head of each half-edge
  bool hole = false;
};

struct Component {
  int face = -1;
  std::array<std::vector<int>, 4> sides;  // half-edges, counter-clockwise
  std::array<int, 4> corners{};           // node at the start of each side
};

class LayoutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Planar subdivision of the surface by separatrix and boundary curves.
// Half-edge 2e runs along edge e, 2e+1 against it.
class TLayout {
 public:
  TLayout() = default;
  TLayout(std::vector<LayoutNode> nodes, std::vector<LayoutEdge> edges, int euler_characteristic = 1,
          int boundary_loops = 1);

  const std::vector<LayoutNode>& nodes() const { return nodes_; }
  const std::vector<LayoutEdge>& edges() const { return edges_; }
  const LayoutNode& node(int v) const { return nodes_[v]; }
  const LayoutEdge& edge(int e) const { return edges_[e]; }
  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int euler_characteristic() const { return chi_; }
  int boundary_loops() const { return loops_; }

  static int twin(int h) { return h ^ 1; }
  int tail(int h) const { return edges_[h / 2].nodes[h & 1]; }
  int head(int h) const { return edges_[h / 2].nodes[1 - (h & 1)]; }
  std::vector<Vec3> halfedge_polyline(int h) const;
  double halfedge_length(int h) const;
  double departure_angle(int h) const { return departure_[h]; }
  // Outgoing half-edges of a node, counter-clockwise.
  const std::vector<int>& rotation(int v) const { return rotation_[v]; }
  int degree(int v) const { return static_cast<int>(rotation_[v].size()); }
  int next(int h) const { return next_[h]; }
  int face_of(int h) const { return face_of_[h]; }

  const std::vector<LayoutFace>& faces() const { return faces_; }
  const std::vector<Component>& components() const { return components_; }
  int num_components() const { return static_cast<int>(components_.size()); }
  // Component id of a face, or -1.
  int component_of_face(int f) const { return face_component_[f]; }

  int count(NodeKind k) const;
  int t_junction_count() const { return count(NodeKind::TJunction); }
  // (singularity id, index) pairs, sorted.
  std::vector<std::pair<int, int>> singularity_multiset() const;

  bool valid() const { return problems_.empty(); }
  const std::vector<std::string>& problems() const { return problems_; }
  void require_valid() const;
  // V - E + F (holes included) against chi + boundary loops.
  bool euler_ok() const;

  // Stem of a T-junction (the edge bordered by two corner sectors), or -1.
  int t_junction_stem(int v) const;

 private:
  friend class LayoutEditor;
  void rebuild();

  std::vector<LayoutNode> nodes_;
  std::vector<LayoutEdge> edges_;
  int chi_ = 1;
  int loops_ = 1;

  std::vector<double> departure_;
  std::vector<std::vector<int>> rotation_;
  std::vector<int> next_;
  std::vector<int> face_of_;
  std::vector<LayoutFace> faces_;
  std::vector<Component> components_;
  std::vector<int> face_component_;
  std::vector<std::string> problems_;
};

// Generic construction from curves with marked node positions. Marks on a
// curve are (parameter, node) pairs where the parameter is segment index plus
// fraction; coincident marks are merged into one node. Closed curves wrap.
struct LayoutCurve {
  std::vector<Vec3> polyline;
  std::vector<std::pair<double, int>> marks;
  int parent = -1;
  bool boundary = false;
  bool closed = false;
};

// Degree-2 Merge/Crossing/TJunction nodes are dissolved; node kinds of regular
// interior nodes are refreshed from their degree.
TLayout build_layout(std::vector<LayoutNode> nodes, const std::vector<LayoutCurve>& curves, int euler_characteristic,
                     int boundary_loops);

// ---- Chords and patches ----------------------------------------------------

struct Chord {
  int id = -1;
  std::vector<int> components;
  std::vector<int> entry_side;  // per component
  std::vector<int> exit_side;
  // Rung k (k = 0..n) separates component k-1 from k; rungs 0 and n are the
  // chord ends. Half-edges as they appear in component min(k, n-1).
  std::vector<std::vector<int>> rungs;
  std::vector<int> rung_a;  // rung endpoint on longitudinal side A
  std::vector<int> rung_b;
  std::vector<double> rung_length;
  std::vector<std::vector<int>> side_a;  // per component, half-edges of side A
  std::vector<std::vector<int>> side_b;
  double min_width = 0.0;
  bool cyclic = false;

  int size() const { return static_cast<int>(components.size()); }
};

std::vector<Chord> enumerate_chords(const TLayout& layout);

enum class PatchKind { Zip, NonZip };

struct Patch {
  int first_rung = 0;  // components first_rung .. last_rung-1
  int last_rung = 0;
  PatchKind kind = PatchKind::NonZip;
  std::array<int, 4> corners{};  // a_first, b_first, a_last, b_last

  int size() const { return last_rung - first_rung; }
};

std::vector<Patch> enumerate_patches(const Chord& chord, const TLayout& layout);

}  // namespace quadcarve
