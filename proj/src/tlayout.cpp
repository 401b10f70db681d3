#include "quadcarve/layout_editor.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>
#include <numeric>

namespace quadcarve {
namespace {

int kind_priority(NodeKind k) {
  switch (k) {
    case NodeKind::Singularity: return 6;
    case NodeKind::BoundaryCorner: return 5;
    case NodeKind::BoundaryExit: return 4;
    case NodeKind::Anchor: return 3;
    case NodeKind::TJunction: return 2;
    case NodeKind::Crossing: return 1;
    case NodeKind::Merge: return 0;
  }
  return 0;
}

}  // namespace

const char* to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Singularity: return "singularity";
    case NodeKind::BoundaryCorner: return "boundary_corner";
    case NodeKind::TJunction: return "t_junction";
    case NodeKind::Crossing: return "crossing";
    case NodeKind::BoundaryExit: return "boundary_exit";
    case NodeKind::Anchor: return "anchor";
    case NodeKind::Merge: return "merge";
  }
  return "unknown";
}

NodeKind node_kind_from_string(const std::string& s) {
  for (NodeKind k : {NodeKind::Singularity, NodeKind::BoundaryCorner, NodeKind::TJunction, NodeKind::Crossing,
                     NodeKind::BoundaryExit, NodeKind::Anchor, NodeKind::Merge})
    if (s == to_string(k)) return k;
  throw std::invalid_argument("unknown node kind '" + s + "'");
}

double polyline_length(const std::vector<Vec3>& p) {
  double len = 0.0;
  for (std::size_t k = 1; k < p.size(); ++k) len += (p[k] - p[k - 1]).norm();
  return len;
}

std::pair<int, double> closest_on_polyline(const std::vector<Vec3>& p, const Vec3& x) {
  std::pair<int, double> best{0, 0.0};
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < p.size(); ++k) {
    const Vec3 d = p[k + 1] - p[k];
    const double len2 = d.squaredNorm();
    const double t = len2 > 0 ? std::clamp((x - p[k]).dot(d) / len2, 0.0, 1.0) : 0.0;
    const double dist = (p[k] + t * d - x).squaredNorm();
    if (dist < best_d) {
      best_d = dist;
      best = {static_cast<int>(k), t};
    }
  }
  return best;
}

// ---- TLayout ---------------------------------------------------------------

TLayout::TLayout(std::vector<LayoutNode> nodes, std::vector<LayoutEdge> edges, int chi, int loops)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), chi_(chi), loops_(loops) {
  rebuild();
}

std::vector<Vec3> TLayout::halfedge_polyline(int h) const {
  std::vector<Vec3> p = edges_[h / 2].polyline;
  if (h & 1) std::reverse(p.begin(), p.end());
  return p;
}

double TLayout::halfedge_length(int h) const { return polyline_length(edges_[h / 2].polyline); }

int TLayout::count(NodeKind k) const {
  return static_cast<int>(std::count_if(nodes_.begin(), nodes_.end(), [k](const LayoutNode& n) { return n.kind == k; }));
}

std::vector<std::pair<int, int>> TLayout::singularity_multiset() const {
  std::vector<std::pair<int, int>> out;
  for (const auto& n : nodes_)
    if (n.kind == NodeKind::Singularity) out.emplace_back(n.singularity, n.index_quarters);
  std::sort(out.begin(), out.end());
  return out;
}

void TLayout::require_valid() const {
  if (valid()) return;
  std::string msg = "invalid layout:";
  for (const auto& p : problems_) msg += "\n  " + p;
  throw LayoutError(msg);
}

bool TLayout::euler_ok() const {
  return num_nodes() - num_edges() + static_cast<int>(faces_.size()) == chi_ + loops_;
}

int TLayout::t_junction_stem(int v) const {
  const auto& rot = rotation_[v];
  if (rot.size() != 3) return -1;
  int widest = 0;
  double widest_angle = -1.0;
  for (int i = 0; i < 3; ++i) {
    const double a = positive_mod(departure_[rot[(i + 1) % 3]] - departure_[rot[i]], kTwoPi);
    if (a > widest_angle) {
      widest_angle = a;
      widest = i;
    }
  }
  return rot[(widest + 2) % 3] / 2;
}

void TLayout::rebuild() {
  const int nh = 2 * num_edges();
  departure_.assign(nh, 0.0);
  rotation_.assign(num_nodes(), {});
  next_.assign(nh, -1);
  face_of_.assign(nh, -1);
  faces_.clear();
  components_.clear();
  problems_.clear();

  std::vector<Frame> frames(num_nodes());
  for (int v = 0; v < num_nodes(); ++v) frames[v] = Frame::from_normal(nodes_[v].normal);
  for (int h = 0; h < nh; ++h) {
    const auto& poly = edges_[h / 2].polyline;
    const int v = tail(h);
    const Vec3 origin = nodes_[v].position;
    const double scale = std::max(polyline_length(poly), 1e-300);
    Vec3 dir = Vec3::Zero();
    const int n = static_cast<int>(poly.size());
    for (int k = 1; k < n; ++k) {
      const Vec3& p = (h & 1) ? poly[n - 1 - k] : poly[k];
      if ((p - origin).norm() > 1e-12 * scale) {
        dir = p - origin;
        break;
      }
    }
    departure_[h] = frames[v].angle_of(project_to_plane(dir, frames[v].normal));
    rotation_[v].push_back(h);
  }
  for (int v = 0; v < num_nodes(); ++v) {
    auto& rot = rotation_[v];
    std::sort(rot.begin(), rot.end(), [&](int a, int b) {
      const double da = wrap_positive(departure_[a]), db = wrap_positive(departure_[b]);
      return da != db ? da < db : a < b;
    });
    if (rot.empty()) problems_.push_back(fmt::format("node {} is isolated", v));
  }
  for (int h = 0; h < nh; ++h) {
    const auto& rot = rotation_[head(h)];
    const int i = static_cast<int>(std::find(rot.begin(), rot.end(), twin(h)) - rot.begin());
    next_[h] = rot[(i + static_cast<int>(rot.size()) - 1) % rot.size()];
  }

  // Interior angle spanned at a boundary node, from the forward to the backward boundary half-edge.
  auto boundary_span = [&](int v) {
    int fwd = -1, bwd = -1;
    for (int h : rotation_[v]) {
      if (!edges_[h / 2].boundary) continue;
      if ((h & 1) == 0) fwd = h;
      else bwd = h;
    }
    if (fwd < 0 || bwd < 0) return kTwoPi;
    double a = positive_mod(departure_[bwd] - departure_[fwd], kTwoPi);
    return a <= 0 ? kTwoPi : a;
  };
  auto sector_quarters = [&](int v, double angle) {
    const LayoutNode& n = nodes_[v];
    if (n.on_boundary) {
      const int q = n.kind == NodeKind::BoundaryCorner ? 2 - n.index_quarters : 2;
      return static_cast<int>(std::lround(angle * q / boundary_span(v)));
    }
    if (n.kind == NodeKind::Singularity)
      return static_cast<int>(std::lround(angle * (4 - n.index_quarters) / kTwoPi));
    return static_cast<int>(std::lround(angle / kHalfPi));
  };

  for (int h0 = 0; h0 < nh; ++h0) {
    if (face_of_[h0] >= 0) continue;
    LayoutFace f;
    const int fid = static_cast<int>(faces_.size());
    int h = h0;
    bool all_reversed_boundary = true;
    do {
      face_of_[h] = fid;
      f.halfedges.push_back(h);
      if (!(edges_[h / 2].boundary && (h & 1))) all_reversed_boundary = false;
      h = next_[h];
    } while (h != h0 && f.halfedges.size() <= static_cast<std::size_t>(nh));
    f.hole = all_reversed_boundary;
    for (int x : f.halfedges) {
      const int nx = next_[x];
      double angle = positive_mod(departure_[twin(x)] - departure_[nx], kTwoPi);
      if (nx == twin(x) || angle <= 0) angle = kTwoPi;
      f.quarters.push_back(f.hole ? 0 : sector_quarters(head(x), angle));
    }
    faces_.push_back(std::move(f));
  }

  face_component_.assign(faces_.size(), -1);
  for (int fid = 0; fid < static_cast<int>(faces_.size()); ++fid) {
    const LayoutFace& f = faces_[fid];
    if (f.hole) continue;
    const int m = static_cast<int>(f.halfedges.size());
    int corners = 0;
    bool bad = false;
    for (int q : f.quarters) {
      if (q == 1) ++corners;
      if (q < 1 || q > 2) bad = true;
    }
    if (bad || corners != 4) {
      std::string list;
      for (int k = 0; k < m; ++k)
        list += fmt::format(" {}({})", head(f.halfedges[k]), f.quarters[k]);
      problems_.push_back(fmt::format("face {} is not four-sided: {} corners, node(quarters):{}", fid, corners, list));
      continue;
    }
    Component c;
    c.face = fid;
    int start = 0;
    while (f.quarters[start] != 1) ++start;
    int side = -1;
    for (int k = 1; k <= m; ++k) {
      const int idx = (start + k) % m;
      const int he = f.halfedges[idx];
      if (f.quarters[(idx + m - 1) % m] == 1) {
        ++side;
        c.corners[side] = tail(he);
      }
      c.sides[side].push_back(he);
    }
    face_component_[fid] = static_cast<int>(components_.size());
    components_.push_back(std::move(c));
  }
}

// ---- LayoutEditor ----------------------------------------------------------

LayoutEditor::LayoutEditor(std::vector<LayoutNode> nodes, std::vector<LayoutEdge> edges, int chi, int loops)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), chi_(chi), loops_(loops) {
  dead_edge_.assign(edges_.size(), 0);
  dead_node_.assign(nodes_.size(), 0);
}

LayoutEditor::LayoutEditor(const TLayout& l)
    : LayoutEditor(l.nodes(), l.edges(), l.euler_characteristic(), l.boundary_loops()) {}

int LayoutEditor::add_node(const LayoutNode& n) {
  nodes_.push_back(n);
  dead_node_.push_back(0);
  return num_nodes() - 1;
}

int LayoutEditor::add_edge(LayoutEdge e) {
  edges_.push_back(std::move(e));
  dead_edge_.push_back(0);
  return num_edges() - 1;
}

void LayoutEditor::remove_edge(int e) { dead_edge_[e] = 1; }

std::vector<int> LayoutEditor::incident(int v) const {
  std::vector<int> out;
  for (int e = 0; e < num_edges(); ++e) {
    if (dead_edge_[e]) continue;
    if (edges_[e].nodes[0] == v) out.push_back(e);
    if (edges_[e].nodes[1] == v) out.push_back(e);
  }
  return out;
}

int LayoutEditor::split_edge(int e, const Vec3& point, const LayoutNode& node) {
  const auto [seg, t] = closest_on_polyline(edges_[e].polyline, point);
  const int v = add_node(node);
  nodes_[v].position = point;
  LayoutEdge first = edges_[e], second = edges_[e];
  first.polyline.assign(edges_[e].polyline.begin(), edges_[e].polyline.begin() + seg + 1);
  first.polyline.push_back(point);
  second.polyline = {point};
  second.polyline.insert(second.polyline.end(), edges_[e].polyline.begin() + seg + 1, edges_[e].polyline.end());
  first.nodes = {edges_[e].nodes[0], v};
  second.nodes = {v, edges_[e].nodes[1]};
  (void)t;
  remove_edge(e);
  add_edge(std::move(first));
  add_edge(std::move(second));
  return v;
}

bool LayoutEditor::dissolve(int v) {
  const auto inc = incident(v);
  if (inc.size() != 2 || inc[0] == inc[1]) return false;
  LayoutEdge a = edges_[inc[0]], b = edges_[inc[1]];
  if (a.boundary != b.boundary) return false;
  if (a.boundary) {
    if (a.nodes[1] != v) std::swap(a, b);
    if (a.nodes[1] != v || b.nodes[0] != v) return false;
  } else {
    if (a.nodes[1] != v) {
      std::reverse(a.polyline.begin(), a.polyline.end());
      std::swap(a.nodes[0], a.nodes[1]);
    }
    if (b.nodes[0] != v) {
      std::reverse(b.polyline.begin(), b.polyline.end());
      std::swap(b.nodes[0], b.nodes[1]);
    }
  }
  LayoutEdge joined = a;
  joined.nodes = {a.nodes[0], b.nodes[1]};
  joined.polyline.insert(joined.polyline.end(), b.polyline.begin() + 1, b.polyline.end());
  remove_edge(inc[0]);
  remove_edge(inc[1]);
  add_edge(std::move(joined));
  dead_node_[v] = 1;
  return true;
}

void LayoutEditor::dissolve_regular() {
  for (int v = 0; v < num_nodes(); ++v) {
    if (dead_node_[v]) continue;
    const NodeKind k = nodes_[v].kind;
    if (k == NodeKind::Singularity || k == NodeKind::BoundaryCorner) continue;
    dissolve(v);
  }
}

void LayoutEditor::refresh_kinds() {
  for (int v = 0; v < num_nodes(); ++v) {
    if (dead_node_[v]) continue;
    LayoutNode& n = nodes_[v];
    if (n.kind == NodeKind::Singularity || n.kind == NodeKind::BoundaryCorner) continue;
    const int d = degree(v);
    if (n.on_boundary)
      n.kind = d >= 3 ? NodeKind::BoundaryExit : NodeKind::Anchor;
    else
      n.kind = d >= 4 ? NodeKind::Crossing : d == 2 ? NodeKind::Merge : NodeKind::TJunction;
  }
}

TLayout LayoutEditor::finish(std::vector<int>* node_map, std::vector<int>* edge_map) const {
  if (node_map) node_map->clear();
  if (edge_map) edge_map->clear();
  std::vector<int> remap(nodes_.size(), -1);
  std::vector<char> used(nodes_.size(), 0);
  for (int e = 0; e < num_edges(); ++e)
    if (!dead_edge_[e]) used[edges_[e].nodes[0]] = used[edges_[e].nodes[1]] = 1;
  std::vector<LayoutNode> nodes;
  for (int v = 0; v < num_nodes(); ++v) {
    if (dead_node_[v] && !used[v]) continue;
    if (!used[v] && !dead_node_[v] && nodes_[v].kind != NodeKind::Singularity) continue;
    remap[v] = static_cast<int>(nodes.size());
    nodes.push_back(nodes_[v]);
    if (node_map) node_map->push_back(v);
  }
  std::vector<LayoutEdge> edges;
  for (int e = 0; e < num_edges(); ++e) {
    if (dead_edge_[e]) continue;
    LayoutEdge x = edges_[e];
    x.nodes = {remap[x.nodes[0]], remap[x.nodes[1]]};
    x.polyline.front() = nodes[x.nodes[0]].position;
    x.polyline.back() = nodes[x.nodes[1]].position;
    edges.push_back(std::move(x));
    if (edge_map) edge_map->push_back(e);
  }
  return TLayout(std::move(nodes), std::move(edges), chi_, loops_);
}

// ---- Construction from curves ----------------------------------------------

namespace {

Vec3 curve_point(const std::vector<Vec3>& p, double param) {
  const int nseg = static_cast<int>(p.size()) - 1;
  int seg = std::clamp(static_cast<int>(std::floor(param)), 0, std::max(nseg - 1, 0));
  const double t = std::clamp(param - seg, 0.0, 1.0);
  if (nseg <= 0) return p.front();
  return (1.0 - t) * p[seg] + t * p[seg + 1];
}

std::vector<Vec3> sub_polyline(const std::vector<Vec3>& p, double p0, double p1) {
  std::vector<Vec3> out{curve_point(p, p0)};
  for (int k = static_cast<int>(std::floor(p0)) + 1; k < p1 && k < static_cast<int>(p.size()); ++k)
    if (k > p0) out.push_back(p[k]);
  out.push_back(curve_point(p, p1));
  return out;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); }
};

}  // namespace

TLayout build_layout(std::vector<LayoutNode> nodes, const std::vector<LayoutCurve>& curves, int chi, int loops) {
  UnionFind uf(static_cast<int>(nodes.size()));
  auto unite = [&](int a, int b) {
    a = uf.find(a);
    b = uf.find(b);
    if (a == b) return;
    if (kind_priority(nodes[b].kind) > kind_priority(nodes[a].kind) ||
        (kind_priority(nodes[b].kind) == kind_priority(nodes[a].kind) && b < a))
      std::swap(a, b);
    uf.parent[b] = a;
    nodes[a].on_boundary = nodes[a].on_boundary || nodes[b].on_boundary;
  };

  // Working copies of the curves with closed polylines made explicit.
  std::vector<std::vector<Vec3>> polys(curves.size());
  std::vector<std::vector<std::pair<double, int>>> marks(curves.size());
  for (std::size_t c = 0; c < curves.size(); ++c) {
    polys[c] = curves[c].polyline;
    if (curves[c].closed) polys[c].push_back(polys[c].front());
    marks[c] = curves[c].marks;
    std::sort(marks[c].begin(), marks[c].end());
    const double span = static_cast<double>(polys[c].size() - 1);
    for (std::size_t k = 1; k < marks[c].size(); ++k)
      if (marks[c][k].first - marks[c][k - 1].first < 1e-9) unite(marks[c][k].second, marks[c][k - 1].second);
    if (curves[c].closed && marks[c].size() > 1 && marks[c].front().first + span - marks[c].back().first < 1e-9)
      unite(marks[c].front().second, marks[c].back().second);
  }

  std::vector<LayoutEdge> edges;
  for (std::size_t c = 0; c < curves.size(); ++c) {
    auto& mk = marks[c];
    if (mk.empty()) throw LayoutError(fmt::format("curve {} has no nodes", c));
    // Collapse coincident marks.
    std::vector<std::pair<double, int>> uniq;
    for (const auto& m : mk)
      if (uniq.empty() || m.first - uniq.back().first >= 1e-9) uniq.push_back(m);
    const double span = static_cast<double>(polys[c].size() - 1);
    if (curves[c].closed && uniq.size() > 1 && uniq.front().first + span - uniq.back().first < 1e-9) uniq.pop_back();
    const int m = static_cast<int>(uniq.size());
    const int pieces = curves[c].closed ? m : m - 1;
    for (int k = 0; k < pieces; ++k) {
      const double p0 = uniq[k].first;
      double p1 = k + 1 < m ? uniq[k + 1].first : uniq[0].first + span;
      LayoutEdge e;
      e.parent = curves[c].parent;
      e.boundary = curves[c].boundary;
      e.nodes = {uf.find(uniq[k].second), uf.find(uniq[(k + 1) % m].second)};
      if (p1 <= span) {
        e.polyline = sub_polyline(polys[c], p0, p1);
      } else {
        e.polyline = sub_polyline(polys[c], p0, span);
        const auto tail = sub_polyline(polys[c], 0.0, p1 - span);
        e.polyline.insert(e.polyline.end(), tail.begin() + 1, tail.end());
      }
      edges.push_back(std::move(e));
    }
  }
  LayoutEditor ed(nodes, std::move(edges), chi, loops);
  for (int v = 0; v < static_cast<int>(nodes.size()); ++v)
    if (uf.find(v) != v) ed.node(v).kind = NodeKind::Merge;  // absorbed; unused after remap
  for (int v = 0; v < ed.num_nodes(); ++v)
    if (ed.node(v).kind == NodeKind::Merge && ed.degree(v) == 2) ed.dissolve(v);
  ed.refresh_kinds();
  ed.dissolve_regular();
  ed.refresh_kinds();
  return ed.finish();
}

// ---- Chords and patches ----------------------------------------------------

namespace {

struct SideRef {
  int component = -1;
  int side = -1;
};

// The side across side s of component c, if the twins form exactly one full side.
SideRef across(const TLayout& l, int c, int s) {
  const auto& hs = l.components()[c].sides[s];
  const int f = l.face_of(TLayout::twin(hs.front()));
  if (l.faces()[f].hole) return {};
  const int c2 = l.component_of_face(f);
  if (c2 < 0) return {};
  std::vector<int> want;
  for (auto it = hs.rbegin(); it != hs.rend(); ++it) want.push_back(TLayout::twin(*it));
  for (int s2 = 0; s2 < 4; ++s2)
    if (l.components()[c2].sides[s2] == want) return {c2, s2};
  return {};
}

}  // namespace

std::vector<Chord> enumerate_chords(const TLayout& l) {
  const int n = l.num_components();
  std::vector<std::array<char, 2>> visited(n, {0, 0});
  std::vector<Chord> chords;
  for (int c0 = 0; c0 < n; ++c0) {
    for (int axis = 0; axis < 2; ++axis) {
      if (visited[c0][axis]) continue;
      // Walk backwards to the chord start.
      SideRef start{c0, axis};
      bool cyclic = false;
      {
        std::vector<std::array<char, 2>> seen(n, {0, 0});
        seen[c0][axis] = 1;
        SideRef cur = start;
        while (true) {
          const SideRef prev = across(l, cur.component, cur.side);
          if (prev.component < 0) break;
          const SideRef entry{prev.component, (prev.side + 2) % 4};
          if (seen[entry.component][entry.side % 2]) {
            cyclic = true;
            break;
          }
          seen[entry.component][entry.side % 2] = 1;
          cur = entry;
        }
        if (!cyclic) start = cur;
      }
      Chord ch;
      ch.id = static_cast<int>(chords.size());
      ch.cyclic = cyclic;
      SideRef cur = start;
      std::vector<std::array<char, 2>> seen(n, {0, 0});
      while (cur.component >= 0 && !seen[cur.component][cur.side % 2]) {
        seen[cur.component][cur.side % 2] = 1;
        visited[cur.component][cur.side % 2] = 1;
        ch.components.push_back(cur.component);
        ch.entry_side.push_back(cur.side);
        ch.exit_side.push_back((cur.side + 2) % 4);
        const SideRef nxt = across(l, cur.component, (cur.side + 2) % 4);
        cur = nxt;
      }
      if (cur.component >= 0) ch.cyclic = true;

      const int m = ch.size();
      auto side_len = [&](const std::vector<int>& hs) {
        double s = 0.0;
        for (int h : hs) s += l.halfedge_length(h);
        return s;
      };
      for (int k = 0; k <= m; ++k) {
        const Component& comp = l.components()[ch.components[std::min(k, m - 1)]];
        int a, b;
        std::vector<int> hs;
        if (k < m) {
          const int e = ch.entry_side[k];
          hs = comp.sides[e];
          a = comp.corners[e];
          b = comp.corners[(e + 1) % 4];
        } else {
          const int x = ch.exit_side[m - 1];
          hs = comp.sides[x];
          a = comp.corners[(x + 1) % 4];
          b = comp.corners[x];
        }
        ch.rungs.push_back(hs);
        ch.rung_a.push_back(a);
        ch.rung_b.push_back(b);
        ch.rung_length.push_back(side_len(hs));
      }
      for (int k = 0; k < m; ++k) {
        const Component& comp = l.components()[ch.components[k]];
        ch.side_a.push_back(comp.sides[(ch.exit_side[k] + 1) % 4]);
        ch.side_b.push_back(comp.sides[(ch.entry_side[k] + 1) % 4]);
      }
      ch.min_width = *std::min_element(ch.rung_length.begin(), ch.rung_length.end());
      chords.push_back(std::move(ch));
    }
  }
  return chords;
}

std::vector<Patch> enumerate_patches(const Chord& ch, const TLayout& l) {
  auto singular = [&](int v) { return l.node(v).kind == NodeKind::Singularity; };
  std::vector<int> cuts{0};
  for (int k = 1; k < ch.size(); ++k)
    if (singular(ch.rung_a[k]) || singular(ch.rung_b[k])) cuts.push_back(k);
  cuts.push_back(ch.size());
  std::vector<Patch> out;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    Patch p;
    p.first_rung = cuts[i];
    p.last_rung = cuts[i + 1];
    p.corners = {ch.rung_a[p.first_rung], ch.rung_b[p.first_rung], ch.rung_a[p.last_rung], ch.rung_b[p.last_rung]};
    const bool on_a = singular(p.corners[0]) || singular(p.corners[2]);
    const bool on_b = singular(p.corners[1]) || singular(p.corners[3]);
    p.kind = on_a && on_b ? PatchKind::Zip : PatchKind::NonZip;
    out.push_back(p);
  }
  return out;
}

}  // namespace quadcarve
