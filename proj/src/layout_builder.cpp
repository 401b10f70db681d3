#include "quadcarve/layout_builder.hpp"

#include <fmt/format.h>

#include <map>

namespace quadcarve {

TLayout layout_from_separatrices(const Surface& surface, const std::vector<Singularity>& singularities,
                                 const TraceResult& trace) {
  const TriMesh& m = surface.mesh;
  const auto& seps = trace.separatrices;
  std::vector<LayoutNode> nodes;
  auto add = [&](NodeKind kind, const Vec3& pos, const Vec3& normal) {
    LayoutNode n;
    n.kind = kind;
    n.position = pos;
    n.normal = normal;
    nodes.push_back(n);
    return static_cast<int>(nodes.size()) - 1;
  };

  std::map<int, int> sing_node;
  for (const Singularity& s : singularities) {
    const int v = add(NodeKind::Singularity, s.location, s.chart.normal);
    nodes[v].index_quarters = s.d;
    nodes[v].singularity = s.id;
    sing_node[s.id] = v;
  }

  // Boundary loops as closed curves; loop position of every boundary node.
  const auto& loops = m.boundary_loops();
  std::vector<LayoutCurve> curves;
  std::vector<std::pair<int, int>> loop_pos(m.num_nodes(), {-1, -1});
  std::map<int, int> corner_node;
  for (std::size_t l = 0; l < loops.size(); ++l) {
    LayoutCurve c;
    c.boundary = true;
    c.closed = true;
    c.parent = -1 - static_cast<int>(l);
    for (std::size_t i = 0; i < loops[l].size(); ++i) {
      const int v = loops[l][i];
      loop_pos[v] = {static_cast<int>(l), static_cast<int>(i)};
      c.polyline.push_back(m.position(v));
      const int b = surface.boundary.index_quarters[v];
      if (b == 0) continue;
      const int n = add(NodeKind::BoundaryCorner, m.position(v), surface.frames.normal[v]);
      nodes[n].index_quarters = b;
      nodes[n].on_boundary = true;
      corner_node[v] = n;
      c.marks.emplace_back(static_cast<double>(i), n);
    }
    curves.push_back(std::move(c));
  }

  auto point_normal = [&](const Separatrix& s, const CurveParam& p) {
    const int seg = std::clamp(p.segment, 0, std::max(0, static_cast<int>(s.segment_triangle.size()) - 1));
    return s.segment_triangle.empty() ? Vec3(Vec3::UnitZ()) : m.triangle_normal(s.segment_triangle[seg]);
  };

  const std::size_t first_sep_curve = curves.size();
  for (const Separatrix& s : seps) {
    LayoutCurve c;
    c.parent = s.id;
    for (const auto& p : s.points) c.polyline.push_back(p.position);
    if (s.origin.kind == SeparatrixOrigin::Kind::Singularity)
      c.marks.emplace_back(0.0, sing_node.at(s.origin.singularity));
    else
      c.marks.emplace_back(0.0, corner_node.at(s.origin.node));
    curves.push_back(std::move(c));
  }
  auto sep_curve = [&](int id) -> LayoutCurve& { return curves[first_sep_curve + id]; };

  std::map<int, int> crossing_node;
  for (const Separatrix& s : seps) {
    for (const Crossing& x : s.crossings) {
      auto it = crossing_node.find(x.id);
      if (it == crossing_node.end())
        it = crossing_node.emplace(x.id, add(NodeKind::Crossing, x.position, point_normal(s, x.param))).first;
      sep_curve(s.id).marks.emplace_back(x.param.value(), it->second);
    }
  }

  std::map<std::pair<int, int>, int> merge_node;
  for (const Separatrix& s : seps) {
    const double end = static_cast<double>(s.num_segments());
    const Vec3 pos = s.points.back().position;
    const Vec3 nrm = point_normal(s, {s.num_segments() - 1, 1.0});
    switch (s.termination) {
      case Termination::BoundaryExit: {
        if (s.end_edge < 0) break;
        const auto& e = m.edge(s.end_edge);
        int a = e[0], b = e[1];
        if (m.boundary_next(a) != b) std::swap(a, b);
        const auto [l, i] = loop_pos[a];
        const double len = m.edge_length(s.end_edge);
        const double f = std::clamp((pos - m.position(a)).norm() / len, 0.0, 1.0);
        const int n = add(NodeKind::BoundaryExit, pos, surface.frames.normal[f < 0.5 ? a : b]);
        nodes[n].on_boundary = true;
        curves[l].marks.emplace_back(i + f, n);
        sep_curve(s.id).marks.emplace_back(end, n);
        continue;
      }
      case Termination::RepeatCross:
      case Termination::SingularTriangleTJunction: {
        const int n = add(NodeKind::TJunction, pos, nrm);
        sep_curve(s.id).marks.emplace_back(end, n);
        sep_curve(s.end_other).marks.emplace_back(s.end_other_param.value(), n);
        continue;
      }
      case Termination::MergedHeteroclinic: {
        const auto key = std::minmax(s.id, s.end_other);
        auto it = merge_node.find(key);
        if (it == merge_node.end()) it = merge_node.emplace(key, add(NodeKind::Merge, pos, nrm)).first;
        sep_curve(s.id).marks.emplace_back(end, it->second);
        continue;
      }
      default: break;
    }
    // Unfinished curve: leave a dangling end.
    sep_curve(s.id).marks.emplace_back(end, add(NodeKind::TJunction, pos, nrm));
  }

  for (std::size_t l = 0; l < loops.size(); ++l) {
    if (!curves[l].marks.empty()) continue;
    const int v = loops[l].front();
    const int n = add(NodeKind::Anchor, m.position(v), surface.frames.normal[v]);
    nodes[n].on_boundary = true;
    curves[l].marks.emplace_back(0.0, n);
  }

  return build_layout(std::move(nodes), curves, m.euler_characteristic(), static_cast<int>(loops.size()));
}

}  // namespace quadcarve
