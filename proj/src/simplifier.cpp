#include "quadcarve/simplifier.hpp"

#include "quadcarve/layout_editor.hpp"
#include "quadcarve/log.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <limits>
#include <set>

namespace quadcarve {
namespace {

bool is_singular(const TLayout& l, int v) { return l.node(v).kind == NodeKind::Singularity; }

// Half-edges of side A from a_first to a_last (forward along the chord).
std::vector<int> line_a(const Chord& c, int first, int last) {
  std::vector<int> out;
  for (int k = first; k < last; ++k)
    for (auto it = c.side_a[k].rbegin(); it != c.side_a[k].rend(); ++it) out.push_back(TLayout::twin(*it));
  return out;
}

std::vector<int> line_b(const Chord& c, int first, int last) {
  std::vector<int> out;
  for (int k = first; k < last; ++k) out.insert(out.end(), c.side_b[k].begin(), c.side_b[k].end());
  return out;
}

double line_length(const TLayout& l, const std::vector<int>& hs) {
  double s = 0.0;
  for (int h : hs) s += l.halfedge_length(h);
  return s;
}

std::vector<Vec3> line_polyline(const TLayout& l, const std::vector<int>& hs) {
  std::vector<Vec3> out;
  for (int h : hs) {
    const auto p = l.halfedge_polyline(h);
    out.insert(out.end(), out.empty() ? p.begin() : p.begin() + 1, p.end());
  }
  return out;
}

// Cumulative arclength of a polyline.
std::vector<double> arclength(const std::vector<Vec3>& p) {
  std::vector<double> s(p.size(), 0.0);
  for (std::size_t k = 1; k < p.size(); ++k) s[k] = s[k - 1] + (p[k] - p[k - 1]).norm();
  return s;
}

Vec3 point_at(const std::vector<Vec3>& p, const std::vector<double>& s, double at) {
  if (at <= 0.0) return p.front();
  if (at >= s.back()) return p.back();
  const auto it = std::upper_bound(s.begin(), s.end(), at);
  const std::size_t k = static_cast<std::size_t>(it - s.begin());
  const double seg = s[k] - s[k - 1];
  const double t = seg > 0 ? (at - s[k - 1]) / seg : 0.0;
  return (1.0 - t) * p[k - 1] + t * p[k];
}

// Role of a T-junction stem relative to a rung: 0 rung, 1 longitudinal side, 2 elsewhere.
int stem_role(const TLayout& l, const Chord& c, int rung, int v) {
  const int stem = l.t_junction_stem(v);
  for (int h : c.rungs[rung])
    if (h / 2 == stem) return 0;
  for (int k = std::max(rung - 1, 0); k <= std::min(rung, c.size() - 1); ++k) {
    for (int h : c.side_a[k])
      if (h / 2 == stem) return 1;
    for (int h : c.side_b[k])
      if (h / 2 == stem) return 1;
  }
  return 2;
}

int count_t_on_line(const TLayout& l, const std::vector<int>& hs) {
  int n = 0;
  for (int h : hs)
    if (l.node(l.tail(h)).kind == NodeKind::TJunction) ++n;
  if (!hs.empty() && l.node(l.head(hs.back())).kind == NodeKind::TJunction) ++n;
  return n;
}

bool has_boundary(const TLayout& l, const std::vector<int>& hs) {
  return std::any_of(hs.begin(), hs.end(), [&](int h) { return l.edge(h / 2).boundary; });
}

}  // namespace

Collapsibility patch_collapsibility(const Chord& c, const Patch& p, const TLayout& l) {
  auto fail = [](int cond, std::string why) { return Collapsibility{false, cond, std::move(why)}; };
  for (int k = p.first_rung; k <= p.last_rung; ++k)
    if (is_singular(l, c.rung_a[k]) && is_singular(l, c.rung_b[k]))
      return fail(1, fmt::format("rung {} joins two singularities", k));
  for (int k = p.first_rung; k <= p.last_rung; ++k) {
    const int a = c.rung_a[k], b = c.rung_b[k];
    if ((is_singular(l, a) && l.node(b).on_boundary) || (is_singular(l, b) && l.node(a).on_boundary))
      return fail(2, fmt::format("rung {} joins a singularity to the boundary", k));
  }
  // corners: a_first, b_first, a_last, b_last; diagonal of i is 3 - i.
  const std::array<int, 4> rung_of{p.first_rung, p.first_rung, p.last_rung, p.last_rung};
  for (int i = 0; i < 4; ++i) {
    const int x = p.corners[i];
    if (l.node(x).kind != NodeKind::TJunction) continue;
    const int y = p.corners[i ^ 1];
    const int diag = p.corners[3 - i];
    if (is_singular(l, y) || is_singular(l, diag)) continue;
    if (l.node(y).kind == NodeKind::TJunction &&
        stem_role(l, c, rung_of[i], x) == stem_role(l, c, rung_of[i], y))
      continue;
    return fail(3, fmt::format("T-junction {} on rung {} has no admissible opposite", x, rung_of[i]));
  }
  return {};
}

Collapsibility chord_collapsibility(const Chord& c, const TLayout& l) {
  if (c.cyclic) return {false, 0, "cyclic chord"};
  for (const Patch& p : enumerate_patches(c, l)) {
    Collapsibility r = patch_collapsibility(c, p, l);
    if (!r.ok) return r;
  }
  return {};
}

double patch_energy(const Chord& c, const Patch& p, const TLayout& l) {
  if (p.kind == PatchKind::NonZip) return 1.0;
  double w = 0.0;
  for (int k = p.first_rung; k <= p.last_rung; ++k) w += c.rung_length[k];
  w /= p.last_rung - p.first_rung + 1;
  const double len = 0.5 * (line_length(l, line_a(c, p.first_rung, p.last_rung)) +
                            line_length(l, line_b(c, p.first_rung, p.last_rung)));
  if (len <= 0.0) return -std::numeric_limits<double>::infinity();
  return kPi / 8 - std::atan(w / len);
}

double chord_energy(const Chord& c, const TLayout& l) {
  double e = std::numeric_limits<double>::infinity();
  for (const Patch& p : enumerate_patches(c, l)) e = std::min(e, patch_energy(c, p, l));
  return e;
}

std::optional<CollapsePlan> plan_collapse(const Chord& c, const TLayout& l, std::string* reason) {
  auto fail = [&](std::string why) -> std::optional<CollapsePlan> {
    if (reason) *reason = std::move(why);
    return std::nullopt;
  };
  if (c.cyclic) return fail("cyclic chord");
  CollapsePlan plan;
  plan.chord = c.id;
  std::set<int> deleted;
  for (const Patch& p : enumerate_patches(c, l)) {
    plan.kinds.push_back(p.kind);
    plan.energies.push_back(patch_energy(c, p, l));
    const auto a = line_a(c, p.first_rung, p.last_rung);
    const auto b = line_b(c, p.first_rung, p.last_rung);
    const bool a_sing = is_singular(l, p.corners[0]) || is_singular(l, p.corners[2]);
    const bool b_sing = is_singular(l, p.corners[1]) || is_singular(l, p.corners[3]);
    if (p.kind == PatchKind::NonZip) {
      bool drop_a;
      if (a_sing) drop_a = false;
      else if (b_sing) drop_a = true;
      else drop_a = count_t_on_line(l, a) <= count_t_on_line(l, b);
      if (has_boundary(l, drop_a ? a : b)) {
        const bool other_ok = !(drop_a ? b_sing : a_sing) && !has_boundary(l, drop_a ? b : a);
        if (!other_ok) return fail("longitudinal side to delete lies on the boundary");
        drop_a = !drop_a;
      }
      for (int h : drop_a ? a : b) deleted.insert(h / 2);
      continue;
    }
    if (has_boundary(l, a) || has_boundary(l, b)) return fail("zip side lies on the boundary");
    const bool start_a = is_singular(l, p.corners[0]) && is_singular(l, p.corners[3]);
    const auto& start_line = start_a ? a : b;
    const auto& end_line = start_a ? b : a;
    for (int h : a) deleted.insert(h / 2);
    for (int h : b) deleted.insert(h / 2);

    ZipCurve z;
    z.start_node = start_a ? p.corners[0] : p.corners[1];
    z.end_node = start_a ? p.corners[3] : p.corners[2];
    z.parent = l.edge(start_line.front() / 2).parent;
    const auto sp = line_polyline(l, start_line), ep = line_polyline(l, end_line);
    const auto ss = arclength(sp), es = arclength(ep);
    if (ss.back() <= 0 || es.back() <= 0) return fail("degenerate zip side");

    // Normalized arclength of each rung endpoint on either side.
    std::vector<double> knots{0.0};
    std::vector<Vec3> offsets{Vec3::Zero()};
    auto blend = [&](double u) {
      return Vec3((1.0 - u) * point_at(sp, ss, u * ss.back()) + u * point_at(ep, es, u * es.back()));
    };
    double acc_s = 0.0, acc_e = 0.0;
    for (int k = p.first_rung + 1; k < p.last_rung; ++k) {
      for (int h : start_a ? c.side_a[k - 1] : c.side_b[k - 1]) acc_s += l.halfedge_length(h);
      for (int h : start_a ? c.side_b[k - 1] : c.side_a[k - 1]) acc_e += l.halfedge_length(h);
      const double t = 0.5 * (acc_s / ss.back() + acc_e / es.back());
      auto rung = line_polyline(l, c.rungs[k]);
      if (!start_a) std::reverse(rung.begin(), rung.end());
      const auto rs = arclength(rung);
      const Vec3 r = point_at(rung, rs, t * rs.back());
      z.rungs.push_back(k);
      z.rung_points.push_back(r);
      z.rung_params.push_back(t);
      knots.push_back(t);
      offsets.push_back(r - blend(t));
    }
    knots.push_back(1.0);
    offsets.push_back(Vec3::Zero());

    std::vector<double> us;
    for (double s : ss) us.push_back(s / ss.back());
    for (double s : es) us.push_back(s / es.back());
    us.insert(us.end(), knots.begin(), knots.end());
    std::sort(us.begin(), us.end());
    us.erase(std::unique(us.begin(), us.end(), [](double x, double y) { return y - x < 1e-12; }), us.end());
    for (double& u : us)
      for (double k : knots)
        if (std::abs(u - k) < 1e-12) u = k;
    for (double u : us) {
      const std::size_t i = std::min<std::size_t>(
          static_cast<std::size_t>(std::upper_bound(knots.begin(), knots.end(), u) - knots.begin()), knots.size() - 1);
      const double span = knots[i] - knots[i - 1];
      const double f = span > 0 ? std::clamp((u - knots[i - 1]) / span, 0.0, 1.0) : 1.0;
      z.polyline.push_back(blend(u) + (1.0 - f) * offsets[i - 1] + f * offsets[i]);
    }
    z.polyline.front() = l.node(z.start_node).position;
    z.polyline.back() = l.node(z.end_node).position;
    for (std::size_t j = 0; j < z.rungs.size(); ++j) {
      const auto it = std::find(us.begin(), us.end(), z.rung_params[j]);
      z.polyline[static_cast<std::size_t>(it - us.begin())] = z.rung_points[j];
    }
    plan.zips.push_back(std::move(z));
  }
  plan.deleted_edges.assign(deleted.begin(), deleted.end());
  return plan;
}

namespace {

// Extends every dangling separatrix end straight ahead until it meets an edge
// of the face it dangles into.
bool extend_hanging(LayoutEditor& ed, std::string* reason) {
  for (int guard = 0; guard < 4 * ed.num_nodes() + 8; ++guard) {
    std::vector<int> nmap, emap;
    const TLayout l = ed.finish(&nmap, &emap);
    int v = -1;
    for (int x = 0; x < l.num_nodes() && v < 0; ++x)
      if (l.degree(x) == 1 && l.node(x).kind != NodeKind::Singularity) v = x;
    if (v < 0) return true;

    const int h = l.rotation(v).front();
    const auto poly = l.halfedge_polyline(h);
    const Vec3 origin = l.node(v).position;
    Vec3 back = Vec3::Zero();
    for (std::size_t k = 1; k < poly.size(); ++k)
      if ((poly[k] - origin).norm() > 1e-12) {
        back = poly[k];
        break;
      }
    const Frame fr = Frame::from_normal(l.node(v).normal);
    auto to2 = [&](const Vec3& p) {
      const Vec3 d = project_to_plane(p - origin, fr.normal);
      return Vec2(d.dot(fr.axis), d.dot(fr.axis2()));
    };
    const Vec2 dir = -to2(back).normalized();
    if (!dir.allFinite()) {
      if (reason) *reason = "degenerate hanging edge";
      return false;
    }

    double best_s = std::numeric_limits<double>::infinity();
    int best_edge = -1;
    Vec3 best_point;
    std::set<int> seen;
    for (int fh : l.faces()[l.face_of(h)].halfedges) {
      const int e = fh / 2;
      if (e == h / 2 || !seen.insert(e).second) continue;
      const auto& q = l.edge(e).polyline;
      for (std::size_t k = 0; k + 1 < q.size(); ++k) {
        const Vec2 a = to2(q[k]), b = to2(q[k + 1]);
        const Vec2 w = b - a;
        const double den = dir.x() * w.y() - dir.y() * w.x();
        if (std::abs(den) < 1e-15 * w.norm()) continue;
        const double s = (a.x() * w.y() - a.y() * w.x()) / den;
        const double u = (a.x() * dir.y() - a.y() * dir.x()) / den;
        if (u < 0.0 || u > 1.0 || s <= 1e-12 || s >= best_s) continue;
        best_s = s;
        best_edge = e;
        best_point = q[k] + u * (q[k + 1] - q[k]);
      }
    }
    if (best_edge < 0) {
      if (reason) *reason = fmt::format("hanging separatrix at node {} meets no edge", v);
      return false;
    }
    const int vv = nmap[v];
    const auto& target = l.edge(best_edge);
    int hit = -1;
    for (int end : target.nodes)
      if ((l.node(end).position - best_point).norm() <= 1e-9 * std::max(best_s, 1e-300)) hit = nmap[end];
    if (hit < 0) {
      LayoutNode t;
      t.kind = NodeKind::TJunction;
      t.position = best_point;
      t.normal = l.node(v).normal;
      hit = ed.split_edge(emap[best_edge], best_point, t);
    }
    LayoutEdge ext;
    ext.nodes = {vv, hit};
    ext.polyline = {origin, best_point};
    ext.parent = l.edge(h / 2).parent;
    ed.add_edge(std::move(ext));
    ed.dissolve(vv);
  }
  if (reason) *reason = "hanging separatrix extension did not settle";
  return false;
}

}  // namespace

CollapseOutcome collapse_chord(const TLayout& layout, const Chord& chord) {
  CollapseOutcome out;
  std::string why;
  const auto plan = plan_collapse(chord, layout, &why);
  if (!plan) {
    out.reason = why;
    return out;
  }
  LayoutEditor ed(layout);
  for (int e : plan->deleted_edges) ed.remove_edge(e);
  for (const ZipCurve& z : plan->zips) {
    std::vector<int> chain{z.start_node};
    for (std::size_t j = 0; j < z.rungs.size(); ++j) {
      int best = -1;
      double best_d = std::numeric_limits<double>::infinity();
      for (int h : chord.rungs[z.rungs[j]]) {
        const int e = h / 2;
        if (!ed.alive_edge(e)) continue;
        const auto& poly = ed.edge(e).polyline;
        const auto [seg, t] = closest_on_polyline(poly, z.rung_points[j]);
        const double d = ((1 - t) * poly[seg] + t * poly[seg + 1] - z.rung_points[j]).norm();
        if (d < best_d) {
          best_d = d;
          best = e;
        }
      }
      if (best < 0) {
        out.reason = "zip rung not found";
        return out;
      }
      LayoutNode x;
      x.kind = NodeKind::Crossing;
      x.position = z.rung_points[j];
      x.normal = (layout.node(chord.rung_a[z.rungs[j]]).normal + layout.node(chord.rung_b[z.rungs[j]]).normal)
                     .normalized();
      chain.push_back(ed.split_edge(best, z.rung_points[j], x));
    }
    chain.push_back(z.end_node);
    // Split the curve at the rung points.
    std::size_t cursor = 0;
    for (std::size_t j = 0; j + 1 < chain.size(); ++j) {
      LayoutEdge e;
      e.nodes = {chain[j], chain[j + 1]};
      e.parent = z.parent;
      const Vec3 stop = j + 2 == chain.size() ? z.polyline.back() : z.rung_points[j];
      e.polyline.push_back(z.polyline[cursor]);
      while (cursor + 1 < z.polyline.size()) {
        ++cursor;
        e.polyline.push_back(z.polyline[cursor]);
        if (z.polyline[cursor] == stop) break;
      }
      ed.add_edge(std::move(e));
    }
  }
  ed.dissolve_regular();
  ed.refresh_kinds();
  if (!extend_hanging(ed, &why)) {
    out.reason = why;
    return out;
  }
  ed.dissolve_regular();
  ed.refresh_kinds();
  TLayout next = ed.finish();

  if (!next.valid()) {
    out.reason = "collapsed layout is invalid: " + next.problems().front();
    return out;
  }
  if (next.num_components() >= layout.num_components()) {
    out.reason = "component count did not decrease";
    return out;
  }
  if (next.num_components() == 0) {
    out.reason = "collapse would remove every component";
    return out;
  }
  if (next.t_junction_count() > layout.t_junction_count()) {
    out.reason = "T-junction count would increase";
    return out;
  }
  if (next.singularity_multiset() != layout.singularity_multiset()) {
    out.reason = "singularity set changed";
    return out;
  }
  out.accepted = true;
  out.layout = std::move(next);
  return out;
}

const char* to_string(CollapseOrder o) { return o == CollapseOrder::Thinnest ? "thinnest" : "energy"; }

SimplifyResult simplify(const TLayout& layout, const SimplifyConfig& config) {
  SimplifyResult res;
  res.layout = layout;
  while (config.max_collapses < 0 || static_cast<int>(res.log.size()) < config.max_collapses) {
    const auto chords = enumerate_chords(res.layout);
    struct Candidate {
      int chord;
      double energy;
    };
    std::vector<Candidate> cands;
    for (const Chord& c : chords) {
      if (!chord_collapsibility(c, res.layout).ok) continue;
      const double e = chord_energy(c, res.layout);
      if (e > 0.0) cands.push_back({c.id, e});
    }
    std::sort(cands.begin(), cands.end(), [&](const Candidate& x, const Candidate& y) {
      if (config.order == CollapseOrder::Energy && x.energy != y.energy) return x.energy > y.energy;
      const double wx = chords[x.chord].min_width, wy = chords[y.chord].min_width;
      if (config.order == CollapseOrder::Thinnest && wx != wy) return wx < wy;
      return x.chord < y.chord;
    });
    bool done = false;
    for (const Candidate& cand : cands) {
      const Chord& c = chords[cand.chord];
      CollapseOutcome o = collapse_chord(res.layout, c);
      if (!o.accepted) {
        ++res.rejected;
        log::info(fmt::format("chord {} not collapsed: {}", c.id, o.reason));
        continue;
      }
      CollapseRecord r;
      r.step = static_cast<int>(res.log.size());
      r.chord = c.id;
      r.min_width = c.min_width;
      r.energy = cand.energy;
      for (const Patch& p : enumerate_patches(c, res.layout)) r.patch_kinds.push_back(p.kind);
      r.components_before = res.layout.num_components();
      r.t_junctions_before = res.layout.t_junction_count();
      r.components_after = o.layout.num_components();
      r.t_junctions_after = o.layout.t_junction_count();
      log::debug(fmt::format("collapsed chord {} (width {:.4g}): components {} -> {}", c.id, c.min_width,
                             r.components_before, r.components_after));
      res.log.push_back(std::move(r));
      res.layout = std::move(o.layout);
      if (config.keep_snapshots) res.snapshots.push_back(res.layout);
      done = true;
      break;
    }
    if (!done) break;
  }
  return res;
}

}  // namespace quadcarve
