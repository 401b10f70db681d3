#include "quadcarve/tracer.hpp"

#include "quadcarve/log.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <deque>
#include <limits>
#include <map>

namespace quadcarve {
namespace {

Vec2 unit(double angle) { return {std::cos(angle), std::sin(angle)}; }
double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }
Complex to_complex(const Vec2& v) { return {v.x(), v.y()}; }

Vec3 barycentric_of(const std::array<Vec2, 3>& c, const Vec2& p) {
  const double area = cross2(c[1] - c[0], c[2] - c[0]);
  const double l1 = cross2(p - c[0], c[2] - c[0]) / area;
  const double l2 = cross2(c[1] - c[0], p - c[0]) / area;
  return {1.0 - l1 - l2, l1, l2};
}

struct Exit {
  double s = std::numeric_limits<double>::infinity();
  int edge = -1;  // local edge k (corner k -> k+1)
};

// First parameter s >= 0 at which p + s*d leaves the triangle.
Exit exit_of(const std::array<Vec2, 3>& c, const Vec2& p, const Vec2& d) {
  const Vec3 l0 = barycentric_of(c, p);
  const Vec3 l1 = barycentric_of(c, p + d);
  Exit out;
  for (int m = 0; m < 3; ++m) {
    const double g = l1[m] - l0[m];
    if (g >= 0) continue;
    const double s = std::max(0.0, l0[m]) / -g;
    if (s < out.s) {
      out.s = s;
      out.edge = (m + 1) % 3;
    }
  }
  return out;
}

bool inside(const std::array<Vec2, 3>& c, const Vec2& p, double tol = 1e-12) {
  const Vec3 l = barycentric_of(c, p);
  return l.minCoeff() >= -tol;
}

double line_angle(const Vec2& a, const Vec2& b) {
  const double c = std::abs(a.normalized().dot(b.normalized()));
  return std::acos(std::min(1.0, c));
}

}  // namespace

const char* to_string(Termination t) {
  switch (t) {
    case Termination::None: return "none";
    case Termination::BoundaryExit: return "boundary_exit";
    case Termination::RepeatCross: return "repeat_cross";
    case Termination::SingularTriangleTJunction: return "singular_t_junction";
    case Termination::MergedHeteroclinic: return "merged_heteroclinic";
    case Termination::StepCap: return "step_cap";
  }
  return "unknown";
}

double Separatrix::length() const {
  double len = 0.0;
  for (std::size_t k = 1; k < points.size(); ++k) len += (points[k].position - points[k - 1].position).norm();
  return len;
}

Vec3 Separatrix::position_at(const CurveParam& p) const {
  if (p.segment >= num_segments()) return points.back().position;
  return (1.0 - p.t) * points[p.segment].position + p.t * points[p.segment + 1].position;
}

// ---- FieldInterpolator -----------------------------------------------------

FieldInterpolator::FieldInterpolator(const Surface& s, const CrossField& f) {
  const int nt = s.mesh.num_triangles();
  charts_.resize(nt);
  corners_.resize(nt);
  rep_.resize(nt);
  for (int t = 0; t < nt; ++t) {
    charts_[t] = TriangleChart::of(s.mesh, t);
    for (int k = 0; k < 3; ++k) corners_[t][k] = charts_[t].to_local(s.mesh.position(s.mesh.triangle(t)[k]));
    double prev = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double r = 4.0 * corner_cross_angle(s, f, t, k, charts_[t]);
      rep_[t][k] = k == 0 ? r : prev + wrap_angle(r - prev);
      prev = rep_[t][k];
    }
  }
}

Vec3 FieldInterpolator::barycentric(int t, const Vec2& local) const { return barycentric_of(corners_[t], local); }

double FieldInterpolator::direction_angle(int t, const Vec2& local, double reference) const {
  const Vec3 l = barycentric(t, local);
  const double psi = (l[0] * rep_[t][0] + l[1] * rep_[t][1] + l[2] * rep_[t][2]) / 4.0;
  const double m = std::round((reference - psi) / kHalfPi);
  return psi + m * kHalfPi;
}

Vec3 interpolate_direction(const FieldInterpolator& interp, int t, const Vec3& bary, const Vec3& reference) {
  const auto& c = interp.chart(t);
  const Vec2 local = bary[0] * interp.local_corner(t, 0) + bary[1] * interp.local_corner(t, 1) +
                     bary[2] * interp.local_corner(t, 2);
  return c.direction(interp.direction_angle(t, local, c.angle_of(reference)));
}

// ---- Heun stepping ---------------------------------------------------------

StepResult heun_step(const TriMesh& mesh, const FieldInterpolator& interp, const SurfacePoint& start,
                     const Vec3& direction, double h, const std::vector<char>& singular) {
  StepResult res;
  int t = start.triangle;
  const TriangleChart* chart = &interp.chart(t);
  Vec2 p = chart->to_local(start.position);
  const double a1 = interp.direction_angle(t, p, chart->angle_of(direction));
  const double a2 = interp.direction_angle(t, p + h * unit(a1), a1);
  Vec2 d = unit(a1) + unit(a2);
  d = d.norm() < 1e-12 ? unit(a1) : d.normalized();

  auto corners = [&](int tri) {
    return std::array<Vec2, 3>{interp.local_corner(tri, 0), interp.local_corner(tri, 1), interp.local_corner(tri, 2)};
  };
  Vec3 last = start.position;
  auto emit = [&](const Vec2& local) {
    const Vec3 x = chart->to_world(local);
    if ((x - last).norm() <= 1e-12 * h) return false;
    SurfacePoint sp;
    sp.triangle = t;
    sp.bary = interp.barycentric(t, local);
    sp.position = x;
    res.points.push_back(sp);
    res.segment_triangle.push_back(t);
    last = x;
    return true;
  };

  double remaining = h;
  for (int guard = 0; guard < 64; ++guard) {
    const auto c = corners(t);
    const Exit ex = exit_of(c, p, d);
    if (ex.s >= remaining) {
      emit(p + remaining * d);
      res.direction = chart->direction(std::atan2(d.y(), d.x()));
      return res;
    }
    const Vec2 x = p + ex.s * d;
    emit(x);
    const int n = mesh.neighbor(t, ex.edge);
    const Vec3 d3 = chart->direction(std::atan2(d.y(), d.x()));
    if (n < 0) {
      res.event = StepResult::Event::Boundary;
      res.boundary_edge = mesh.triangle_edges(t)[ex.edge];
      res.direction = d3;
      if (res.points.empty()) {
        SurfacePoint sp = start;
        sp.position = chart->to_world(x);
        res.points.push_back(sp);
        res.segment_triangle.push_back(t);
      }
      return res;
    }
    const Vec3 x3 = chart->to_world(x);
    const Vec3 nd3 = minimal_rotation(chart->normal, interp.chart(n).normal) * d3;
    t = n;
    chart = &interp.chart(t);
    p = chart->to_local(x3);
    d = unit(chart->angle_of(nd3));
    remaining -= ex.s;
    if (!res.points.empty() && (res.points.back().position - x3).norm() <= 1e-12 * h) {
      res.points.back().triangle = t;
      res.points.back().bary = interp.barycentric(t, p);
    }
    if (!singular.empty() && singular[t]) {
      res.event = StepResult::Event::SingularEntry;
      res.direction = nd3;
      if (res.points.empty()) {
        SurfacePoint sp;
        sp.triangle = t;
        sp.bary = interp.barycentric(t, p);
        sp.position = x3;
        res.points.push_back(sp);
        res.segment_triangle.push_back(start.triangle);
      }
      return res;
    }
  }
  res.direction = chart->direction(std::atan2(d.y(), d.x()));
  return res;
}

// ---- Conformal hyperbola method -------------------------------------------

ConformalPoint to_conformal(const Vec2& center, int d, double beta, const Vec2& z) {
  const Vec2 rel = z - center;
  const double r = rel.norm();
  const double theta = positive_mod(std::atan2(rel.y(), rel.x()) - beta, kTwoPi);
  const double e = (4 - d) / 8.0;
  return {std::pow(r, e), theta * e};
}

Vec2 from_conformal(const Vec2& center, int d, double beta, const ConformalPoint& w) {
  const double e = 8.0 / (4 - d);
  const double r = std::pow(w.rho, e);
  return center + r * unit(beta + w.phi * e);
}

Vec2 hyperbola_point(const Vec2& center, int d, double beta, double A, double phi) {
  const double rho = std::sqrt(A / (std::sin(phi) * std::cos(phi)));
  return from_conformal(center, d, beta, {rho, phi});
}

std::vector<double> hyperbola_rays(int rays) {
  rays = std::max(rays, 2);
  std::vector<double> out;
  for (int m = 1; m < rays; ++m) out.push_back(kHalfPi * m / rays);
  if (rays % 2) out.push_back(kQuarterPi);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Direction of the streamline through z (phi decreasing for sign +1).
Vec2 hyperbola_tangent(const Vec2& center, int d, double beta, const Vec2& z, int sign) {
  const double e = (4 - d) / 8.0;
  const Complex zr = to_complex(z - center) * std::polar(1.0, -beta);
  const ConformalPoint w = to_conformal(center, d, beta, z);
  // dz = dw / g'(z) with g'(z) = e z^(e-1), dw along exp(-i phi).
  const Complex gp = e * std::pow(std::abs(zr), e - 1.0) * std::polar(1.0, (e - 1.0) * w.phi / e);
  Complex dz = std::polar(1.0, -w.phi) / gp * std::polar(1.0, beta);
  dz *= static_cast<double>(sign);
  return Vec2(dz.real(), dz.imag()).normalized();
}

}  // namespace

EntryFrame singular_entry_frame(const Singularity& s, const Vec2& q, double incoming_angle) {
  const Vec2 a = s.chart.to_local(s.location);
  const int P = 4 - s.d;
  if ((q - a).norm() <= 1e-12 * std::max(1.0, a.norm())) throw std::invalid_argument("entry point coincides with the singularity");
  const Vec2 in = unit(incoming_angle);
  EntryFrame best;
  double best_score = -2.0;
  for (int j = 0; j < P; ++j) {
    const ConformalPoint w = to_conformal(a, s.d, s.ports[j], q);
    if (w.phi >= kHalfPi) continue;
    for (int sign : {1, -1}) {
      const double score = hyperbola_tangent(a, s.d, s.ports[j], q, sign).dot(in);
      if (score > best_score) {
        best_score = score;
        best.port = j;
        best.rho = w.rho;
        best.phi = std::clamp(w.phi, 1e-9, kHalfPi - 1e-9);
        best.A = best.rho * best.rho * std::sin(best.phi) * std::cos(best.phi);
        best.sign = sign;
      }
    }
  }
  return best;
}

HyperbolaArc trace_singular_triangle(const Singularity& s, const std::array<Vec2, 3>& c, const Vec2& q,
                                     double incoming_angle, int rays) {
  HyperbolaArc arc;
  arc.singularity = s.id;
  arc.exponent = (4 - s.d) / 8.0;
  arc.frame = singular_entry_frame(s, q, incoming_angle);
  const Vec2 a = s.chart.to_local(s.location);
  const double beta = s.ports[arc.frame.port];
  arc.points.push_back(q);

  std::vector<double> grid = hyperbola_rays(rays);
  std::vector<double> path;
  const double eps = 1e-12;
  if (arc.frame.sign > 0) {
    for (auto it = grid.rbegin(); it != grid.rend(); ++it)
      if (*it < arc.frame.phi - eps) path.push_back(*it);
  } else {
    for (double g : grid)
      if (g > arc.frame.phi + eps) path.push_back(g);
  }

  auto finish = [&](const Vec2& from, const Vec2& dir) {
    const Exit ex = exit_of(c, from, dir);
    const Vec2 x = from + std::min(ex.s, 1e300) * dir;
    arc.points.push_back(x);
    arc.exit_edge = ex.edge;
    const Vec2 tan = hyperbola_tangent(a, s.d, beta, x, arc.frame.sign);
    arc.exit_angle = std::atan2(tan.y(), tan.x());
  };

  for (double phi : path) {
    const Vec2 pt = hyperbola_point(a, s.d, beta, arc.frame.A, phi);
    const Vec2 prev = arc.points.back();
    if (!inside(c, pt)) {
      finish(prev, (pt - prev).normalized());
      return arc;
    }
    arc.points.push_back(pt);
    if (phi == kQuarterPi) {
      arc.t_junction = true;
      arc.exit_angle = std::atan2((pt - prev).y(), (pt - prev).x());
      return arc;
    }
  }
  // Past the last ray: continue along the exact tangent to the boundary.
  const Vec2 tan = hyperbola_tangent(a, s.d, beta, arc.points.back(), arc.frame.sign);
  finish(arc.points.back(), tan);
  return arc;
}

// ---- Separatrix tracing ----------------------------------------------------

namespace {

struct RegSeg {
  int sep;
  int seg;
  Vec2 a, b;
};

struct Hit {
  double s, u;
  int sep, seg;
  Vec2 point;
  double angle;
  bool opposite;
};

class Tracer {
 public:
  Tracer(const Surface& s, const CrossField& f, const std::vector<Singularity>& sings, const TracerOptions& opt)
      : s_(s), sings_(sings), opt_(opt), interp_(s, f) {
    const int nt = s.mesh.num_triangles();
    singular_.assign(nt, 0);
    sing_of_.assign(nt, -1);
    for (const auto& sg : sings) {
      singular_[sg.triangle] = 1;
      sing_of_[sg.triangle] = sg.id;
    }
    registry_.resize(nt);
    step_cap_ = opt.step_cap_factor * s.mesh.num_edges();
  }

  TraceResult run() {
    seed();
    for (int id = 0; id < static_cast<int>(seps_.size()); ++id) {
      trace(id);
      drain_resumes();
    }
    TraceResult out;
    out.separatrices = std::move(seps_);
    out.merges = merges_;
    out.tangential_same_direction = same_dir_;
    out.step_caps = step_caps_;
    return out;
  }

 private:
  std::array<Vec2, 3> corners(int t) const {
    return {interp_.local_corner(t, 0), interp_.local_corner(t, 1), interp_.local_corner(t, 2)};
  }

  SurfacePoint point_in(int t, const Vec3& x) const {
    SurfacePoint sp;
    sp.triangle = t;
    sp.position = x;
    sp.bary = interp_.barycentric(t, interp_.chart(t).to_local(x));
    return sp;
  }

  int new_separatrix(const SeparatrixOrigin& o, int key) {
    Separatrix sep;
    sep.id = static_cast<int>(seps_.size());
    sep.origin = o;
    seps_.push_back(std::move(sep));
    dir_.push_back(Vec3::Zero());
    key_.push_back(key);
    return seps_.back().id;
  }

  void seed() {
    const TriMesh& m = s_.mesh;
    // Boundary corners with negative index, by node id.
    for (int v = 0; v < m.num_nodes(); ++v) {
      if (!s_.boundary.is_boundary[v]) continue;
      const int b = s_.boundary.index_quarters[v];
      if (b > -1) continue;
      const int Q = 2 - b;
      const double total = s_.boundary.interior_angle[v];
      for (int k = 1; k < Q; ++k) {
        SeparatrixOrigin o;
        o.kind = SeparatrixOrigin::Kind::BoundaryCorner;
        o.node = v;
        o.port = k - 1;
        const int id = new_separatrix(o, -1 - v);
        const double target = total * k / Q;
        double acc = 0.0;
        for (int t : m.fan(v)) {
          const int c = m.corner_of(t, v);
          const double tip = m.tip_angle(t, c);
          if (target <= acc + tip || t == m.fan(v).back()) {
            const Vec3 edge = (m.position(m.triangle(t)[(c + 1) % 3]) - m.position(v)).normalized();
            const Vec3 dir = Eigen::AngleAxisd(target - acc, m.triangle_normal(t)) * edge;
            SurfacePoint sp;
            sp.triangle = t;
            sp.bary = Vec3::Zero();
            sp.bary[c] = 1.0;
            sp.position = m.position(v);
            seps_[id].points.push_back(sp);
            dir_[id] = dir;
            break;
          }
          acc += tip;
        }
      }
    }
    // Port rays, by singularity triangle then port.
    std::vector<int> order(sings_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int x, int y) { return sings_[x].triangle < sings_[y].triangle; });
    port_sep_.assign(sings_.size(), {});
    for (int si : order) {
      const Singularity& sg = sings_[si];
      const int t = sg.triangle;
      const Vec2 a = interp_.chart(t).to_local(sg.location);
      for (int k = 0; k < sg.num_ports(); ++k) {
        SeparatrixOrigin o;
        o.kind = SeparatrixOrigin::Kind::Singularity;
        o.singularity = sg.id;
        o.port = k;
        const int id = new_separatrix(o, sg.id);
        port_sep_[si].push_back(id);
        Separatrix& sep = seps_[id];
        const Vec2 d = unit(sg.ports[k]);
        const Exit ex = exit_of(corners(t), a, d);
        const Vec2 x = a + ex.s * d;
        sep.points.push_back(point_in(t, sg.location));
        sep.points.push_back(point_in(t, interp_.chart(t).to_world(x)));
        sep.segment_triangle.push_back(t);
        registry_[t].push_back({id, 0, a, x});
        const Vec3 d3 = interp_.chart(t).direction(sg.ports[k]);
        const int n = m.neighbor(t, ex.edge);
        if (n < 0) {
          sep.termination = Termination::BoundaryExit;
          sep.end_edge = m.triangle_edges(t)[ex.edge];
          flag_boundary_angle(sep, d3);
        } else {
          sep.points.back() = point_in(n, sep.points.back().position);
          dir_[id] = minimal_rotation(interp_.chart(t).normal, interp_.chart(n).normal) * d3;
        }
      }
    }
  }

  void flag_boundary_angle(Separatrix& sep, const Vec3& dir) {
    const TriMesh& m = s_.mesh;
    const auto& e = m.edge(sep.end_edge);
    const Vec3 along = (m.position(e[1]) - m.position(e[0])).normalized();
    const double c = std::abs(along.dot(dir.normalized()));
    if (std::acos(std::min(1.0, c)) > kHalfPi - opt_.tangential_threshold) return;
    sep.tangential_exit = true;
    log::warn(fmt::format("separatrix {} exits the boundary tangentially", sep.id));
  }

  // Appends the segment from the current end to `end` (lying in triangle t).
  // Returns false when the separatrix terminated on this segment.
  bool append(int id, SurfacePoint end, int t, const Vec3& dir) {
    Separatrix& sep = seps_[id];
    const TriangleChart& ch = interp_.chart(t);
    const Vec2 a = ch.to_local(sep.points.back().position);
    const Vec2 b = ch.to_local(end.position);
    const int seg = sep.num_segments();
    const bool in_singular = singular_[t] != 0;
    const int own_sing = sing_of_[t];

    std::vector<Hit> hits;
    const Vec2 r = b - a;
    for (const RegSeg& o : registry_[t]) {
      if (o.sep == id && std::abs(o.seg - seg) <= 1) continue;
      if (o.seg == 0 && seg == 0 && key_[o.sep] == key_[id]) continue;
      if (in_singular && o.seg == 0 && seps_[o.sep].origin.kind == SeparatrixOrigin::Kind::Singularity &&
          seps_[o.sep].origin.singularity == own_sing)
        continue;
      const Vec2 w = o.b - o.a;
      const double den = cross2(r, w);
      if (std::abs(den) <= 1e-14 * r.norm() * w.norm()) continue;
      const double sp = cross2(o.a - a, w) / den;
      const double up = cross2(o.a - a, r) / den;
      if (sp < 0.0 || sp >= 1.0 || up < 0.0 || up >= 1.0) continue;
      hits.push_back({sp, up, o.sep, o.seg, a + sp * r, line_angle(r, w), r.dot(w) < 0});
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& x, const Hit& y) { return x.s < y.s; });

    for (const Hit& h : hits) {
      const Vec3 pos = ch.to_world(h.point);
      const CurveParam own{seg, h.s};
      const CurveParam other{h.seg, h.u};
      const bool tangential = h.angle < opt_.tangential_threshold;
      if (tangential && h.opposite && h.sep != id && !in_singular && h.seg >= 1 &&
          !singular_[seps_[h.sep].segment_triangle[h.seg]]) {
        terminate_at(id, t, pos, dir);
        merge(id, h.sep, other);
        return false;
      }
      int count = 1;
      std::vector<int> seen;
      for (const Crossing& c : sep.crossings)
        if (c.other == h.sep && std::find(seen.begin(), seen.end(), c.id) == seen.end()) {
          seen.push_back(c.id);
          ++count;
        }
      if (count >= 2) {
        terminate_at(id, t, pos, dir);
        sep.termination = Termination::RepeatCross;
        sep.end_other = h.sep;
        sep.end_other_param = other;
        return false;
      }
      if (tangential) {
        ++same_dir_;
        log::warn(fmt::format("tangential crossing of separatrices {} and {} (same direction)", id, h.sep));
      }
      const int cid = next_crossing_++;
      Crossing mine{cid, h.sep, own, other, pos, tangential, count};
      Crossing theirs{cid, id, other, own, pos, tangential, count};
      sep.crossings.push_back(mine);
      seps_[h.sep].crossings.push_back(theirs);
      sort_crossings(seps_[h.sep]);
    }
    sep.points.push_back(end);
    sep.segment_triangle.push_back(t);
    registry_[t].push_back({id, seg, a, b});
    dir_[id] = dir;
    return true;
  }

  static void sort_crossings(Separatrix& sep) {
    std::stable_sort(sep.crossings.begin(), sep.crossings.end(),
                     [](const Crossing& x, const Crossing& y) { return x.param.value() < y.param.value(); });
  }

  void terminate_at(int id, int t, const Vec3& pos, const Vec3& dir) {
    Separatrix& sep = seps_[id];
    const TriangleChart& ch = interp_.chart(t);
    const int seg = sep.num_segments();
    sep.points.push_back(point_in(t, pos));
    sep.segment_triangle.push_back(t);
    registry_[t].push_back({id, seg, ch.to_local(sep.points[seg].position), ch.to_local(pos)});
    dir_[id] = dir;
  }

  // Cuts `x` at `at` and links it with `id`, which already ends there.
  void merge(int id, int x, const CurveParam& at) {
    ++merges_;
    Separatrix& sx = seps_[x];
    const double cut = at.value();
    // Drop registry entries of the removed tail and trim the cut segment.
    for (int seg = at.segment; seg < sx.num_segments(); ++seg) {
      auto& reg = registry_[sx.segment_triangle[seg]];
      for (auto it = reg.begin(); it != reg.end();) {
        if (it->sep == x && it->seg == seg && seg > at.segment) {
          it = reg.erase(it);
          continue;
        }
        if (it->sep == x && it->seg == seg) it->b = it->a + at.t * (it->b - it->a);
        ++it;
      }
    }
    // Remove crossing records beyond the cut, on both sides.
    std::vector<int> dropped;
    for (const Crossing& c : sx.crossings)
      if (c.param.value() > cut) dropped.push_back(c.id);
    for (auto& sp : seps_) {
      auto& cr = sp.crossings;
      cr.erase(std::remove_if(cr.begin(), cr.end(),
                              [&](const Crossing& c) {
                                return std::find(dropped.begin(), dropped.end(), c.id) != dropped.end();
                              }),
               cr.end());
    }
    const Vec3 pos = sx.position_at(at);
    sx.points.resize(at.segment + 1);
    sx.segment_triangle.resize(at.segment + 1);
    sx.points.push_back(point_in(sx.segment_triangle.back(), pos));
    // Curves that ended on the removed tail resume tracing.
    for (auto& sp : seps_) {
      if (sp.id == id || sp.id == x) continue;
      const bool on_tail = sp.end_other == x && sp.end_other_param.value() > cut &&
                           (sp.termination == Termination::RepeatCross ||
                            sp.termination == Termination::MergedHeteroclinic);
      if (!on_tail) continue;
      sp.termination = Termination::None;
      sp.end_other = -1;
      resume_.push_back(sp.id);
    }
    Separatrix& si = seps_[id];
    si.termination = Termination::MergedHeteroclinic;
    si.end_other = x;
    si.end_other_param = {sx.num_segments() - 1, 1.0};
    sx.termination = Termination::MergedHeteroclinic;
    sx.end_other = id;
    sx.end_other_param = {si.num_segments() - 1, 1.0};
    log::info(fmt::format("merged separatrices {} and {} at a tangential crossing", id, x));
  }

  void drain_resumes() {
    int budget = 10 * static_cast<int>(seps_.size()) + 10;
    while (!resume_.empty() && budget-- > 0) {
      const int id = resume_.front();
      resume_.pop_front();
      if (seps_[id].termination == Termination::None) trace(id);
    }
  }

  void trace(int id) {
    const TriMesh& m = s_.mesh;
    while (seps_[id].termination == Termination::None) {
      Separatrix& sep = seps_[id];
      if (sep.steps >= step_cap_) {
        sep.termination = Termination::StepCap;
        ++step_caps_;
        log::warn(fmt::format("separatrix {} hit the step cap (possible limit cycle)", id));
        return;
      }
      ++sep.steps;
      const SurfacePoint cur = sep.points.back();
      const int t = cur.triangle;
      if (singular_[t]) {
        trace_singular(id, t);
        continue;
      }
      const double h = opt_.heun_factor * mean_edge(t);
      StepResult st = heun_step(m, interp_, cur, dir_[id], h, singular_);
      bool alive = true;
      for (std::size_t k = 0; k < st.points.size() && alive; ++k) {
        SurfacePoint p = st.points[k];
        const int seg_t = st.segment_triangle[k];
        if ((p.position - seps_[id].points.back().position).norm() <= 1e-14 * h) {
          seps_[id].points.back() = p;
          continue;
        }
        const Vec3 d = k + 1 == st.points.size() ? st.direction : dir_[id];
        alive = append(id, p, seg_t, d);
      }
      if (!alive) return;
      dir_[id] = st.direction;
      if (st.event == StepResult::Event::Boundary) {
        Separatrix& s2 = seps_[id];
        s2.termination = Termination::BoundaryExit;
        s2.end_edge = st.boundary_edge;
        flag_boundary_angle(s2, st.direction);
      }
    }
  }

  void trace_singular(int id, int t) {
    const TriMesh& m = s_.mesh;
    const Singularity& sg = sings_[sing_of_[t]];
    const TriangleChart& ch = interp_.chart(t);
    const Vec2 q = ch.to_local(seps_[id].points.back().position);
    HyperbolaArc arc;
    try {
      arc = trace_singular_triangle(sg, corners(t), q, ch.angle_of(dir_[id]), opt_.rays);
    } catch (const std::invalid_argument&) {
      // Entered exactly at the singularity: stop as a T-junction on port 0.
      seps_[id].termination = Termination::SingularTriangleTJunction;
      seps_[id].end_other = port_sep_[sg.id][0];
      seps_[id].end_other_param = {0, 0.0};
      return;
    }
    for (std::size_t k = 1; k < arc.points.size(); ++k) {
      const Vec2 prev = arc.points[k - 1];
      const Vec2 cur = arc.points[k];
      if ((cur - prev).norm() < 1e-15) continue;
      const Vec3 d = ch.direction(std::atan2((cur - prev).y(), (cur - prev).x()));
      if (!append(id, point_in(t, ch.to_world(cur)), t, d)) return;
    }
    Separatrix& sep = seps_[id];
    if (arc.t_junction) {
      const int port = (arc.frame.port + 1) % sg.num_ports();
      const int target = port_sep_[sg.id][port];
      const Vec2 a = ch.to_local(sg.location);
      const Vec2 end = ch.to_local(seps_[target].points[1].position);
      const double u = std::clamp((arc.points.back() - a).norm() / (end - a).norm(), 0.0, 1.0);
      sep.termination = Termination::SingularTriangleTJunction;
      sep.end_other = target;
      sep.end_other_param = {0, u};
      return;
    }
    const Vec3 exit_dir = ch.direction(arc.exit_angle);
    const int n = arc.exit_edge >= 0 ? m.neighbor(t, arc.exit_edge) : -1;
    if (n < 0) {
      sep.termination = Termination::BoundaryExit;
      sep.end_edge = arc.exit_edge >= 0 ? m.triangle_edges(t)[arc.exit_edge] : -1;
      if (sep.end_edge >= 0) flag_boundary_angle(sep, exit_dir);
      return;
    }
    sep.points.back() = point_in(n, sep.points.back().position);
    dir_[id] = minimal_rotation(ch.normal, interp_.chart(n).normal) * exit_dir;
  }

  double mean_edge(int t) const {
    double sum = 0.0;
    for (int e : s_.mesh.triangle_edges(t)) sum += s_.mesh.edge_length(e);
    return sum / 3.0;
  }

  const Surface& s_;
  const std::vector<Singularity>& sings_;
  TracerOptions opt_;
  FieldInterpolator interp_;
  std::vector<char> singular_;
  std::vector<int> sing_of_;
  std::vector<std::vector<RegSeg>> registry_;
  std::vector<Separatrix> seps_;
  std::vector<Vec3> dir_;
  std::vector<int> key_;
  std::vector<std::vector<int>> port_sep_;
  std::deque<int> resume_;
  int next_crossing_ = 0;
  int step_cap_ = 0;
  int merges_ = 0, same_dir_ = 0, step_caps_ = 0;
};

}  // namespace

TraceResult trace_separatrices(const Surface& surface, const CrossField& field,
                               const std::vector<Singularity>& singularities, const TracerOptions& options) {
  return Tracer(surface, field, singularities, options).run();
}

Separatrix merge_opposite_tangential(const Separatrix& a, const Separatrix& b, const Crossing& c,
                                     double tangential_threshold) {
  auto seg_dir = [](const Separatrix& s, int seg) {
    return (s.points[seg + 1].position - s.points[seg].position).normalized();
  };
  const Vec3 da = seg_dir(a, c.param.segment);
  const Vec3 db = seg_dir(b, c.other_param.segment);
  const double angle = std::acos(std::min(1.0, std::abs(da.dot(db))));
  if (angle >= tangential_threshold) throw std::invalid_argument("crossing is not tangential");
  if (da.dot(db) >= 0) throw std::invalid_argument("separatrices travel in the same direction");

  Separatrix out;
  out.id = a.id;
  out.origin = a.origin;
  for (int k = 0; k <= c.param.segment; ++k) out.points.push_back(a.points[k]);
  for (int k = 0; k < c.param.segment; ++k) out.segment_triangle.push_back(a.segment_triangle[k]);
  SurfacePoint mid = a.points[c.param.segment];
  mid.position = c.position;
  out.points.push_back(mid);
  out.segment_triangle.push_back(a.segment_triangle[c.param.segment]);
  for (int k = c.other_param.segment; k >= 0; --k) {
    out.points.push_back(b.points[k]);
    out.segment_triangle.push_back(b.segment_triangle[k]);
  }
  for (const Crossing& x : a.crossings)
    if (x.param.value() < c.param.value()) out.crossings.push_back(x);
  out.termination = Termination::MergedHeteroclinic;
  out.end_other = b.id;
  return out;
}

}  // namespace quadcarve
