#include "support.hpp"

#include "quadcarve/mesh_io.hpp"

#include <Eigen/Dense>

#include <algorithm>

namespace qt {

std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(QUADCARVE_FIXTURE_DIR) / name; }

Surface load_fixture(const std::string& name) { return Surface::prepare(load_mesh(fixture(name))); }

// ---- sketches --------------------------------------------------------------

namespace {

Vec3 lift(const Vec2& p) { return {p.x(), p.y(), 0.0}; }

LayoutNode make_node(NodeKind kind, double x, double y) {
  LayoutNode n;
  n.kind = kind;
  n.position = {x, y, 0.0};
  n.normal = Vec3::UnitZ();
  return n;
}

}  // namespace

int Sketch::corner(double x, double y, int index_quarters) {
  LayoutNode n = make_node(NodeKind::BoundaryCorner, x, y);
  n.index_quarters = index_quarters;
  n.on_boundary = true;
  nodes.push_back(n);
  return static_cast<int>(nodes.size()) - 1;
}

int Sketch::exit(double x, double y) {
  LayoutNode n = make_node(NodeKind::BoundaryExit, x, y);
  n.on_boundary = true;
  nodes.push_back(n);
  return static_cast<int>(nodes.size()) - 1;
}

int Sketch::interior(double x, double y, NodeKind kind) {
  nodes.push_back(make_node(kind, x, y));
  return static_cast<int>(nodes.size()) - 1;
}

int Sketch::singular(double x, double y, int d, int id) {
  LayoutNode n = make_node(NodeKind::Singularity, x, y);
  n.index_quarters = d;
  n.singularity = id;
  nodes.push_back(n);
  return static_cast<int>(nodes.size()) - 1;
}

void Sketch::boundary(std::vector<Vec2> loop) {
  LayoutCurve c;
  for (const Vec2& p : loop) c.polyline.push_back(lift(p));
  c.boundary = true;
  c.closed = true;
  c.parent = -1;
  curves.insert(curves.begin(), std::move(c));
}

void Sketch::curve(std::vector<Vec2> poly) {
  LayoutCurve c;
  for (const Vec2& p : poly) c.polyline.push_back(lift(p));
  c.parent = static_cast<int>(curves.size());
  curves.push_back(std::move(c));
}

TLayout Sketch::build() const {
  std::vector<LayoutCurve> cs = curves;
  for (auto& c : cs) {
    std::vector<Vec3> poly = c.polyline;
    if (c.closed) poly.push_back(poly.front());
    for (int v = 0; v < static_cast<int>(nodes.size()); ++v) {
      const Vec3& p = nodes[v].position;
      for (std::size_t k = 0; k + 1 < poly.size(); ++k) {
        const Vec3 a = poly[k], d = poly[k + 1] - a;
        const double t = std::clamp((p - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
        if ((a + t * d - p).norm() < 1e-9) {
          c.marks.emplace_back(k + t, v);
          break;
        }
      }
    }
  }
  return build_layout(nodes, cs, 1, 1);
}

TLayout grid_layout(const std::vector<double>& xs, const std::vector<double>& ys) {
  Sketch s;
  const double W = xs.back(), H = ys.back();
  s.corner(0, 0);
  s.corner(W, 0);
  s.corner(W, H);
  s.corner(0, H);
  s.boundary({{0, 0}, {W, 0}, {W, H}, {0, H}});
  for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
    s.exit(xs[i], 0);
    s.exit(xs[i], H);
    s.curve({{xs[i], 0}, {xs[i], H}});
  }
  for (std::size_t j = 1; j + 1 < ys.size(); ++j) {
    s.exit(0, ys[j]);
    s.exit(W, ys[j]);
    s.curve({{0, ys[j]}, {W, ys[j]}});
  }
  for (std::size_t i = 1; i + 1 < xs.size(); ++i)
    for (std::size_t j = 1; j + 1 < ys.size(); ++j) s.interior(xs[i], ys[j]);
  return s.build();
}

TLayout guillotine_layout(std::mt19937& rng, int cuts, double W, double H) {
  struct Rect {
    double x0, y0, x1, y1;
  };
  Sketch s;
  s.corner(0, 0);
  s.corner(W, 0);
  s.corner(W, H);
  s.corner(0, H);
  s.boundary({{0, 0}, {W, 0}, {W, H}, {0, H}});
  std::vector<Rect> rects{{0, 0, W, H}};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto end_node = [&](double x, double y) {
    const bool on_boundary = x == 0 || y == 0 || x == W || y == H;
    if (on_boundary) s.exit(x, y);
    else s.interior(x, y, NodeKind::TJunction);
  };
  for (int c = 0; c < cuts; ++c) {
    const std::size_t k = std::uniform_int_distribution<std::size_t>(0, rects.size() - 1)(rng);
    const Rect r = rects[k];
    const bool vertical = unit(rng) < (r.x1 - r.x0) / ((r.x1 - r.x0) + (r.y1 - r.y0));
    const double f = unit(rng) < 0.25 ? 0.03 + 0.05 * unit(rng) : 0.15 + 0.7 * unit(rng);
    if (vertical) {
      const double x = r.x0 + f * (r.x1 - r.x0);
      end_node(x, r.y0);
      end_node(x, r.y1);
      s.curve({{x, r.y0}, {x, r.y1}});
      rects[k] = {r.x0, r.y0, x, r.y1};
      rects.push_back({x, r.y0, r.x1, r.y1});
    } else {
      const double y = r.y0 + f * (r.y1 - r.y0);
      end_node(r.x0, y);
      end_node(r.x1, y);
      s.curve({{r.x0, y}, {r.x1, y}});
      rects[k] = {r.x0, r.y0, r.x1, y};
      rects.push_back({r.x0, y, r.x1, r.y1});
    }
  }
  return s.build();
}

namespace {

// Lens arcs: circles of radius 7.5 through (+-6, 0).
double upper_arc(double x) { return -4.5 + std::sqrt(56.25 - x * x); }
double lower_arc(double x) { return 4.5 - std::sqrt(56.25 - x * x); }

// First hit of the ray p + t d with the circle |q - c| = 7.5.
Vec2 ray_to_circle(const Vec2& p, const Vec2& d, const Vec2& c) {
  const Vec2 m = p - c;
  const double b = m.dot(d), cc = m.squaredNorm() - 56.25;
  return p + (-b + std::sqrt(b * b - cc)) * d;
}

}  // namespace

TLayout lens_layout(double w) {
  Sketch s;
  const Vec2 up_c(0, -4.5), lo_c(0, 4.5);
  auto dir = [](double deg) { return Vec2(std::cos(deg * kPi / 180), std::sin(deg * kPi / 180)); };
  const Vec2 s1(-1, 0), s2(1, w);
  s.singular(s1.x(), s1.y(), 1, 0);
  s.singular(s2.x(), s2.y(), 1, 1);
  s.corner(-6, 0);
  s.corner(6, 0);

  std::vector<Vec2> exits;
  std::vector<std::vector<Vec2>> polys;
  auto sep = [&](std::vector<Vec2> p) {
    exits.push_back(p.back());
    polys.push_back(std::move(p));
  };
  sep({s1, {-1, upper_arc(-1)}});
  sep({s1, ray_to_circle(s1, dir(225), lo_c)});
  sep({s2, {1, lower_arc(1)}});
  sep({s2, ray_to_circle(s2, dir(60), up_c)});
  if (w > 0) {
    sep({s1, {1, 0}, {3, 0}, {4.5, upper_arc(4.5)}});
    sep({s2, {-1, w}, {-3, w}, {-4.5, lower_arc(-4.5)}});
    s.interior(1, 0);
    s.interior(-1, w);
  } else {
    polys.push_back({s1, s2});
  }
  for (const Vec2& e : exits) s.exit(e.x(), e.y());

  // Boundary: lower arc left to right, upper arc right to left, with every
  // exit on a polyline vertex.
  std::vector<double> lo{-6, 6}, up{-6, 6};
  for (int k = 1; k < 48; ++k) {
    lo.push_back(-6 + 12.0 * k / 48);
    up.push_back(-6 + 12.0 * k / 48);
  }
  for (const Vec2& e : exits) (e.y() < 0 ? lo : up).push_back(e.x());
  std::sort(lo.begin(), lo.end());
  std::sort(up.begin(), up.end(), std::greater<>());
  auto close = [](double a, double b) { return std::abs(a - b) < 1e-12; };
  lo.erase(std::unique(lo.begin(), lo.end(), close), lo.end());
  up.erase(std::unique(up.begin(), up.end(), close), up.end());
  std::vector<Vec2> loop;
  for (double x : lo) loop.push_back({x, std::abs(x) == 6 ? 0.0 : lower_arc(x)});
  for (std::size_t k = 1; k + 1 < up.size(); ++k) loop.push_back({up[k], upper_arc(up[k])});
  s.boundary(std::move(loop));
  for (auto& p : polys) s.curve(std::move(p));
  return s.build();
}

// ---- oracles ---------------------------------------------------------------

double dense_smallest_eigenvalue(const DiffusionSystem& sys) {
  Eigen::MatrixXcd H = -Eigen::MatrixXcd(sys.laplacian);
  Eigen::VectorXd s = sys.area.cwiseSqrt().cwiseInverse();
  H = s.asDiagonal() * H * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

std::vector<Complex> flat_harmonic_oracle(const Surface& s) {
  const TriMesh& m = s.mesh;
  const int n = m.num_nodes();
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n, n);
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (s.boundary.is_boundary[i]) {
      const Vec3& e1 = s.frames.basis1[i];
      A(i, i) = 1.0;
      b(i) = s.boundary.value[i] * std::polar(1.0, 4.0 * std::atan2(e1.y(), e1.x()));
      continue;
    }
    for (int e : m.node_edges(i)) {
      A(i, i) -= 1.0;
      A(i, m.other_node(e, i)) += 1.0;
    }
  }
  const Eigen::VectorXcd g = A.partialPivLu().solve(b);
  std::vector<Complex> u(n);
  for (int i = 0; i < n; ++i) {
    const Vec3& e1 = s.frames.basis1[i];
    u[i] = g(i) * std::polar(1.0, -4.0 * std::atan2(e1.y(), e1.x()));
  }
  return u;
}

std::vector<Vec2> rk4_streamline(int d, double beta, const Vec2& start, double initial_angle, double step,
                                 int steps) {
  double ref = initial_angle;
  auto f = [&](const Vec2& z) {
    const double th = std::atan2(z.y(), z.x());
    double psi = d * (th - beta) / 4.0 + beta;
    psi += kHalfPi * std::round(wrap_angle(ref - psi) / kHalfPi);
    return Vec2(std::cos(psi), std::sin(psi));
  };
  std::vector<Vec2> out{start};
  Vec2 z = start;
  for (int k = 0; k < steps; ++k) {
    const Vec2 k1 = f(z);
    const Vec2 k2 = f(z + 0.5 * step * k1);
    const Vec2 k3 = f(z + 0.5 * step * k2);
    const Vec2 k4 = f(z + step * k3);
    const Vec2 dz = (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
    z += step * dz;
    ref = std::atan2(dz.y(), dz.x());
    out.push_back(z);
  }
  return out;
}

double polyline_distance(const std::vector<Vec2>& poly, const Vec2& p) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < poly.size(); ++k) {
    const Vec2 a = poly[k], d = poly[k + 1] - a;
    const double t = std::clamp((p - a).dot(d) / std::max(d.squaredNorm(), 1e-300), 0.0, 1.0);
    best = std::min(best, (a + t * d - p).norm());
  }
  return best;
}

SurfacePoint locate(const Surface& s, const Vec3& p) {
  const TriMesh& m = s.mesh;
  SurfacePoint best;
  double best_min = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangle(t);
    const Vec3 a = m.position(tri[0]), b = m.position(tri[1]), c = m.position(tri[2]);
    const double area = (b - a).cross(c - a).z();
    const Vec3 bary((b - p).cross(c - p).z() / area, (c - p).cross(a - p).z() / area,
                    (a - p).cross(b - p).z() / area);
    if (bary.minCoeff() > best_min) {
      best_min = bary.minCoeff();
      best = SurfacePoint{t, bary, p};
    }
  }
  return best;
}

double hyperbola_deviation(int d, double beta, double phi0, double r0, double sign) {
  const double e = (4 - d) / 8.0;
  const Vec2 z0 = r0 * Vec2(std::cos(beta + phi0 / e), std::sin(beta + phi0 / e));
  const double rho = std::pow(r0, e);
  const double A = rho * rho * std::sin(phi0) * std::cos(phi0);
  std::vector<Vec2> arc;
  for (int j = 0; j <= 200; ++j) arc.push_back(hyperbola_point(Vec2::Zero(), d, beta, A, phi0 + sign * 0.25 * j / 200));
  double length = 0;
  for (std::size_t k = 1; k < arc.size(); ++k) length += (arc[k] - arc[k - 1]).norm();
  const Vec2 t0 = (arc[1] - arc[0]).normalized();
  const double step = 1e-5 * r0;
  const auto rk = rk4_streamline(d, beta, z0, std::atan2(t0.y(), t0.x()), step, static_cast<int>(1.02 * length / step) + 10);
  // Walk both curves forward together.
  double worst = (arc[0] - z0).norm();
  std::size_t j = 0;
  for (const Vec2& p : arc) {
    while (j + 1 < rk.size() && (rk[j + 1] - p).norm() <= (rk[j] - p).norm()) ++j;
    const std::size_t lo = j > 0 ? j - 1 : 0, hi = std::min(rk.size(), j + 2);
    worst = std::max(worst, polyline_distance(std::vector<Vec2>(rk.begin() + lo, rk.begin() + hi), p));
  }
  return worst / r0;
}

CrossField global_field(const Surface& s, const std::function<double(const Vec3&)>& angle) {
  CrossField f;
  for (int v = 0; v < s.mesh.num_nodes(); ++v) {
    const Vec3& e1 = s.frames.basis1[v];
    f.u.push_back(std::polar(1.0, 4.0 * (angle(s.mesh.position(v)) - std::atan2(e1.y(), e1.x()))));
  }
  return f;
}

double straight_line_deviation(const Surface& s, double angle, const Vec3& start) {
  const CrossField f = global_field(s, [&](const Vec3&) { return angle; });
  const FieldInterpolator interp(s, f);
  const Vec3 dir(std::cos(angle), std::sin(angle), 0.0);
  SurfacePoint cur = locate(s, start);
  Vec3 d = dir;
  const double h = 0.25 * s.mesh.mean_edge_length();
  double worst = 0;
  for (int steps = 0; steps < 100000; ++steps) {
    const StepResult st = heun_step(s.mesh, interp, cur, d, h);
    for (const auto& p : st.points) worst = std::max(worst, std::abs(dir.cross(p.position - start).z()));
    if (st.event == StepResult::Event::Boundary) return worst;
    cur = st.points.back();
    d = st.direction;
  }
  return std::numeric_limits<double>::infinity();
}

double circular_drift(const Surface& s) {
  Vec3 c = Vec3::Zero(), lo = s.mesh.position(0), hi = lo;
  for (const Vec3& p : s.mesh.positions()) {
    c += p;
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  c /= s.mesh.num_nodes();
  const CrossField f = global_field(s, [&](const Vec3& p) { return std::atan2(p.y() - c.y(), p.x() - c.x()) + kHalfPi; });
  const FieldInterpolator interp(s, f);
  const double r0 = 0.4 * (hi.x() - lo.x());
  SurfacePoint cur = locate(s, c + Vec3(r0, 0, 0));
  Vec3 d = Vec3::UnitY();
  const double h = s.mesh.mean_edge_length() / 10;
  double turned = 0, prev_angle = 0, prev_r = r0;
  for (int k = 0; k < 1000000; ++k) {
    const StepResult st = heun_step(s.mesh, interp, cur, d, h);
    if (st.event != StepResult::Event::None) break;
    for (const auto& p : st.points) {
      const Vec3 q = p.position - c;
      const double a = std::atan2(q.y(), q.x());
      const double da = wrap_angle(a - prev_angle);
      const double r = std::hypot(q.x(), q.y());
      if (turned + da >= kTwoPi) return std::abs(prev_r + (kTwoPi - turned) / da * (r - prev_r) - r0);
      turned += da;
      prev_angle = a;
      prev_r = r;
    }
    cur = st.points.back();
    d = st.direction;
  }
  return std::numeric_limits<double>::infinity();
}

std::string collapse_violation(const TLayout& before, const TLayout& after) {
  if (!after.valid()) return "invalid layout: " + after.problems().front();
  if (after.num_components() >= before.num_components()) return "component count did not decrease";
  if (after.num_components() <= 0) return "no components left";
  if (after.t_junction_count() > before.t_junction_count() ||
      count_interior_degree3(after) > count_interior_degree3(before))
    return "T-junction count increased";
  if (after.singularity_multiset() != before.singularity_multiset()) return "singularities changed";
  if (count_quad_faces(after) != after.num_components()) return "face is not 4-sided";
  if (!after.euler_ok()) return "Euler formula violated";
  return {};
}

int count_interior_degree3(const TLayout& l) {
  int n = 0;
  for (int v = 0; v < l.num_nodes(); ++v)
    if (!l.node(v).on_boundary && l.node(v).kind != NodeKind::Singularity && l.degree(v) == 3) ++n;
  return n;
}

int count_quad_faces(const TLayout& l) {
  int n = 0;
  for (const auto& f : l.faces()) {
    if (f.hole) continue;
    const auto ones = std::count(f.quarters.begin(), f.quarters.end(), 1);
    const bool ok = std::all_of(f.quarters.begin(), f.quarters.end(), [](int q) { return q == 1 || q == 2; });
    if (ok && ones == 4) ++n;
  }
  return n;
}

}  // namespace qt
