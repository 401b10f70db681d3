#pragma once

#include "quadcarve/singularity.hpp"

#include <optional>

namespace quadcarve {

struct TracerOptions {
  double heun_factor = 0.25;  // step = factor * mean edge length of the current triangle
  int rays = 64;              // predefined rays across the hyperbola quadrant
  double tangential_threshold = kPi / 8;
  int step_cap_factor = 50;  // steps per separatrix = factor * edge count
};

struct SurfacePoint {
  int triangle = -1;
  Vec3 bary = Vec3::Zero();
  Vec3 position = Vec3::Zero();
};

enum class Termination { None, BoundaryExit, RepeatCross, SingularTriangleTJunction, MergedHeteroclinic, StepCap };
const char* to_string(Termination t);

struct SeparatrixOrigin {
  enum class Kind { Singularity, BoundaryCorner };
  Kind kind = Kind::Singularity;
  int singularity = -1;  // Singularity::id
  int port = -1;         // port index, or fan index for corners
  int node = -1;         // mesh node for corners
};

// Position along a polyline: segment index plus fraction in [0, 1].
struct CurveParam {
  int segment = 0;
  double t = 0.0;
  double value() const { return segment + t; }
};

struct Crossing {
  int id = -1;  // shared by the two symmetric records
  int other = -1;
  CurveParam param;
  CurveParam other_param;
  Vec3 position;
  bool tangential = false;
  int ordinal = 0;  // 1 for the first crossing with `other`, 2 for the second, ...
};

struct Separatrix {
  int id = -1;
  SeparatrixOrigin origin;
  std::vector<SurfacePoint> points;
  std::vector<int> segment_triangle;  // triangle holding segment k = points[k] -> points[k+1]
  std::vector<Crossing> crossings;    // ordered along the curve
  Termination termination = Termination::None;
  int end_other = -1;  // separatrix hit by the endpoint (T-junctions, merges)
  CurveParam end_other_param;
  int end_edge = -1;  // boundary mesh edge for BoundaryExit
  bool tangential_exit = false;
  int steps = 0;

  int num_segments() const { return static_cast<int>(points.size()) - 1; }
  double length() const;
  Vec3 position_at(const CurveParam& p) const;
};

// ---- Regular triangles -----------------------------------------------------

// Linear interpolation of the representation-vector argument over each
// non-singular triangle, in the triangle chart.
class FieldInterpolator {
 public:
  FieldInterpolator(const Surface& surface, const CrossField& field);

  const TriangleChart& chart(int t) const { return charts_[t]; }
  // Representation angles 4 psi_k at the corners, unwrapped around the triangle.
  const std::array<double, 3>& corner_angles(int t) const { return rep_[t]; }
  Vec3 barycentric(int t, const Vec2& local) const;
  Vec2 local_corner(int t, int k) const { return corners_[t][k]; }
  // Branch angle (chart of t) closest to `reference`, evaluated at a local point.
  // Points outside the triangle are extrapolated linearly.
  double direction_angle(int t, const Vec2& local, double reference) const;

 private:
  std::vector<TriangleChart> charts_;
  std::vector<std::array<Vec2, 3>> corners_;
  std::vector<std::array<double, 3>> rep_;
};

// Direction of the followed branch at a barycentric point, as a 3D unit vector.
Vec3 interpolate_direction(const FieldInterpolator& interp, int t, const Vec3& bary, const Vec3& reference);

struct StepResult {
  enum class Event { None, Boundary, SingularEntry };
  Event event = Event::None;
  std::vector<SurfacePoint> points;  // new points after the start, one per edge crossing plus the end
  std::vector<int> segment_triangle;
  Vec3 direction;  // chord direction at the end, in the final triangle's plane
  int boundary_edge = -1;
};

// One Heun predictor-corrector step of length h. Edge crossings split the
// chord and unfold it into the neighbour; the walk stops at boundary edges and
// on entering a triangle listed in `singular` (indexed by triangle, may be empty).
StepResult heun_step(const TriMesh& mesh, const FieldInterpolator& interp, const SurfacePoint& start,
                     const Vec3& direction, double h, const std::vector<char>& singular = {});

// ---- Singular triangles ----------------------------------------------------

// Conformal coordinates of a point relative to a singularity at `center` of
// index d/4 whose hyperbolic domain starts at port angle `beta`.
struct ConformalPoint {
  double rho = 0.0;
  double phi = 0.0;  // in (0, pi/2) inside the domain
};
ConformalPoint to_conformal(const Vec2& center, int d, double beta, const Vec2& z);
Vec2 from_conformal(const Vec2& center, int d, double beta, const ConformalPoint& w);
// Point on the hyperbola xy = A at polar angle phi of the w-plane.
Vec2 hyperbola_point(const Vec2& center, int d, double beta, double A, double phi);
// Predefined ray angles in (0, pi/2); always contains pi/4.
std::vector<double> hyperbola_rays(int rays);

struct EntryFrame {
  int port = -1;  // port s0 opening the hyperbolic domain
  double rho = 0.0;
  double phi = 0.0;
  double A = 0.0;
  int sign = 1;  // +1: phi decreases along the traversal
};

// Frame of the streamline through `q` (chart coordinates of the singular
// triangle) that best matches the incoming direction angle.
EntryFrame singular_entry_frame(const Singularity& s, const Vec2& q, double incoming_angle);

struct HyperbolaArc {
  int singularity = -1;
  EntryFrame frame;
  double exponent = 0.0;  // (4 - d) / 8
  std::vector<Vec2> points;  // chart coordinates, entry first
  bool t_junction = false;  // stopped where it meets port frame.port + 1 at phi = pi/4
  int exit_edge = -1;       // local edge of the triangle (corner k -> k+1), -1 when stopped inside
  double exit_angle = 0.0;  // tangent at the exit, chart angle
};

// Samples the hyperbola through the entry on the shared rays, maps each sample
// back into the triangle and stops at the triangle boundary or at pi/4.
HyperbolaArc trace_singular_triangle(const Singularity& s, const std::array<Vec2, 3>& corners, const Vec2& q,
                                     double incoming_angle, int rays);

// ---- Separatrices ----------------------------------------------------------

struct TraceResult {
  std::vector<Separatrix> separatrices;
  int merges = 0;
  int tangential_same_direction = 0;
  int step_caps = 0;
};

TraceResult trace_separatrices(const Surface& surface, const CrossField& field,
                               const std::vector<Singularity>& singularities, const TracerOptions& options = {});

// Concatenation of two separatrices cut at a tangential, opposed crossing:
// `a` up to the crossing followed by `b` reversed from the crossing back to its origin.
// Throws std::invalid_argument for non-tangential or same-direction crossings.
Separatrix merge_opposite_tangential(const Separatrix& a, const Separatrix& b, const Crossing& crossing,
                                     double tangential_threshold = kPi / 8);

}  // namespace quadcarve
