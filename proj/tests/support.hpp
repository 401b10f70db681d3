#pragma once

#include "quadcarve/simplifier.hpp"
#include "quadcarve/tracer.hpp"

#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace qt {

using namespace quadcarve;

std::filesystem::path fixture(const std::string& name);
Surface load_fixture(const std::string& name);

// ---- planar sketches -------------------------------------------------------

// Nodes are placed by position; each curve gets a mark wherever a node lies on
// its polyline. The first curve is the outer boundary (closed, CCW).
struct Sketch {
  std::vector<LayoutNode> nodes;
  std::vector<LayoutCurve> curves;

  int corner(double x, double y, int index_quarters = 1);
  int exit(double x, double y);
  int interior(double x, double y, NodeKind kind = NodeKind::Crossing);
  int singular(double x, double y, int d, int id);
  void boundary(std::vector<Vec2> loop);
  void curve(std::vector<Vec2> poly);
  TLayout build() const;
};

// Axis-aligned rectangle [0,xs.back()] x [0,ys.back()] cut by full lines at the
// interior coordinates of xs and ys.
TLayout grid_layout(const std::vector<double>& xs, const std::vector<double>& ys);

// Random guillotine subdivision of [0,w] x [0,h] with `cuts` wall-to-wall splits.
TLayout guillotine_layout(std::mt19937& rng, int cuts, double w = 4.0, double h = 3.0);

// Lens-shaped domain with two convex tips and two +1/4 singularities at (-1,0)
// and (1,w). For w > 0 their separatrices pass each other and bound the zip
// quad [-1,1] x [0,w]; w = 0 joins them by a single separatrix.
TLayout lens_layout(double w);

// ---- oracles ---------------------------------------------------------------

// Smallest eigenvalue of -M^-1 L via a dense Hermitian eigensolve.
double dense_smallest_eigenvalue(const DiffusionSystem& sys);

// Harmonic extension on a flat mesh in global coordinates: uniform-weight
// scalar Laplace for u = exp(4i angle), then converted to each node's basis.
// Not normalized, so callers can tell where the field vanishes.
std::vector<Complex> flat_harmonic_oracle(const Surface& s);

// RK4 streamline of the cross field exp(i (d (theta - beta)/4 + beta)) around
// the origin, started along the branch nearest `initial_angle`.
std::vector<Vec2> rk4_streamline(int d, double beta, const Vec2& start, double initial_angle, double step,
                                 int steps);

// Distance from p to a polyline.
double polyline_distance(const std::vector<Vec2>& poly, const Vec2& p);

// Triangle and barycentric position of a point on a planar mesh.
SurfacePoint locate(const Surface& s, const Vec3& p);

// Deviation (relative to r0) of the hyperbola through r0 * exp(i(beta + phi0/e))
// from the RK4 streamline, over a phi range of 0.25 in direction `sign`.
double hyperbola_deviation(int d, double beta, double phi0, double r0, double sign);

// Field with u = exp(4i a(p)) in global coordinates, expressed per node.
CrossField global_field(const Surface& s, const std::function<double(const Vec3&)>& angle);

// Max distance from the start line of a Heun trace in a constant field on a
// planar mesh, traced until the boundary.
double straight_line_deviation(const Surface& s, double angle, const Vec3& start);

// Radius change after one revolution of a circular field around the mesh centroid.
double circular_drift(const Surface& s);

// Empty when `after` is a legal successor of `before` under one collapse.
std::string collapse_violation(const TLayout& before, const TLayout& after);

// Independent checks of the layout invariants.
int count_interior_degree3(const TLayout& l);
int count_quad_faces(const TLayout& l);

}  // namespace qt
