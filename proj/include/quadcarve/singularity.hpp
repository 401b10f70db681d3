#pragma once

#include "quadcarve/cross_field.hpp"

namespace quadcarve {

// Orthonormal 2D chart of a triangle: origin at corner 0, x-axis along edge 0.
struct TriangleChart {
  Vec3 origin;
  Vec3 normal;
  Vec3 e1;
  Vec3 e2;

  static TriangleChart of(const TriMesh& mesh, int t);
  Vec2 to_local(const Vec3& p) const { return {(p - origin).dot(e1), (p - origin).dot(e2)}; }
  Vec3 to_world(const Vec2& q) const { return origin + q.x() * e1 + q.y() * e2; }
  Vec3 direction(double angle) const { return std::cos(angle) * e1 + std::sin(angle) * e2; }
  double angle_of(const Vec3& v) const { return std::atan2(v.dot(e2), v.dot(e1)); }
};

// Principal matching: smallest rotation taking the transported cross at i onto
// the cross at j, in [-pi/4, pi/4).
double matching(double theta_i, double theta_j, double phi_ij);

struct TriangleIndex {
  int quarters = 0;  // index in units of 1/4
  double residual = 0.0;
};

// Throws FieldError when the holonomy-corrected circulation is not a quarter multiple.
TriangleIndex triangle_index(const Surface& surface, const CrossField& field, int t);

struct Singularity {
  int id = 0;
  int triangle = -1;
  int d = 0;  // index is d/4
  Vec3 location;
  TriangleChart chart;
  double alpha = 0.0;  // angle of port 0 in the triangle chart
  std::vector<double> ports;

  int num_ports() const { return 4 - d; }
  Vec3 port_direction(int k) const { return chart.direction(ports[k]); }
};

// One record per triangle with non-zero index, ordered by triangle id.
std::vector<Singularity> detect_singularities(const Surface& surface, const CrossField& field);

// Sum of all triangle indices plus the boundary indices, in quarters.
int total_index_quarters(const Surface& surface, const CrossField& field);

// Cross direction angles at a triangle corner rotated into the triangle chart.
double corner_cross_angle(const Surface& surface, const CrossField& field, int t, int corner,
                          const TriangleChart& chart);

}  // namespace quadcarve
