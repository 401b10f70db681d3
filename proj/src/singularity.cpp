#include "quadcarve/singularity.hpp"

#include <fmt/format.h>

namespace quadcarve {

TriangleChart TriangleChart::of(const TriMesh& mesh, int t) {
  const auto& tri = mesh.triangle(t);
  TriangleChart c;
  c.origin = mesh.position(tri[0]);
  c.normal = mesh.triangle_normal(t);
  c.e1 = (mesh.position(tri[1]) - c.origin).normalized();
  c.e2 = c.normal.cross(c.e1);
  return c;
}

double matching(double theta_i, double theta_j, double phi_ij) {
  return positive_mod(theta_j - theta_i - phi_ij + kQuarterPi, kHalfPi) - kQuarterPi;
}

TriangleIndex triangle_index(const Surface& s, const CrossField& f, int t) {
  const auto& tri = s.mesh.triangle(t);
  double circulation = 0.0, defect = 0.0;
  for (int k = 0; k < 3; ++k) {
    const int i = tri[k], j = tri[(k + 1) % 3];
    const double phi = s.transport.between(s.mesh, i, j);
    circulation += matching(f.theta(i), f.theta(j), phi);
    defect += phi;
  }
  const double raw = (circulation + wrap_angle(defect)) / kTwoPi * 4.0;
  TriangleIndex out;
  out.quarters = static_cast<int>(std::lround(raw));
  out.residual = std::abs(raw - out.quarters);
  if (out.residual > 1e-6)
    throw FieldError(fmt::format("triangle {}: circulation is not a quarter multiple (residual {:.3g})", t,
                                 out.residual));
  return out;
}

double corner_cross_angle(const Surface& s, const CrossField& f, int t, int corner, const TriangleChart& chart) {
  const int n = s.mesh.triangle(t)[corner];
  const Vec3 dir = s.frames.direction(n, f.theta(n));
  const Vec3 rotated = minimal_rotation(s.frames.normal[n], chart.normal) * dir;
  return chart.angle_of(rotated);
}

std::vector<Singularity> detect_singularities(const Surface& s, const CrossField& f) {
  std::vector<Singularity> out;
  for (int t = 0; t < s.mesh.num_triangles(); ++t) {
    const int d = triangle_index(s, f, t).quarters;
    if (d == 0) continue;
    if (std::abs(d) >= 4)
      throw FieldError(fmt::format("triangle {}: pathological index {}/4", t, d));
    Singularity sing;
    sing.id = static_cast<int>(out.size());
    sing.triangle = t;
    sing.d = d;
    sing.location = s.mesh.barycenter(t);
    sing.chart = TriangleChart::of(s.mesh, t);

    // Reference ray from the barycenter through the lowest-indexed corner.
    const auto& tri = s.mesh.triangle(t);
    const int corner = static_cast<int>(std::min_element(tri.begin(), tri.end()) - tri.begin());
    const double ref = sing.chart.angle_of(s.mesh.position(tri[corner]) - sing.location);
    const double cross = corner_cross_angle(s, f, t, corner, sing.chart);
    const double rel = positive_mod(cross - ref + kQuarterPi, kHalfPi) - kQuarterPi;
    // Ports are the rays on which the local model field is radial.
    sing.alpha = wrap_angle(ref + 4.0 * rel / (4 - d));
    for (int k = 0; k < 4 - d; ++k) sing.ports.push_back(wrap_angle(sing.alpha + kTwoPi * k / (4 - d)));
    out.push_back(std::move(sing));
  }
  return out;
}

int total_index_quarters(const Surface& s, const CrossField& f) {
  int sum = s.boundary.index_sum_quarters();
  for (int t = 0; t < s.mesh.num_triangles(); ++t) sum += triangle_index(s, f, t).quarters;
  return sum;
}

}  // namespace quadcarve
