#include "quadcarve/cross_field.hpp"

#include "quadcarve/log.hpp"

#include <Eigen/SparseCholesky>

#include <deque>
#include <fmt/format.h>

namespace quadcarve {
namespace {

Complex transport_factor(const Surface& s, int from, int e) {
  // Carries a representation vector from `from` across edge e into the other node's basis.
  return std::polar(1.0, 4.0 * s.transport.directed(s.mesh, e, from));
}

Complex neighbour_average(const Surface& s, const std::vector<Complex>& u, int i) {
  Complex sum = 0.0;
  for (int e : s.mesh.node_edges(i)) {
    const int j = s.mesh.other_node(e, i);
    sum += transport_factor(s, j, e) * u[j];
  }
  return std::abs(sum) < 1e-14 ? Complex(1.0, 0.0) : sum / std::abs(sum);
}

using Solver = Eigen::SimplicialLDLT<SparseC>;

}  // namespace

SparseC DiffusionSystem::operator_matrix() const {
  SparseC a = laplacian;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseC::InnerIterator it(a, k); it; ++it) it.valueRef() /= area[it.row()];
  return a;
}

Eigen::VectorXcd DiffusionSystem::rhs() const { return boundary_term.cwiseQuotient(area.cast<Complex>()); }

DiffusionSystem assemble_system(const Surface& s) {
  const TriMesh& m = s.mesh;
  const int n = m.num_nodes();
  DiffusionSystem sys;
  sys.constrained.assign(n, 0);
  sys.dirichlet.assign(n, Complex(0.0, 0.0));
  for (int i = 0; i < n; ++i) {
    if (s.boundary.is_boundary[i]) {
      sys.constrained[i] = 1;
      sys.dirichlet[i] = s.boundary.value[i];
    }
  }
  if (!m.has_boundary()) {
    sys.pinned_node = 0;
    sys.constrained[0] = 1;
    sys.dirichlet[0] = Complex(1.0, 0.0);
  }
  sys.free_index.assign(n, -1);
  for (int i = 0; i < n; ++i) {
    if (sys.constrained[i]) continue;
    sys.free_index[i] = sys.num_free();
    sys.free_nodes.push_back(i);
  }
  const int nf = sys.num_free();

  sys.area = Eigen::VectorXd::Zero(nf);
  for (int r = 0; r < nf; ++r)
    for (int t : m.node_triangles(sys.free_nodes[r])) sys.area[r] += m.triangle_area(t);

  std::vector<Eigen::Triplet<Complex>> trip;
  sys.boundary_term = Eigen::VectorXcd::Zero(nf);
  for (int r = 0; r < nf; ++r) {
    const int i = sys.free_nodes[r];
    trip.emplace_back(r, r, Complex(-static_cast<double>(m.node_edges(i).size()), 0.0));
    for (int e : m.node_edges(i)) {
      const int j = m.other_node(e, i);
      const Complex q = transport_factor(s, j, e);
      if (sys.free_index[j] >= 0)
        trip.emplace_back(r, sys.free_index[j], q);
      else
        sys.boundary_term[r] += q * sys.dirichlet[j];
    }
  }
  sys.laplacian.resize(nf, nf);
  sys.laplacian.setFromTriplets(trip.begin(), trip.end());
  sys.laplacian.makeCompressed();

  // Every free component must touch a constrained node, otherwise -L is singular.
  std::vector<char> seen(nf, 0);
  for (int r0 = 0; r0 < nf; ++r0) {
    if (seen[r0]) continue;
    bool anchored = false;
    std::deque<int> q{r0};
    seen[r0] = 1;
    while (!q.empty()) {
      const int i = sys.free_nodes[q.front()];
      q.pop_front();
      for (int e : m.node_edges(i)) {
        const int j = m.other_node(e, i);
        const int rj = sys.free_index[j];
        if (rj < 0) {
          anchored = true;
        } else if (!seen[rj]) {
          seen[rj] = 1;
          q.push_back(rj);
        }
      }
    }
    if (!anchored)
      throw FieldError(fmt::format("singular system: free component containing node {} has no constrained node",
                                   sys.free_nodes[r0]));
  }
  return sys;
}

TimeStep estimate_time_step(const DiffusionSystem& sys, int max_iterations, double tolerance) {
  TimeStep ts;
  const int nf = sys.num_free();
  auto fallback = [&](const char* why) {
    ts.tau = nf > 0 ? sys.area.mean() / 4.0 : 1.0;
    ts.estimated = false;
    log::warn(fmt::format("time step estimation failed ({}); using mean one-ring area / 4 = {}", why, ts.tau));
    return ts;
  };
  if (nf == 0) return fallback("no free nodes");

  const SparseC neg = -sys.laplacian;
  Solver solver(neg);
  if (solver.info() != Eigen::Success) return fallback("factorization failed");
  const Eigen::VectorXcd mass = sys.area.cast<Complex>();

  Eigen::VectorXcd x = Eigen::VectorXcd::Ones(nf);
  double lambda = 0.0;
  for (int it = 1; it <= max_iterations; ++it) {
    Eigen::VectorXcd y = solver.solve(mass.cwiseProduct(x));
    const double norm = std::sqrt(std::real(y.dot(mass.cwiseProduct(y))));
    if (!(norm > 0.0) || !std::isfinite(norm)) return fallback("degenerate iterate");
    x = y / norm;
    const double next = std::real(x.dot(neg * x));  // x^H M x == 1
    ts.iterations = it;
    if (it > 1 && std::abs(next - lambda) <= tolerance * std::abs(next)) {
      lambda = next;
      ts.lambda = lambda;
      ts.tau = 1.0 / lambda;
      ts.estimated = true;
      return ts;
    }
    lambda = next;
  }
  return fallback("inverse power iteration did not converge");
}

CrossField solve_initial(const DiffusionSystem& sys, const Surface& s) {
  CrossField f;
  f.u = sys.dirichlet;
  const int nf = sys.num_free();
  if (nf == 0) return f;
  Solver solver(-sys.laplacian);
  if (solver.info() != Eigen::Success) throw FieldError("singular system: factorization of the Laplacian failed");
  const Eigen::VectorXcd x = solver.solve(sys.boundary_term);
  std::vector<int> zero;
  for (int r = 0; r < nf; ++r) {
    const int i = sys.free_nodes[r];
    const double mag = std::abs(x[r]);
    if (mag < 1e-14)
      zero.push_back(i);
    else
      f.u[i] = x[r] / mag;
  }
  for (int i : zero) f.u[i] = neighbour_average(s, f.u, i);
  return f;
}

DiffusionResult diffuse(const DiffusionSystem& sys, const CrossField& initial, double tau,
                        const DiffusionOptions& opt) {
  DiffusionResult res;
  res.field = initial;
  const int nf = sys.num_free();
  if (nf == 0) {
    res.converged = true;
    return res;
  }
  if (!(tau > 0.0)) throw FieldError("time step must be positive");
  SparseC mat = -tau * sys.laplacian;
  for (int r = 0; r < nf; ++r) mat.coeffRef(r, r) += sys.area[r];
  Solver solver(mat);
  if (solver.info() != Eigen::Success) throw FieldError("factorization of the diffusion operator failed");

  const Eigen::VectorXcd mass = sys.area.cast<Complex>();
  const Eigen::VectorXcd forcing = tau * sys.boundary_term;
  const double threshold = std::sqrt(2.0 * nf) * opt.delta_scale;
  Eigen::VectorXcd u(nf);
  for (int r = 0; r < nf; ++r) u[r] = initial.u[sys.free_nodes[r]];

  for (int it = 1; it <= opt.max_iterations; ++it) {
    Eigen::VectorXcd next = solver.solve(mass.cwiseProduct(u) + forcing);
    for (int r = 0; r < nf; ++r) {
      const double mag = std::abs(next[r]);
      next[r] = mag < 1e-14 ? u[r] : next[r] / mag;
    }
    res.last_change = (next - u).norm();
    u = next;
    res.iterations = it;
    if (res.last_change <= threshold) {
      res.converged = true;
      break;
    }
  }
  for (int r = 0; r < nf; ++r) res.field.u[sys.free_nodes[r]] = u[r];
  if (!res.converged)
    log::warn(fmt::format("diffusion hit the iteration cap ({}) with update norm {}", opt.max_iterations,
                          res.last_change));
  return res;
}

double dirichlet_energy(const Surface& s, const CrossField& f) {
  double energy = 0.0;
  for (int e = 0; e < s.mesh.num_edges(); ++e) {
    const int i = s.mesh.edge(e)[0], j = s.mesh.edge(e)[1];
    energy += std::norm(f.u[j] - std::polar(1.0, 4.0 * s.transport.phi[e]) * f.u[i]);
  }
  return 0.5 * energy;
}

CrossField compute_cross_field(const Surface& s, const FieldOptions& opt, FieldReport* report) {
  const DiffusionSystem sys = assemble_system(s);
  TimeStep ts;
  if (opt.tau) {
    ts.tau = *opt.tau;
    ts.estimated = true;
  } else {
    ts = estimate_time_step(sys);
  }
  const CrossField initial = solve_initial(sys, s);
  DiffusionResult res = diffuse(sys, initial, ts.tau, opt.diffusion);
  log::info(fmt::format("cross field: {} free nodes, tau {:.4g}, {} iterations{}", sys.num_free(), ts.tau,
                        res.iterations, res.converged ? "" : " (not converged)"));
  if (report) {
    report->time_step = ts;
    report->iterations = res.iterations;
    report->converged = res.converged;
    report->initial_energy = dirichlet_energy(s, initial);
    report->final_energy = dirichlet_energy(s, res.field);
  }
  return std::move(res.field);
}

}  // namespace quadcarve
