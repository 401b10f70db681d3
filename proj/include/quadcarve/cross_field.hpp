#pragma once

#include "quadcarve/mesh.hpp"

#include <Eigen/SparseCore>

#include <optional>
#include <stdexcept>

namespace quadcarve {

class FieldError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Representation vectors u_i = c_i^4, one unit complex number per node in the
// node's tangent basis.
struct CrossField {
  std::vector<Complex> u;

  int size() const { return static_cast<int>(u.size()); }
  // Angle of one cross direction, arg(u)/4.
  double theta(int node) const { return std::arg(u[node]) / 4.0; }
};

using SparseC = Eigen::SparseMatrix<Complex>;

// Connection Laplacian restricted to the free nodes. The diffusion operator is
// A = M^-1 L with M the diagonal of one-ring areas; L is Hermitian negative
// semi-definite with L_ii = -deg(i), L_ij = exp(-4i phi_ij).
struct DiffusionSystem {
  std::vector<int> free_index;  // node -> row, or -1 for constrained nodes
  std::vector<int> free_nodes;  // row -> node
  std::vector<char> constrained;
  std::vector<Complex> dirichlet;  // value on constrained nodes, 0 elsewhere
  SparseC laplacian;               // L over free nodes
  Eigen::VectorXcd boundary_term;  // sum over constrained neighbours of exp(-4i phi_ij) g_j
  Eigen::VectorXd area;            // one-ring area per free node
  int pinned_node = -1;            // set on closed surfaces

  int num_free() const { return static_cast<int>(free_nodes.size()); }
  SparseC operator_matrix() const;  // A = M^-1 L
  Eigen::VectorXcd rhs() const;     // b = M^-1 boundary_term
};

DiffusionSystem assemble_system(const Surface& surface);

struct TimeStep {
  double tau = 0.0;
  double lambda = 0.0;  // smallest magnitude eigenvalue of -A
  int iterations = 0;
  bool estimated = false;  // false when the fallback heuristic was used
};

TimeStep estimate_time_step(const DiffusionSystem& system, int max_iterations = 500, double tolerance = 1e-8);

// Harmonic extension of the Dirichlet data followed by pointwise normalization.
CrossField solve_initial(const DiffusionSystem& system, const Surface& surface);

struct DiffusionOptions {
  double delta_scale = 1e-6;
  int max_iterations = 10000;
};

struct DiffusionResult {
  CrossField field;
  int iterations = 0;
  bool converged = false;
  double last_change = 0.0;
};

// Backward-Euler diffusion with pointwise renormalization until the update norm
// drops below sqrt(2n) * delta_scale.
DiffusionResult diffuse(const DiffusionSystem& system, const CrossField& initial, double tau,
                        const DiffusionOptions& options = {});

// 1/2 sum over edges |u_j - exp(4i phi_ij) u_i|^2.
double dirichlet_energy(const Surface& surface, const CrossField& field);

struct FieldOptions {
  std::optional<double> tau;
  DiffusionOptions diffusion;
};

struct FieldReport {
  TimeStep time_step;
  int iterations = 0;
  bool converged = false;
  double initial_energy = 0.0;
  double final_energy = 0.0;
};

CrossField compute_cross_field(const Surface& surface, const FieldOptions& options = {}, FieldReport* report = nullptr);

}  // namespace quadcarve
