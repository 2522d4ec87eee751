#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "proxstair/errors.hpp"

namespace proxstair {

/// Conforming P1 triangulation. Triangles are counterclockwise; boundary
/// edges are exactly the edges incident to a single triangle.
struct TriMesh {
  std::vector<std::array<double, 2>> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::array<int, 2>> boundary_edges;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
};

enum class DomainKind { UnitSquare, LShape };

struct Domain {
  DomainKind kind = DomainKind::UnitSquare;
  int n = 4;  // subdivisions per unit length

  static Domain unit_square(int n) { return {DomainKind::UnitSquare, n}; }
  static Domain l_shape(int n) { return {DomainKind::LShape, n}; }
};

/// Stiffness (volume + Robin boundary term) and lumped mass.
struct FemMatrices {
  Eigen::SparseMatrix<double> K;
  Eigen::VectorXd M;  // diagonal, M_ii = integral of hat function i
};

struct MembraneConfig {
  double c = 1.0;                   // stiffness constant
  double f = 0.5;                   // constant force density
  std::optional<Eigen::VectorXd> f_nodal;  // overrides f when set
  double alpha = 10.0;              // boundary stiffness
  std::vector<double> thresholds;   // d_i >= 0, ascending
  std::vector<double> forces;       // w_i > 0
  double rho = 100.0;
  double tol = 1e-12;
  int max_iter = 10000;

  Eigen::VectorXd force_vector(int n_vertices) const;
};

struct AdmmReport {
  int iterations = 0;
  bool converged = false;
  bool exact_fixed_point = false;  // all three increments exactly zero
  double last_increment = 0.0;     // max of the three M-norm increments
  double energy_max_form = 0.0;
  double energy_abs_form = 0.0;
};

/// Thrown when the iteration cap is reached; carries the best iterate.
struct AdmmFailure : Error {
  Eigen::VectorXd best;
  AdmmReport report;

  AdmmFailure(const std::string& msg, Eigen::VectorXd z, AdmmReport rep)
      : Error(ErrorCode::NoConvergence, msg),
        best(std::move(z)),
        report(rep) {}
};

/// Structured right-triangle mesh of the unit square (n cells per side) or
/// of (0,1.1)^2 with the cell block above (0.6, 0.6) removed.
TriMesh generate_mesh(const Domain& domain);

/// K = sum over triangles of the P1 gradient stiffness scaled by c, plus
/// alpha * (edge length / 6) * [[2,1],[1,2]] per boundary edge.
Eigen::SparseMatrix<double> assemble_stiffness(const TriMesh& mesh, double c,
                                               double alpha);

/// M_ii = sum of area/3 over the triangles containing vertex i.
Eigen::VectorXd assemble_lumped_mass(const TriMesh& mesh);

/// (1/2) z'Kz - f'Mz + sum_i w_i 1'M max{z - d_i, 0}
double energy_max_form(const Eigen::VectorXd& z, const FemMatrices& mats,
                       const MembraneConfig& cfg);

/// Same energy written with coefficientwise absolute values, including the
/// constant that makes the two forms agree identically.
double energy_abs_form(const Eigen::VectorXd& z, const FemMatrices& mats,
                       const MembraneConfig& cfg);

/// Solves (K + rho M) z = M (f_mod + rho (y - mu)) by preconditioned
/// conjugate gradients (diagonal preconditioner M, relative residual 1e-10).
Eigen::VectorXd admm_z_update(const Eigen::VectorXd& y,
                              const Eigen::VectorXd& mu,
                              const FemMatrices& mats,
                              const MembraneConfig& cfg);

/// Componentwise multi-threshold prox with gamma = 1/(2 rho), evaluated at
/// z + mu; the lumped mass cancels.
Eigen::VectorXd admm_y_update(const Eigen::VectorXd& z,
                              const Eigen::VectorXd& mu,
                              const MembraneConfig& cfg);

/// Full ADMM loop from z = y = mu = 0. Stops when the largest M-norm
/// increment drops below cfg.tol, or at an exact fixed point.
std::pair<Eigen::VectorXd, AdmmReport> admm_solve(const FemMatrices& mats,
                                                  const MembraneConfig& cfg);

/// Minimum over admissible activity patterns s in [0,1] of
/// || K z - M f + M sum_i w_i s_i ||; a value near zero certifies global
/// optimality. Nodes with |z_j - d_i| <= class_tol keep s free.
double optimality_residual(const Eigen::VectorXd& z, const FemMatrices& mats,
                           const MembraneConfig& cfg, double class_tol);

}  // namespace proxstair
