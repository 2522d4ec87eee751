#include "proxstair/membrane.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "proxstair/box_qp.hpp"
#include "proxstair/prox.hpp"

namespace proxstair {

namespace {

/// Structured grid over [0, w] x [0, w] with m cells per side; cells whose
/// center satisfies keep() are split into two right triangles.
template <typename Keep>
TriMesh grid_mesh(double w, int m, Keep keep) {
  const double h = w / m;
  auto vid = [&](int i, int j) { return i * (m + 1) + j; };

  std::vector<int> used(static_cast<std::size_t>(m + 1) * (m + 1), -1);
  TriMesh mesh;
  std::map<std::pair<int, int>, int> edge_count;

  auto vertex = [&](int i, int j) {
    int& id = used[vid(i, j)];
    if (id < 0) {
      id = mesh.vertex_count();
      mesh.vertices.push_back({j * h, i * h});
    }
    return id;
  };
  auto add_tri = [&](int a, int b, int c) {
    mesh.triangles.push_back({a, b, c});
    for (auto [p, q] : {std::pair{a, b}, {b, c}, {c, a}})
      edge_count[{std::min(p, q), std::max(p, q)}]++;
  };

  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      double cx = (j + 0.5) * h, cy = (i + 0.5) * h;
      if (!keep(cx, cy)) continue;
      int v00 = vertex(i, j), v01 = vertex(i, j + 1);
      int v10 = vertex(i + 1, j), v11 = vertex(i + 1, j + 1);
      if ((i + j) % 2 == 0) {
        add_tri(v00, v01, v11);
        add_tri(v00, v11, v10);
      } else {
        // alternate the split so the triangulation has the full symmetry
        // of the square (for even n) and refinements stay nested
        add_tri(v00, v01, v10);
        add_tri(v01, v11, v10);
      }
    }
  }
  for (const auto& [edge, count] : edge_count)
    if (count == 1) mesh.boundary_edges.push_back({edge.first, edge.second});
  return mesh;
}

void pcg(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& precond,
         const Eigen::VectorXd& rhs, Eigen::VectorXd& x, double rel_tol,
         int max_iter) {
  const double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) {
    x.setZero(rhs.size());
    return;
  }
  x.setZero(rhs.size());
  Eigen::VectorXd r = rhs;
  Eigen::VectorXd z = r.cwiseQuotient(precond);
  Eigen::VectorXd p = z;
  double rz = r.dot(z);
  for (int it = 0; it < max_iter; ++it) {
    if (r.norm() <= rel_tol * rhs_norm) return;
    Eigen::VectorXd Ap = A * p;
    double pAp = p.dot(Ap);
    if (!(pAp > 0))
      throw Error(ErrorCode::LinearSolveFail, "pcg: matrix not positive definite");
    double alpha = rz / pAp;
    x += alpha * p;
    r -= alpha * Ap;
    z = r.cwiseQuotient(precond);
    double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  throw Error(ErrorCode::LinearSolveFail, "pcg: stagnation");
}

}  // namespace

TriMesh generate_mesh(const Domain& domain) {
  if (domain.n < 2) throw Error(ErrorCode::TooCoarse, "need n >= 2");
  if (domain.kind == DomainKind::UnitSquare)
    return grid_mesh(1.0, domain.n, [](double, double) { return true; });
  const int m = static_cast<int>(std::lround(1.1 * domain.n));
  return grid_mesh(1.1, m, [](double cx, double cy) {
    return !(cx > 0.6 && cy > 0.6);
  });
}

Eigen::SparseMatrix<double> assemble_stiffness(const TriMesh& mesh, double c,
                                               double alpha) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(9 * mesh.triangles.size() + 4 * mesh.boundary_edges.size());

  for (const auto& tri : mesh.triangles) {
    const auto& p0 = mesh.vertices[tri[0]];
    const auto& p1 = mesh.vertices[tri[1]];
    const auto& p2 = mesh.vertices[tri[2]];
    double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) -
                 (p2[0] - p0[0]) * (p1[1] - p0[1]);
    if (!(det > 0))
      throw Error(ErrorCode::DegenerateElement,
                  "triangle with nonpositive area");
    double area = 0.5 * det;
    // constant P1 gradients: grad_k = perp(opposite edge) / det
    double bx[3] = {p1[1] - p2[1], p2[1] - p0[1], p0[1] - p1[1]};
    double by[3] = {p2[0] - p1[0], p0[0] - p2[0], p1[0] - p0[0]};
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        double val = c * (bx[a] * bx[b] + by[a] * by[b]) / (4.0 * area);
        trips.emplace_back(tri[a], tri[b], val);
      }
  }

  if (alpha != 0.0) {
    for (const auto& be : mesh.boundary_edges) {
      const auto& pa = mesh.vertices[be[0]];
      const auto& pb = mesh.vertices[be[1]];
      double len = std::hypot(pb[0] - pa[0], pb[1] - pa[1]);
      double w = alpha * len / 6.0;
      trips.emplace_back(be[0], be[0], 2.0 * w);
      trips.emplace_back(be[1], be[1], 2.0 * w);
      trips.emplace_back(be[0], be[1], w);
      trips.emplace_back(be[1], be[0], w);
    }
  }

  Eigen::SparseMatrix<double> K(mesh.vertex_count(), mesh.vertex_count());
  K.setFromTriplets(trips.begin(), trips.end());
  return K;
}

Eigen::VectorXd assemble_lumped_mass(const TriMesh& mesh) {
  Eigen::VectorXd M = Eigen::VectorXd::Zero(mesh.vertex_count());
  for (const auto& tri : mesh.triangles) {
    const auto& p0 = mesh.vertices[tri[0]];
    const auto& p1 = mesh.vertices[tri[1]];
    const auto& p2 = mesh.vertices[tri[2]];
    double area = 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) -
                         (p2[0] - p0[0]) * (p1[1] - p0[1]));
    for (int a = 0; a < 3; ++a) M[tri[a]] += area / 3.0;
  }
  return M;
}

Eigen::VectorXd MembraneConfig::force_vector(int n_vertices) const {
  if (f_nodal) {
    if (f_nodal->size() != n_vertices)
      throw Error(ErrorCode::ShapeMismatch, "nodal force length mismatch");
    return *f_nodal;
  }
  return Eigen::VectorXd::Constant(n_vertices, f);
}

double energy_max_form(const Eigen::VectorXd& z, const FemMatrices& mats,
                       const MembraneConfig& cfg) {
  if (z.size() != mats.M.size())
    throw Error(ErrorCode::ShapeMismatch, "z length mismatch");
  Eigen::VectorXd fvec = cfg.force_vector(static_cast<int>(z.size()));
  double e = 0.5 * z.dot(mats.K * z) - fvec.dot(mats.M.cwiseProduct(z));
  for (std::size_t i = 0; i < cfg.thresholds.size(); ++i) {
    Eigen::VectorXd excess =
        (z.array() - cfg.thresholds[i]).max(0.0).matrix();
    e += cfg.forces[i] * mats.M.dot(excess);
  }
  return e;
}

double energy_abs_form(const Eigen::VectorXd& z, const FemMatrices& mats,
                       const MembraneConfig& cfg) {
  if (z.size() != mats.M.size())
    throw Error(ErrorCode::ShapeMismatch, "z length mismatch");
  Eigen::VectorXd fvec = cfg.force_vector(static_cast<int>(z.size()));
  double wsum = 0.0;
  for (double w : cfg.forces) wsum += w;
  Eigen::VectorXd f_mod = fvec.array() - 0.5 * wsum;
  double e = 0.5 * z.dot(mats.K * z) - f_mod.dot(mats.M.cwiseProduct(z));
  const double mass = mats.M.sum();
  for (std::size_t i = 0; i < cfg.thresholds.size(); ++i) {
    Eigen::VectorXd dev = (z.array() - cfg.thresholds[i]).abs().matrix();
    e += 0.5 * cfg.forces[i] * mats.M.dot(dev);
    // constant from 2 max{a, 0} = a + |a| applied nodewise
    e -= 0.5 * cfg.forces[i] * cfg.thresholds[i] * mass;
  }
  return e;
}

Eigen::VectorXd admm_z_update(const Eigen::VectorXd& y,
                              const Eigen::VectorXd& mu,
                              const FemMatrices& mats,
                              const MembraneConfig& cfg) {
  const auto n = mats.M.size();
  Eigen::VectorXd fvec = cfg.force_vector(static_cast<int>(n));
  double wsum = 0.0;
  for (double w : cfg.forces) wsum += w;
  Eigen::VectorXd f_mod = fvec.array() - 0.5 * wsum;

  Eigen::SparseMatrix<double> A = mats.K;
  Eigen::SparseMatrix<double> rhoM(n, n);
  std::vector<Eigen::Triplet<double>> diag;
  for (Eigen::Index i = 0; i < n; ++i) diag.emplace_back(i, i, cfg.rho * mats.M[i]);
  rhoM.setFromTriplets(diag.begin(), diag.end());
  A += rhoM;

  Eigen::VectorXd rhs = mats.M.cwiseProduct(f_mod + cfg.rho * (y - mu));
  Eigen::VectorXd z;
  pcg(A, mats.M, rhs, z, 1e-10, 10000);
  return z;
}

Eigen::VectorXd admm_y_update(const Eigen::VectorXd& z,
                              const Eigen::VectorXd& mu,
                              const MembraneConfig& cfg) {
  Eigen::VectorXd target = z + mu;
  const std::size_t L = cfg.thresholds.size();
  if (L == 0) return target;

  ProxBatch batch;
  batch.rows = static_cast<std::size_t>(target.size());
  batch.width = L;
  batch.gamma.assign(batch.rows, 1.0 / (2.0 * cfg.rho));
  batch.x.assign(target.data(), target.data() + target.size());
  batch.data.resize(batch.rows * L);
  batch.weights.resize(batch.rows * L);
  for (std::size_t r = 0; r < batch.rows; ++r)
    for (std::size_t i = 0; i < L; ++i) {
      batch.data[r * L + i] = cfg.thresholds[i];
      batch.weights[r * L + i] = cfg.forces[i];
    }

  std::vector<double> y = prox_batch(batch);
  return Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
}

std::pair<Eigen::VectorXd, AdmmReport> admm_solve(const FemMatrices& mats,
                                                  const MembraneConfig& cfg) {
  if (!(cfg.rho > 0)) throw Error(ErrorCode::InvalidArgument, "rho must be positive");
  if (cfg.thresholds.size() != cfg.forces.size())
    throw Error(ErrorCode::ShapeMismatch, "thresholds/forces length mismatch");

  const auto n = mats.M.size();
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);

  auto m_norm = [&](const Eigen::VectorXd& v) {
    return std::sqrt(mats.M.dot(v.cwiseProduct(v)));
  };

  AdmmReport rep;
  for (int k = 0; k < cfg.max_iter; ++k) {
    Eigen::VectorXd z_next = admm_z_update(y, mu, mats, cfg);
    Eigen::VectorXd y_next = admm_y_update(z_next, mu, cfg);
    Eigen::VectorXd mu_next = mu + z_next - y_next;

    bool exact = (z_next == z) && (y_next == y) && (mu_next == mu);
    double inc = std::max({m_norm(z_next - z), m_norm(y_next - y),
                           m_norm(mu_next - mu)});
    z = std::move(z_next);
    y = std::move(y_next);
    mu = std::move(mu_next);
    rep.iterations = k + 1;
    rep.last_increment = inc;
    if (exact || inc <= cfg.tol) {
      rep.converged = true;
      rep.exact_fixed_point = exact;
      break;
    }
  }
  rep.energy_max_form = energy_max_form(z, mats, cfg);
  rep.energy_abs_form = energy_abs_form(z, mats, cfg);
  if (!rep.converged)
    throw AdmmFailure("admm: increment " + std::to_string(rep.last_increment) +
                          " after " + std::to_string(rep.iterations) +
                          " iterations",
                      std::move(z), rep);
  return {std::move(z), rep};
}

double optimality_residual(const Eigen::VectorXd& z, const FemMatrices& mats,
                           const MembraneConfig& cfg, double class_tol) {
  const auto n = mats.M.size();
  Eigen::VectorXd fvec = cfg.force_vector(static_cast<int>(n));
  Eigen::VectorXd r0 = mats.K * z - mats.M.cwiseProduct(fvec);

  std::vector<Eigen::Triplet<double>> trips;
  Eigen::Index free_count = 0;
  for (std::size_t i = 0; i < cfg.thresholds.size(); ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double dev = z[j] - cfg.thresholds[i];
      if (dev > class_tol) {
        r0[j] += cfg.forces[i] * mats.M[j];
      } else if (std::abs(dev) <= class_tol) {
        trips.emplace_back(j, free_count++, cfg.forces[i] * mats.M[j]);
      }
    }
  }
  if (free_count == 0) return r0.norm();

  BoxLsq p;
  p.A.resize(n, free_count);
  p.A.setFromTriplets(trips.begin(), trips.end());
  p.g = r0;
  p.lower = Eigen::VectorXd::Zero(free_count);
  p.upper = Eigen::VectorXd::Ones(free_count);
  BoxLsqSolution sol = solve_box_lsq(p, 1e-10 * std::max(1.0, r0.norm()), 200000);
  return sol.residual.norm();
}

}  // namespace proxstair
