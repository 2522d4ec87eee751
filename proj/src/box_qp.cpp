#include "proxstair/box_qp.hpp"

#include <cmath>

namespace proxstair {

namespace {

Eigen::VectorXd clip(const Eigen::VectorXd& v, const BoxLsq& p) {
  return v.cwiseMax(p.lower).cwiseMin(p.upper);
}

double lipschitz_estimate(const Eigen::SparseMatrix<double>& A) {
  const Eigen::Index n = A.cols();
  if (n == 0 || A.nonZeros() == 0) return 1.0;
  // deterministic start vector
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = std::cos(1.0 + 0.7 * double(i));
  v.normalize();
  double lambda = 1.0;
  for (int it = 0; it < 40; ++it) {
    Eigen::VectorXd w = A.transpose() * (A * v);
    double norm = w.norm();
    if (norm == 0.0) return 1.0;
    lambda = norm;
    v = w / norm;
  }
  return 1.01 * lambda;
}

}  // namespace

BoxLsqSolution solve_box_lsq(const BoxLsq& p, double tol, int max_iter,
                             const Eigen::VectorXd* warm_start) {
  const Eigen::Index n = p.A.cols();
  if (p.lower.size() != n || p.upper.size() != n || p.g.size() != p.A.rows())
    throw Error(ErrorCode::ShapeMismatch, "box lsq dimensions inconsistent");
  if (((p.upper - p.lower).array() < 0).any())
    throw Error(ErrorCode::BadBounds, "lower bound exceeds upper bound");
  if (!(tol > 0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");

  const double L = lipschitz_estimate(p.A);
  const double step = 1.0 / L;

  auto grad = [&](const Eigen::VectorXd& s) -> Eigen::VectorXd {
    return p.A.transpose() * (p.g + p.A * s);
  };
  auto value = [&](const Eigen::VectorXd& s) {
    return 0.5 * (p.g + p.A * s).squaredNorm();
  };

  Eigen::VectorXd s = warm_start && warm_start->size() == n
                          ? clip(*warm_start, p)
                          : clip(Eigen::VectorXd::Zero(n), p);
  Eigen::VectorXd s_prev = s;
  Eigen::VectorXd extr = s;
  double t = 1.0;
  double fs = value(s);
  double kkt = 0.0;

  for (int it = 0; it < max_iter; ++it) {
    Eigen::VectorXd gs = grad(s);
    kkt = (s - clip(s - gs, p)).norm();
    if (kkt <= tol) {
      BoxLsqSolution sol;
      sol.s = s;
      sol.residual = p.g + p.A * s;
      sol.kkt_norm = kkt;
      sol.iterations = it;
      return sol;
    }

    Eigen::VectorXd cand = clip(extr - step * grad(extr), p);
    double fc = value(cand);
    if (fc > fs) {
      // safeguard: acceleration overshot, restart momentum from s
      cand = clip(s - step * gs, p);
      fc = value(cand);
      t = 1.0;
    }
    double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    extr = cand + ((t - 1.0) / t_next) * (cand - s);
    s_prev = s;
    s = cand;
    fs = fc;
    t = t_next;
  }
  throw Error(ErrorCode::NoConvergence,
              "box lsq: projected-gradient norm " + std::to_string(kkt) +
                  " after " + std::to_string(max_iter) + " iterations");
}

}  // namespace proxstair
