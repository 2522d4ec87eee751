#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "proxstair/errors.hpp"

namespace proxstair {

/// Box-constrained linear least squares:
///   minimize (1/2) || g + A s ||^2  subject to  lower <= s <= upper.
/// Coordinates with lower == upper are pinned; callers may also eliminate
/// fixed coordinates beforehand by folding their columns into g.
struct BoxLsq {
  Eigen::SparseMatrix<double> A;  // m x n
  Eigen::VectorXd g;              // m
  Eigen::VectorXd lower;          // n
  Eigen::VectorXd upper;          // n
};

struct BoxLsqSolution {
  Eigen::VectorXd s;
  Eigen::VectorXd residual;  // g + A s
  double kkt_norm = 0.0;     // || s - clip(s - grad) || at return
  int iterations = 0;
};

/// Accelerated projected gradient with a function-value safeguard.
/// Step size 1/L with L estimated by power iteration on A^T A (>= 30 steps,
/// then a 1% safety margin). Terminates when the unit-step projected
/// gradient norm || s - clip(s - grad phi(s)) || drops below tol.
BoxLsqSolution solve_box_lsq(const BoxLsq& p, double tol, int max_iter,
                             const Eigen::VectorXd* warm_start = nullptr);

}  // namespace proxstair
