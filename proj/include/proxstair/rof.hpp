#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "proxstair/imaging.hpp"

namespace proxstair {

/// All 4-neighbor edges of a rows x cols grid, vertical first then
/// horizontal, oriented second pixel minus first.
struct EdgeSet {
  std::vector<std::pair<int, int>> edges;  // (pixel_a, pixel_b), flat indices

  static EdgeSet grid(int rows, int cols);
  std::size_t size() const { return edges.size(); }
};

struct RofParams {
  double beta = 10.0;
  double tol_inner = 1e-4;
  double tol_outer = 300.0;
  int max_outer = 100;
  int max_inner = 100000;
  double qp_tol = 1e-6;
  int qp_max_iter = 500000;
  double alpha0 = 0.5;
};

struct DenoiseReport {
  int iterations = 0;        // inner white+black pairs plus restart steps
  int inner_iterations = 0;  // white+black pairs only
  int restarts = 0;
  std::vector<double> objective_trace;
  double final_direction_norm = 0.0;
  bool converged = false;
  double time_prox_s = 0.0;
  double time_qp_s = 0.0;
  double time_total_s = 0.0;
  int prox_calls = 0;  // batched prox evaluations (one per half sweep)
  int qp_calls = 0;
};

/// Thrown when an iteration cap is reached; carries the best iterate.
struct DenoiseFailure : Error {
  GrayImage best;
  DenoiseReport report;

  DenoiseFailure(const std::string& msg, GrayImage u, DenoiseReport rep)
      : Error(ErrorCode::NoConvergence, msg),
        best(std::move(u)),
        report(std::move(rep)) {}
};

/// Quadratic fidelity plus beta times the anisotropic total variation.
double rof_objective(const GrayImage& u, const GrayImage& g, double beta);

/// Parity masks as flat pixel index lists; (i + j) even is white.
std::pair<std::vector<int>, std::vector<int>> checkerboard_masks(int rows,
                                                                 int cols);

/// Exact minimization of the ROF objective over the masked pixels, holding
/// the rest fixed. Each masked pixel decouples into one prox instance
/// (neighbor values as data, unit weights, gamma = beta, x = g at the pixel).
GrayImage color_update(const GrayImage& u, const GrayImage& g, double beta,
                       const std::vector<int>& mask);

/// Negative of the minimum-norm subgradient of the ROF objective at u.
/// Edges with nonzero difference pin their dual variable to the sign; the
/// rest are free in [-1, 1] and determined by a box least-squares solve.
/// warm_start, when given, carries the full edge-indexed dual vector from a
/// previous call and is updated in place.
GrayImage steepest_descent_direction(const GrayImage& u, const GrayImage& g,
                                     double beta, double qp_tol,
                                     int qp_max_iter = 500000,
                                     Eigen::VectorXd* warm_start = nullptr);

/// Largest alpha in {alpha0 * 2^-t} with a strict objective decrease.
double backtracking_step(const GrayImage& u, const GrayImage& d,
                         const GrayImage& g, double beta, double alpha0);

/// Checkerboard block-coordinate descent with steepest-descent restarts.
std::pair<GrayImage, DenoiseReport> denoise(const GrayImage& g,
                                            const RofParams& params);

/// Global reference solution through the dual problem
///   minimize ||g - B^T p||^2  subject to  |p_e| <= beta,
/// solved with the box least-squares solver; returns u = g - B^T p*.
GrayImage dual_reference_solve(const GrayImage& g, double beta, double tol,
                               int max_iter = 2000000);

}  // namespace proxstair
