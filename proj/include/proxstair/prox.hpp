#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "proxstair/errors.hpp"

namespace proxstair {

/// One weighted multi-threshold instance: f(x) = sum_i weights[i] * |x - data[i]|
/// together with the prox parameter gamma.
///
/// Invariants: data nondecreasing (duplicates permitted), weights >= 0
/// (zero-weight entries act as padding), gamma > 0, size >= 1.
struct ProxInstance {
  std::vector<double> data;
  std::vector<double> weights;
  double gamma = 1.0;

  std::size_t size() const { return data.size(); }
};

/// Forward and reverse cumulative weights with sentinel extensions.
/// W(0) = 0, W(i) = w_1 + ... + w_i, W(N+1) = W(N);
/// V(i) = w_i + ... + w_N, V(N+1) = V(N+2) = 0.
struct CumulativeWeights {
  std::vector<double> fwd;  // fwd[i] = W(i), i = 0..N+1
  std::vector<double> rev;  // rev[i-1] = V(i), i = 1..N+2

  double W(std::size_t i) const { return fwd[i]; }
  double V(std::size_t i) const { return rev[i - 1]; }
  std::size_t count() const { return fwd.size() - 2; }
};

/// Subdifferential of f at a point, as a closed interval [lo, hi].
/// Degenerate (lo == hi) wherever f is differentiable.
struct SubgradientInterval {
  double lo;
  double hi;
};

/// M independent instances padded to a common width with zero weights,
/// plus one evaluation point per row.
struct ProxBatch {
  std::size_t rows = 0;
  std::size_t width = 0;           // padded instance length
  std::vector<double> data;        // rows*width, row-major, each row nondecreasing
  std::vector<double> weights;     // rows*width, padded slots carry weight 0
  std::vector<double> gamma;       // rows
  std::vector<double> x;           // rows
};

/// Validates, sorts and merges duplicate data points (weights added).
ProxInstance prepare_instance(std::span<const double> raw_data,
                              std::span<const double> raw_weights,
                              double gamma);

CumulativeWeights cumulative_weights(const ProxInstance& inst);

/// f(x) = sum_i w_i |x - d_i|
double eval_f(const ProxInstance& inst, double x);

/// Phi(y) = gamma * f(y) + (1/2)(y - x)^2
double eval_objective(const ProxInstance& inst, double x, double y);

SubgradientInterval subdifferential_f(const ProxInstance& inst, double y);

/// Smallest index k in [1, N+1] with gamma*(W(k) - V(k+1)) + d_k - x >= 0,
/// where d_{N+1} = +inf. The scanned quantity is nondecreasing in k, so a
/// binary search applies.
std::size_t find_index(const ProxInstance& inst, double x);

/// Exact proximal map of gamma*f at x: the unique minimizer of Phi.
double prox(const ProxInstance& inst, double x);

/// Elementwise prox over all rows; bitwise identical to calling prox per row.
std::vector<double> prox_batch(const ProxBatch& batch);

/// Independent reference: evaluates Phi at all 2N+1 candidate points
/// (data points and clipped stationary points of the local quadratics)
/// and returns the argmin.
double oracle_prox(const ProxInstance& inst, double x);

/// Closed interval of x-values on which prox(x) == d_k (1-based k).
/// Width is exactly 2*gamma*w_k.
std::pair<double, double> plateau_interval(const ProxInstance& inst,
                                           std::size_t k);

namespace detail {
/// Scalar kernel shared by prox and prox_batch. Requires d nondecreasing,
/// w >= 0, gamma > 0, x finite; does not validate.
double prox_kernel(const double* d, const double* w, std::size_t n,
                   double gamma, double x);
}  // namespace detail

}  // namespace proxstair
