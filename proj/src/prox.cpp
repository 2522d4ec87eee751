#include "proxstair/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "proxstair/parallel.hpp"

namespace proxstair {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, std::string("non-finite ") + what);
}

}  // namespace

ProxInstance prepare_instance(std::span<const double> raw_data,
                              std::span<const double> raw_weights,
                              double gamma) {
  if (raw_data.empty()) throw Error(ErrorCode::EmptyData, "empty data");
  if (raw_data.size() != raw_weights.size())
    throw Error(ErrorCode::ShapeMismatch, "data/weights length mismatch");
  if (std::isnan(gamma)) throw Error(ErrorCode::NonFinite, "non-finite gamma");
  if (!(gamma > 0) || !std::isfinite(gamma))
    throw Error(ErrorCode::NonpositiveGamma, "gamma must be positive and finite");
  for (double d : raw_data) require_finite(d, "data point");
  for (double w : raw_weights) {
    require_finite(w, "weight");
    if (w < 0) throw Error(ErrorCode::NegativeWeight, "negative weight");
  }

  std::vector<std::size_t> order(raw_data.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return raw_data[a] < raw_data[b];
  });

  ProxInstance inst;
  inst.gamma = gamma;
  for (std::size_t idx : order) {
    double d = raw_data[idx];
    double w = raw_weights[idx];
    if (!inst.data.empty() && inst.data.back() == d) {
      inst.weights.back() += w;
    } else {
      inst.data.push_back(d);
      inst.weights.push_back(w);
    }
  }
  return inst;
}

CumulativeWeights cumulative_weights(const ProxInstance& inst) {
  const std::size_t n = inst.size();
  CumulativeWeights cw;
  cw.fwd.resize(n + 2);
  cw.rev.resize(n + 2);
  cw.fwd[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) cw.fwd[i] = cw.fwd[i - 1] + inst.weights[i - 1];
  cw.fwd[n + 1] = cw.fwd[n];
  // rev[i-1] = V(i), suffix sums with V(N+1) = V(N+2) = 0
  cw.rev[n + 1] = 0.0;
  cw.rev[n] = 0.0;
  for (std::size_t i = n; i >= 1; --i) cw.rev[i - 1] = cw.rev[i] + inst.weights[i - 1];
  return cw;
}

double eval_f(const ProxInstance& inst, double x) {
  require_finite(x, "x");
  double acc = 0.0;
  for (std::size_t i = 0; i < inst.size(); ++i)
    acc += inst.weights[i] * std::abs(x - inst.data[i]);
  return acc;
}

double eval_objective(const ProxInstance& inst, double x, double y) {
  require_finite(y, "y");
  double dev = y - x;
  return inst.gamma * eval_f(inst, y) + 0.5 * dev * dev;
}

SubgradientInterval subdifferential_f(const ProxInstance& inst, double y) {
  const auto cw = cumulative_weights(inst);
  const std::size_t n = inst.size();
  auto range = std::equal_range(inst.data.begin(), inst.data.end(), y);
  if (range.first != range.second) {
    // y coincides with data points i..j (1-based, merged across duplicates)
    std::size_t i = static_cast<std::size_t>(range.first - inst.data.begin()) + 1;
    std::size_t j = static_cast<std::size_t>(range.second - inst.data.begin());
    return {cw.W(i - 1) - cw.V(i), cw.W(j) - cw.V(j + 1)};
  }
  // y in the open interval between data points i-1 and i
  std::size_t i = static_cast<std::size_t>(range.first - inst.data.begin()) + 1;
  (void)n;
  double slope = cw.W(i - 1) - cw.V(i);
  return {slope, slope};
}

std::size_t find_index(const ProxInstance& inst, double x) {
  require_finite(x, "x");
  const auto cw = cumulative_weights(inst);
  const std::size_t n = inst.size();
  auto cond = [&](std::size_t k) {
    return inst.gamma * (cw.W(k) - cw.V(k + 1)) + inst.data[k - 1] - x;
  };
  // smallest k in [1, n+1] with cond(k) >= 0; cond is nondecreasing in k and
  // cond(n+1) = +inf by convention
  std::size_t lo = 1, hi = n + 1;
  while (lo < hi) {
    std::size_t mid = lo + (hi - lo) / 2;
    if (mid <= n && cond(mid) >= 0)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

namespace detail {

double prox_kernel(const double* d, const double* w, std::size_t n,
                   double gamma, double x) {
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += w[i];
  double fwd = 0.0;  // W(k-1)
  for (std::size_t k = 0; k < n; ++k) {
    double fwd_next = fwd + w[k];
    // gamma*(W(k) - V(k+1)) + d_k - x with V(k+1) = total - W(k)
    if (gamma * (2.0 * fwd_next - total) + d[k] - x >= 0.0) {
      // min(d_k, x - gamma*(W(k-1) - V(k))), anchored at d_k so the N = 1
      // case reduces bitwise to the soft-threshold closed form
      double t = (x - d[k]) - gamma * (2.0 * fwd - total);
      return t < 0.0 ? d[k] + t : d[k];
    }
    fwd = fwd_next;
  }
  return d[n - 1] + ((x - d[n - 1]) - gamma * total);
}

}  // namespace detail

double prox(const ProxInstance& inst, double x) {
  require_finite(x, "x");
  return detail::prox_kernel(inst.data.data(), inst.weights.data(), inst.size(),
                             inst.gamma, x);
}

std::vector<double> prox_batch(const ProxBatch& batch) {
  if (batch.data.size() != batch.rows * batch.width ||
      batch.weights.size() != batch.rows * batch.width ||
      batch.gamma.size() != batch.rows || batch.x.size() != batch.rows)
    throw Error(ErrorCode::ShapeMismatch, "ragged batch arrays");
  std::vector<double> out(batch.rows);
  parallel_for(batch.rows, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      out[r] = detail::prox_kernel(batch.data.data() + r * batch.width,
                                   batch.weights.data() + r * batch.width,
                                   batch.width, batch.gamma[r], batch.x[r]);
    }
  });
  return out;
}

double oracle_prox(const ProxInstance& inst, double x) {
  require_finite(x, "x");
  const auto cw = cumulative_weights(inst);
  const std::size_t n = inst.size();
  double best_y = inst.data[0];
  double best_phi = eval_objective(inst, x, best_y);
  auto consider = [&](double y) {
    double phi = eval_objective(inst, x, y);
    if (phi < best_phi) {
      best_phi = phi;
      best_y = y;
    }
  };
  for (std::size_t k = 1; k <= n; ++k) consider(inst.data[k - 1]);
  for (std::size_t k = 1; k <= n + 1; ++k) {
    double t = x - inst.gamma * (cw.W(k - 1) - cw.V(k));
    if (k >= 2) t = std::max(t, inst.data[k - 2]);
    if (k <= n) t = std::min(t, inst.data[k - 1]);
    consider(t);
  }
  return best_y;
}

std::pair<double, double> plateau_interval(const ProxInstance& inst,
                                           std::size_t k) {
  if (k < 1 || k > inst.size())
    throw Error(ErrorCode::IndexOutOfRange, "plateau index out of range");
  const auto cw = cumulative_weights(inst);
  double center = inst.gamma * (cw.W(k - 1) - cw.V(k + 1)) + inst.data[k - 1];
  double half = inst.gamma * inst.weights[k - 1];
  return {center - half, center + half};
}

}  // namespace proxstair
