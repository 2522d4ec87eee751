#include "proxstair/rof.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "proxstair/box_qp.hpp"
#include "proxstair/prox.hpp"

namespace proxstair {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_same_shape(const GrayImage& a, const GrayImage& b) {
  if (a.rows != b.rows || a.cols != b.cols)
    throw Error(ErrorCode::ShapeMismatch, "image shapes differ");
}

double frob_dist(const GrayImage& a, const GrayImage& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a.v[i] - b.v[i];
    acc += d * d;
  }
  return std::sqrt(acc);
}

double frob_norm(const GrayImage& a) {
  double acc = 0.0;
  for (double x : a.v) acc += x * x;
  return std::sqrt(acc);
}

}  // namespace

EdgeSet EdgeSet::grid(int rows, int cols) {
  EdgeSet es;
  es.edges.reserve(static_cast<std::size_t>(cols) * (rows - 1) +
                   static_cast<std::size_t>(rows) * (cols - 1));
  for (int i = 0; i + 1 < rows; ++i)
    for (int j = 0; j < cols; ++j)
      es.edges.emplace_back(i * cols + j, (i + 1) * cols + j);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j + 1 < cols; ++j)
      es.edges.emplace_back(i * cols + j, i * cols + j + 1);
  return es;
}

double rof_objective(const GrayImage& u, const GrayImage& g, double beta) {
  check_same_shape(u, g);
  double fid = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    double d = u.v[i] - g.v[i];
    fid += d * d;
  }
  double tv = 0.0;
  for (const auto& [a, b] : EdgeSet::grid(u.rows, u.cols).edges)
    tv += std::abs(u.v[b] - u.v[a]);
  return 0.5 * fid + beta * tv;
}

std::pair<std::vector<int>, std::vector<int>> checkerboard_masks(int rows,
                                                                 int cols) {
  std::vector<int> white, black;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      ((i + j) % 2 == 0 ? white : black).push_back(i * cols + j);
  return {white, black};
}

GrayImage color_update(const GrayImage& u, const GrayImage& g, double beta,
                       const std::vector<int>& mask) {
  check_same_shape(u, g);
  const int rows = u.rows, cols = u.cols;
  ProxBatch batch;
  batch.rows = mask.size();
  batch.width = 4;
  batch.data.resize(batch.rows * 4);
  batch.weights.resize(batch.rows * 4);
  batch.gamma.assign(batch.rows, beta);
  batch.x.resize(batch.rows);

  for (std::size_t r = 0; r < mask.size(); ++r) {
    int p = mask[r];
    int i = p / cols, j = p % cols;
    double nb[4];
    std::size_t cnt = 0;
    if (i > 0) nb[cnt++] = u.v[p - cols];
    if (i + 1 < rows) nb[cnt++] = u.v[p + cols];
    if (j > 0) nb[cnt++] = u.v[p - 1];
    if (j + 1 < cols) nb[cnt++] = u.v[p + 1];
    std::sort(nb, nb + cnt);
    double* d = batch.data.data() + r * 4;
    double* w = batch.weights.data() + r * 4;
    for (std::size_t k = 0; k < 4; ++k) {
      d[k] = k < cnt ? nb[k] : nb[cnt - 1];  // zero-weight pad keeps order
      w[k] = k < cnt ? 1.0 : 0.0;
    }
    batch.x[r] = g.v[p];
  }

  std::vector<double> y = prox_batch(batch);
  GrayImage out = u;
  for (std::size_t r = 0; r < mask.size(); ++r) out.v[mask[r]] = y[r];
  return out;
}

GrayImage steepest_descent_direction(const GrayImage& u, const GrayImage& g,
                                     double beta, double qp_tol,
                                     int qp_max_iter,
                                     Eigen::VectorXd* warm_start) {
  check_same_shape(u, g);
  const auto es = EdgeSet::grid(u.rows, u.cols);
  const auto m = static_cast<Eigen::Index>(u.size());

  Eigen::VectorXd base(m);
  for (std::size_t i = 0; i < u.size(); ++i) base[i] = u.v[i] - g.v[i];

  // pin edges with nonzero difference, collect the rest as free columns
  std::vector<Eigen::Triplet<double>> trips;
  std::vector<std::size_t> free_edges;
  for (std::size_t e = 0; e < es.size(); ++e) {
    auto [a, b] = es.edges[e];
    double diff = u.v[b] - u.v[a];
    if (diff != 0.0) {
      double s = diff > 0 ? 1.0 : -1.0;
      base[a] -= beta * s;
      base[b] += beta * s;
    } else {
      auto col = static_cast<Eigen::Index>(free_edges.size());
      trips.emplace_back(a, col, -beta);
      trips.emplace_back(b, col, beta);
      free_edges.push_back(e);
    }
  }

  Eigen::VectorXd residual;
  Eigen::VectorXd s_free;
  if (free_edges.empty()) {
    residual = base;
  } else {
    BoxLsq p;
    p.A.resize(m, static_cast<Eigen::Index>(free_edges.size()));
    p.A.setFromTriplets(trips.begin(), trips.end());
    p.g = base;
    p.lower = Eigen::VectorXd::Constant(free_edges.size(), -1.0);
    p.upper = Eigen::VectorXd::Constant(free_edges.size(), 1.0);

    Eigen::VectorXd start;
    const Eigen::VectorXd* startp = nullptr;
    if (warm_start && warm_start->size() == static_cast<Eigen::Index>(es.size())) {
      start.resize(free_edges.size());
      for (std::size_t k = 0; k < free_edges.size(); ++k)
        start[k] = (*warm_start)[free_edges[k]];
      startp = &start;
    }
    BoxLsqSolution sol = solve_box_lsq(p, qp_tol, qp_max_iter, startp);
    residual = sol.residual;
    s_free = sol.s;
  }

  if (warm_start) {
    warm_start->resize(static_cast<Eigen::Index>(es.size()));
    for (std::size_t e = 0; e < es.size(); ++e) {
      auto [a, b] = es.edges[e];
      double diff = u.v[b] - u.v[a];
      (*warm_start)[e] = diff == 0.0 ? 0.0 : (diff > 0 ? 1.0 : -1.0);
    }
    for (std::size_t k = 0; k < free_edges.size(); ++k)
      (*warm_start)[free_edges[k]] = s_free[k];
  }

  GrayImage d(u.rows, u.cols);
  for (std::size_t i = 0; i < d.size(); ++i) d.v[i] = -residual[i];
  return d;
}

double backtracking_step(const GrayImage& u, const GrayImage& d,
                         const GrayImage& g, double beta, double alpha0) {
  check_same_shape(u, d);
  if (frob_norm(d) == 0.0)
    throw Error(ErrorCode::InvalidArgument, "zero direction");
  const double e0 = rof_objective(u, g, beta);
  double alpha = alpha0;
  for (int t = 0; t <= 60; ++t) {
    GrayImage trial = u;
    for (std::size_t i = 0; i < u.size(); ++i) trial.v[i] += alpha * d.v[i];
    if (rof_objective(trial, g, beta) < e0) return alpha;
    alpha *= 0.5;
  }
  throw Error(ErrorCode::LineSearchStall,
              "no decrease after 60 halvings; direction not a descent direction");
}

std::pair<GrayImage, DenoiseReport> denoise(const GrayImage& g,
                                            const RofParams& params) {
  if (!(params.beta > 0) || !(params.tol_inner > 0) || !(params.tol_outer > 0) ||
      !(params.alpha0 > 0) || params.alpha0 > 1)
    throw Error(ErrorCode::InvalidArgument, "bad denoise parameters");

  const auto t0 = Clock::now();
  auto [white, black] = checkerboard_masks(g.rows, g.cols);
  GrayImage u = g;
  DenoiseReport rep;
  rep.objective_trace.push_back(rof_objective(u, g, params.beta));
  Eigen::VectorXd warm;

  auto fail = [&]() -> void {
    rep.time_total_s = seconds_since(t0);
    throw DenoiseFailure("rof: iteration cap reached after " +
                             std::to_string(rep.iterations) + " iterations",
                         u, rep);
  };

  for (int outer = 0;; ++outer) {
    if (outer >= params.max_outer) fail();
    // inner loop: alternate the two colors until the iterate stalls
    while (true) {
      if (rep.inner_iterations >= params.max_inner) fail();
      GrayImage prev = u;
      auto tp = Clock::now();
      u = color_update(u, g, params.beta, white);
      u = color_update(u, g, params.beta, black);
      rep.time_prox_s += seconds_since(tp);
      rep.prox_calls += 2;
      ++rep.inner_iterations;
      ++rep.iterations;
      rep.objective_trace.push_back(rof_objective(u, g, params.beta));
      if (frob_dist(u, prev) <= params.tol_inner) break;
    }

    auto tq = Clock::now();
    GrayImage d = steepest_descent_direction(u, g, params.beta, params.qp_tol,
                                             params.qp_max_iter, &warm);
    rep.time_qp_s += seconds_since(tq);
    ++rep.qp_calls;
    rep.final_direction_norm = frob_norm(d);
    if (rep.final_direction_norm <= params.tol_outer) {
      rep.converged = true;
      break;
    }
    double alpha = backtracking_step(u, d, g, params.beta, params.alpha0);
    for (std::size_t i = 0; i < u.size(); ++i) u.v[i] += alpha * d.v[i];
    ++rep.restarts;
    ++rep.iterations;
    rep.objective_trace.push_back(rof_objective(u, g, params.beta));
  }

  rep.time_total_s = seconds_since(t0);
  return {std::move(u), rep};
}

GrayImage dual_reference_solve(const GrayImage& g, double beta, double tol,
                               int max_iter) {
  const auto es = EdgeSet::grid(g.rows, g.cols);
  const auto m = static_cast<Eigen::Index>(g.size());
  BoxLsq p;
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(2 * es.size());
  for (std::size_t e = 0; e < es.size(); ++e) {
    auto [a, b] = es.edges[e];
    // column e of -B^T: +1 at the tail, -1 at the head
    trips.emplace_back(a, static_cast<Eigen::Index>(e), 1.0);
    trips.emplace_back(b, static_cast<Eigen::Index>(e), -1.0);
  }
  p.A.resize(m, static_cast<Eigen::Index>(es.size()));
  p.A.setFromTriplets(trips.begin(), trips.end());
  p.g.resize(m);
  for (std::size_t i = 0; i < g.size(); ++i) p.g[i] = g.v[i];
  p.lower = Eigen::VectorXd::Constant(es.size(), -beta);
  p.upper = Eigen::VectorXd::Constant(es.size(), beta);

  BoxLsqSolution sol = solve_box_lsq(p, tol, max_iter);
  GrayImage u(g.rows, g.cols);
  for (std::size_t i = 0; i < u.size(); ++i) u.v[i] = sol.residual[i];
  return u;
}

}  // namespace proxstair
