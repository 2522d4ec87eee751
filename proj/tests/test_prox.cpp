#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "proxstair/prox.hpp"
#include "test_utils.hpp"

using namespace proxstair;
using proxstair::testing::random_instance;
using proxstair::testing::random_x;

namespace {

ProxInstance make(std::vector<double> d, std::vector<double> w, double gamma) {
  ProxInstance inst;
  inst.data = std::move(d);
  inst.weights = std::move(w);
  inst.gamma = gamma;
  return inst;
}

double soft_threshold(double x, double r) {
  double mag = std::max(0.0, std::abs(x) - r);
  return x > 0 ? mag : (x < 0 ? -mag : 0.0);
}

}  // namespace

TEST_CASE("prepare_instance sorts and merges duplicates") {
  auto inst = prepare_instance(std::vector<double>{3, 1, 1},
                               std::vector<double>{1, 2, 0.5}, 1.0);
  CHECK(inst.data == std::vector<double>{1, 3});
  CHECK(inst.weights == std::vector<double>{2.5, 1});

  auto single = prepare_instance(std::vector<double>{0}, std::vector<double>{1}, 0.5);
  CHECK(single.data == std::vector<double>{0});
  CHECK(single.weights == std::vector<double>{1});
}

TEST_CASE("prepare_instance rejects bad input") {
  std::vector<double> d{1, 2}, w{1, -1};
  CHECK_THROWS_WITH_AS(prepare_instance(d, w, 1.0), doctest::Contains("negative"),
                       Error);
  CHECK_THROWS_AS(prepare_instance(std::vector<double>{}, std::vector<double>{}, 1.0),
                  Error);
  CHECK_THROWS_AS(prepare_instance(std::vector<double>{0}, std::vector<double>{1}, 0.0),
                  Error);
  CHECK_THROWS_AS(prepare_instance(std::vector<double>{0}, std::vector<double>{1}, -2.0),
                  Error);
  double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(prepare_instance(std::vector<double>{inf}, std::vector<double>{1}, 1.0),
                  Error);
  try {
    prepare_instance(std::vector<double>{0}, std::vector<double>{1}, -1.0);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonpositiveGamma);
  }
}

TEST_CASE("cumulative weights with sentinels") {
  auto cw = cumulative_weights(make({0, 1, 2}, {1, 2, 1}, 1.0));
  CHECK(cw.fwd == std::vector<double>{0, 1, 3, 4, 4});
  CHECK(cw.rev == std::vector<double>{4, 3, 1, 0, 0});

  auto single = cumulative_weights(make({0}, {1}, 1.0));
  CHECK(single.fwd == std::vector<double>{0, 1, 1});
  CHECK(single.rev == std::vector<double>{1, 0, 0});

  auto padded = cumulative_weights(make({0, 1}, {0, 1}, 1.0));
  CHECK(padded.fwd == std::vector<double>{0, 0, 1, 1});
  CHECK(padded.rev == std::vector<double>{1, 1, 0, 0});
}

TEST_CASE("cumulative weight identity V_i = W_N - W_{i-1}") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    auto inst = random_instance(rng);
    auto cw = cumulative_weights(inst);
    std::size_t n = inst.size();
    double budget = 1e-15 * static_cast<double>(n) * std::max(1.0, cw.W(n));
    for (std::size_t i = 1; i <= n + 2; ++i)
      CHECK(std::abs(cw.V(i) - (cw.W(n) - cw.W(i - 1))) <= budget * 16);
  }
}

TEST_CASE("eval_f and eval_objective") {
  auto inst = make({0, 1, 3}, {1, 2, 1}, 0.5);
  CHECK(eval_f(inst, 2.0) == doctest::Approx(5.0));
  CHECK(eval_f(inst, 1.0) == doctest::Approx(3.0));
  CHECK(eval_f(make({0}, {1}, 1.0), 0.0) == 0.0);
  CHECK(eval_objective(inst, 2.2, 1.2) == doctest::Approx(2.2));
  CHECK(eval_objective(make({5}, {1}, 1.0), 5.0, 5.0) == 0.0);
  CHECK(eval_objective(make({0}, {1}, 1.0), 2.0, 0.0) == doctest::Approx(2.0));
  CHECK_THROWS_AS(eval_f(inst, std::numeric_limits<double>::quiet_NaN()), Error);
}

TEST_CASE("subdifferential") {
  auto inst = make({0, 1, 3}, {1, 2, 1}, 1.0);
  auto at1 = subdifferential_f(inst, 1.0);
  CHECK(at1.lo == doctest::Approx(-2.0));
  CHECK(at1.hi == doctest::Approx(2.0));
  auto at2 = subdifferential_f(inst, 2.0);
  CHECK(at2.lo == at2.hi);
  CHECK(at2.lo == doctest::Approx(2.0));
  auto left = subdifferential_f(inst, -5.0);
  CHECK(left.lo == doctest::Approx(-4.0));
  CHECK(left.lo == left.hi);

  // duplicates merge into one interval
  auto dup = subdifferential_f(make({0, 1, 1, 3}, {1, 1, 1, 1}, 1.0), 1.0);
  CHECK(dup.lo == doctest::Approx(-2.0));
  CHECK(dup.hi == doctest::Approx(2.0));
}

TEST_CASE("find_index examples") {
  auto inst = make({0, 1, 3}, {1, 2, 1}, 0.5);
  CHECK(find_index(inst, 2.2) == 3);
  CHECK(find_index(inst, 0.5) == 2);
  CHECK(find_index(inst, -10.0) == 1);
  // beyond all data
  CHECK(find_index(inst, 100.0) == 4);
}

TEST_CASE("prox examples") {
  CHECK(prox(make({0}, {1}, 0.5), 2.0) == 1.5);
  CHECK(prox(make({-1, 1}, {1, 1}, 0.3), 0.0) == 0.0);
  CHECK(prox(make({0, 1, 3}, {1, 2, 1}, 0.5), 2.2) == doctest::Approx(1.2));
  CHECK(prox(make({0, 1, 3}, {1, 2, 1}, 0.5), 0.5) == 1.0);
}

TEST_CASE("oracle examples") {
  CHECK(oracle_prox(make({0, 1, 3}, {1, 2, 1}, 0.5), 2.2) == doctest::Approx(1.2));
  // N = 1 reduces to the closed-form shrinkage
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ud(-5, 5), up(0.01, 4.0);
  for (int t = 0; t < 500; ++t) {
    double d = ud(rng), w = up(rng), gamma = up(rng), x = ud(rng);
    auto inst = make({d}, {w}, gamma);
    double expect = d + soft_threshold(x - d, gamma * w);
    CHECK(oracle_prox(inst, x) == doctest::Approx(expect).epsilon(1e-14));
  }
}

TEST_CASE("plateau intervals") {
  auto [lo, hi] = plateau_interval(make({0, 1, 3}, {1, 2, 1}, 0.5), 2);
  CHECK(lo == doctest::Approx(0.0));
  CHECK(hi == doctest::Approx(2.0));

  auto [slo, shi] = plateau_interval(make({0}, {1}, 0.7), 1);
  CHECK(slo == doctest::Approx(-0.7));
  CHECK(shi == doctest::Approx(0.7));

  CHECK_THROWS_AS(plateau_interval(make({0}, {1}, 1.0), 0), Error);
  CHECK_THROWS_AS(plateau_interval(make({0}, {1}, 1.0), 2), Error);
}

TEST_CASE("prox matches oracle on randomized instances") {
  std::mt19937_64 rng(42);
  for (int t = 0; t < 20000; ++t) {
    auto inst = random_instance(rng);
    double x = random_x(rng);
    double y = prox(inst, x);
    double yo = oracle_prox(inst, x);
    CHECK(std::abs(y - yo) <= 1e-12 * std::max(1.0, std::abs(x)));
    // the minimizer lies between min(d_1, x) and max(d_N, x)
    CHECK(y >= std::min(inst.data.front(), x) - 1e-12);
    CHECK(y <= std::max(inst.data.back(), x) + 1e-12);
  }
}

TEST_CASE("optimality: objective and subgradient certificates") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 2000; ++t) {
    auto inst = random_instance(rng);
    double x = random_x(rng);
    double y = prox(inst, x);
    double phi = eval_objective(inst, x, y);
    CHECK(phi <= eval_objective(inst, x, y + 1e-6) + 1e-15 * std::abs(phi));
    CHECK(phi <= eval_objective(inst, x, y - 1e-6) + 1e-15 * std::abs(phi));
    // 0 in gamma * subdiff f(y) + (y - x)
    auto sg = subdifferential_f(inst, y);
    double lo = inst.gamma * sg.lo + (y - x);
    double hi = inst.gamma * sg.hi + (y - x);
    double scale = std::max(1.0, std::abs(x));
    CHECK(lo <= 1e-10 * scale);
    CHECK(hi >= -1e-10 * scale);
  }
}

TEST_CASE("prox is monotone and 1-Lipschitz in x") {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 300; ++t) {
    auto inst = random_instance(rng);
    std::vector<double> xs(64);
    for (auto& x : xs) x = random_x(rng);
    std::sort(xs.begin(), xs.end());
    double prev = prox(inst, xs[0]);
    for (std::size_t i = 1; i < xs.size(); ++i) {
      double cur = prox(inst, xs[i]);
      CHECK(cur >= prev - 1e-12);
      CHECK(cur - prev <= xs[i] - xs[i - 1] + 1e-12 * std::max(1.0, std::abs(xs[i])));
      prev = cur;
    }
  }
}

TEST_CASE("soft-threshold reduction is exact for N = 1") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> ud(-100, 100), up(1e-3, 10.0);
  for (int t = 0; t < 10000; ++t) {
    double d = ud(rng), w = up(rng), gamma = up(rng), x = ud(rng);
    double y = prox(make({d}, {w}, gamma), x);
    double expect = d + soft_threshold(x - d, gamma * w);
    CHECK(std::abs(y - expect) <=
          std::abs(expect) * std::numeric_limits<double>::epsilon());
  }
}

TEST_CASE("staircase: plateaus exact, unit slope in between") {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 1000; ++t) {
    auto inst = random_instance(rng, 8);
    for (std::size_t k = 1; k <= inst.size(); ++k) {
      if (inst.weights[k - 1] == 0.0) continue;
      auto [lo, hi] = plateau_interval(inst, k);
      double width = 2 * inst.gamma * inst.weights[k - 1];
      double d = inst.data[k - 1];
      double tol = 1e-12 * std::max({1.0, std::abs(d), std::abs(lo), std::abs(hi)});
      CHECK(std::abs((hi - lo) - width) <= tol);
      CHECK(std::abs(prox(inst, lo) - d) <= tol);
      CHECK(std::abs(prox(inst, hi) - d) <= tol);
      CHECK(std::abs(prox(inst, 0.5 * (lo + hi)) - d) <= tol);
    }
  }

  // affine regime between consecutive plateaus has slope exactly 1
  for (int t = 0; t < 200; ++t) {
    auto inst = random_instance(rng, 6);
    auto cw = cumulative_weights(inst);
    for (std::size_t k = 1; k < inst.size(); ++k) {
      if (inst.data[k] <= inst.data[k - 1]) continue;
      // x-interval mapping onto the open interval (d_k, d_{k+1})
      double shift = inst.gamma * (cw.W(k) - cw.V(k + 1));
      double xa = shift + inst.data[k - 1] + 0.25 * (inst.data[k] - inst.data[k - 1]);
      double xb = shift + inst.data[k - 1] + 0.75 * (inst.data[k] - inst.data[k - 1]);
      double slope = (prox(inst, xb) - prox(inst, xa)) / (xb - xa);
      CHECK(slope == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("index scan quantity is nondecreasing") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 500; ++t) {
    auto inst = random_instance(rng);
    auto cw = cumulative_weights(inst);
    double x = random_x(rng);
    double prev = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= inst.size(); ++k) {
      double cond = inst.gamma * (cw.W(k) - cw.V(k + 1)) + inst.data[k - 1] - x;
      CHECK(cond >= prev - 1e-12 * std::max(1.0, std::abs(cond)));
      prev = cond;
    }
    // binary search agrees with a first-nonnegative linear scan
    std::size_t linear = inst.size() + 1;
    for (std::size_t k = 1; k <= inst.size(); ++k) {
      if (inst.gamma * (cw.W(k) - cw.V(k + 1)) + inst.data[k - 1] - x >= 0) {
        linear = k;
        break;
      }
    }
    CHECK(find_index(inst, x) == linear);
  }
}

TEST_CASE("zero-weight padding never changes the result") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::size_t> pos_dist(0, 100);
  for (int t = 0; t < 2000; ++t) {
    auto inst = random_instance(rng, 8);
    double x = random_x(rng);
    double y = prox(inst, x);

    ProxInstance padded = inst;
    std::size_t pos = pos_dist(rng) % (inst.size() + 1);
    double pad_value = pos == 0 ? inst.data.front()
                      : pos == inst.size() ? inst.data.back()
                                           : inst.data[pos - 1];
    padded.data.insert(padded.data.begin() + pos, pad_value);
    padded.weights.insert(padded.weights.begin() + pos, 0.0);
    CHECK(prox(padded, x) == y);  // bitwise
  }
}

TEST_CASE("prox_batch matches per-row prox bitwise") {
  std::mt19937_64 rng(31);
  ProxBatch batch;
  batch.width = 6;
  std::vector<ProxInstance> insts;
  for (int r = 0; r < 512; ++r) {
    auto inst = random_instance(rng, 6);
    while (inst.size() < 6) {
      inst.data.push_back(inst.data.back());
      inst.weights.push_back(0.0);
    }
    insts.push_back(inst);
    batch.data.insert(batch.data.end(), inst.data.begin(), inst.data.end());
    batch.weights.insert(batch.weights.end(), inst.weights.begin(),
                         inst.weights.end());
    batch.gamma.push_back(inst.gamma);
    batch.x.push_back(random_x(rng));
  }
  batch.rows = insts.size();
  auto y = prox_batch(batch);
  for (std::size_t r = 0; r < insts.size(); ++r)
    CHECK(y[r] == prox(insts[r], batch.x[r]));
}

TEST_CASE("prox_batch edge cases") {
  ProxBatch batch;
  batch.rows = 3;
  batch.width = 3;
  // the three headline prox examples, padded to width 3
  batch.data = {0, 0, 0, -1, 1, 1, 0, 1, 3};
  batch.weights = {1, 0, 0, 1, 1, 0, 1, 2, 1};
  batch.gamma = {0.5, 0.3, 0.5};
  batch.x = {2.0, 0.0, 2.2};
  auto y = prox_batch(batch);
  CHECK(y[0] == doctest::Approx(1.5));
  CHECK(y[1] == 0.0);
  CHECK(y[2] == doctest::Approx(1.2));

  ProxBatch empty;
  CHECK(prox_batch(empty).empty());

  ProxBatch ragged;
  ragged.rows = 2;
  ragged.width = 2;
  ragged.data = {0, 1};  // too short
  ragged.weights = {1, 1, 1, 1};
  ragged.gamma = {1, 1};
  ragged.x = {0, 0};
  CHECK_THROWS_AS(prox_batch(ragged), Error);
}

TEST_CASE("prox and find_index correct on unmerged duplicate data") {
  std::mt19937_64 rng(55);
  for (int t = 0; t < 2000; ++t) {
    auto raw = random_instance(rng, 10);
    double x = random_x(rng);
    auto merged = prepare_instance(raw.data, raw.weights, raw.gamma);
    CHECK(std::abs(prox(raw, x) - prox(merged, x)) <=
          1e-12 * std::max(1.0, std::abs(x)));
  }
}
