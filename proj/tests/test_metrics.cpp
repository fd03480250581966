#include <doctest.h>

#include <cmath>
#include <set>

#include "tsreg/metrics.hpp"

using namespace tsreg;

namespace {

std::vector<Eigen::VectorXd> ragged(std::initializer_list<std::initializer_list<double>> rows) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& row : rows) {
    Eigen::VectorXd v(row.size());
    int k = 0;
    for (double x : row) v(k++) = x;
    out.push_back(v);
  }
  return out;
}

// independent brute-force classifier for the block index sets
struct BruteBlocks {
  std::vector<std::vector<int>> even, odd;
  BruteBlocks(int n, int S) : even(S), odd(S) {
    for (int i = 1; i <= n; ++i) {
      int k = 1;
      while (!(i > (k - 1) * S && i <= k * S) && k <= n / S) ++k;  // interval membership
      if (i > (n / S) * S) k = n / S + 1;
      if (k % 2 == 0)
        even[i % S].push_back(i);
      else
        odd[i % S].push_back(i);
    }
  }
};

}  // namespace

TEST_CASE("empirical norm examples") {
  CHECK(empirical_norm_sq(ragged({{0, 0}, {0}}), {2, 1}) == 0.0);
  CHECK(empirical_norm_sq(ragged({{3, 4}}), {2}) == doctest::Approx(12.5).epsilon(1e-15));
  CHECK(empirical_norm_sq(ragged({{2, 2, 2}, {2}}), {3, 1}) ==
        doctest::Approx(4.0).epsilon(1e-15));
  CHECK_THROWS_AS(empirical_norm_sq(ragged({{1.0}}), {2}), std::invalid_argument);
}

TEST_CASE("empirical norm is a quadratic form") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    int n = 1 + static_cast<int>(rng.below(5));
    std::vector<int> sizes;
    std::vector<Eigen::VectorXd> v, scaled;
    double lambda = rng.normal();
    for (int i = 0; i < n; ++i) {
      int m = 1 + static_cast<int>(rng.below(4));
      sizes.push_back(m);
      Eigen::VectorXd row(m);
      for (int j = 0; j < m; ++j) row(j) = rng.normal();
      v.push_back(row);
      scaled.push_back(lambda * row);
    }
    double lhs = empirical_norm_sq(scaled, sizes);
    double rhs = lambda * lambda * empirical_norm_sq(v, sizes);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("relative error examples") {
  auto truth = ragged({{1, 2}, {3}});
  CHECK(relative_error(truth, truth, {2, 1}) == 0.0);
  CHECK(relative_error(ragged({{0, 0}, {0}}), truth, {2, 1}) == doctest::Approx(1.0));
  auto twice = ragged({{2, 4}, {6}});
  CHECK(relative_error(twice, truth, {2, 1}) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(relative_error(truth, ragged({{0, 0}, {0}}), {2, 1}),
                  std::invalid_argument);
}

TEST_CASE("relative error is invariant to common scaling") {
  Rng rng(18);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> sizes = {2, 3};
    auto fhat = ragged({{rng.normal(), rng.normal()},
                        {rng.normal(), rng.normal(), rng.normal()}});
    auto ftrue = ragged({{rng.normal(), rng.normal()},
                         {rng.normal(), rng.normal(), rng.normal()}});
    double lambda = 0.1 + rng.uniform() * 5.0;
    std::vector<Eigen::VectorXd> fhat_s, ftrue_s;
    for (auto& v : fhat) fhat_s.push_back(lambda * v);
    for (auto& v : ftrue) ftrue_s.push_back(lambda * v);
    double a = relative_error(fhat, ftrue, sizes);
    double b = relative_error(fhat_s, ftrue_s, sizes);
    CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, a));
  }
}

TEST_CASE("population L2 error: exact cases") {
  DenseNet zero(1, 1, 1);
  auto zero_f = [](const Eigen::VectorXd&) { return 0.0; };
  CHECK(population_l2_error(zero, 1.0, zero_f, 1, 100, 1).value == 0.0);

  // constant net f = 1 against f* = 0: squared error is 1 at every draw
  DenseNet one(1, 1, 1);
  one.biases()[1](0) = 1.0;
  auto est = population_l2_error(one, 5.0, zero_f, 1, 37, 2);
  CHECK(est.value == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(est.std_error == doctest::Approx(0.0));
}

TEST_CASE("population L2 error: integral of x^2 via identity net") {
  // f(x) = relu(x) = x on [0,1]
  DenseNet net(1, 1, 1);
  net.weights()[0](0, 0) = 1.0;
  net.weights()[1](0, 0) = 1.0;
  auto zero_f = [](const Eigen::VectorXd&) { return 0.0; };
  auto est = population_l2_error(net, 10.0, zero_f, 1, 200000, 3);
  CHECK(std::abs(est.value - 1.0 / 3.0) <= 3.0 * est.std_error);
}

TEST_CASE("harmonic mean") {
  CHECK(harmonic_mean({4, 4, 4}) == doctest::Approx(4.0));
  CHECK(harmonic_mean({16, 24, 20, 10}) == doctest::Approx(15.7377).epsilon(1e-5));
  CHECK(harmonic_mean({1, 1000000}) == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(harmonic_mean({2, 8}) >= 2.0);
  CHECK(harmonic_mean({2, 8}) <= 8.0);
}

TEST_CASE("build_blocks: n=10 S=3 enumeration") {
  BlockPartition bp = build_blocks(10, 3);
  CHECK(bp.num_full_blocks == 3);
  CHECK(bp.intervals[0] == std::vector<int>{1, 2, 3});
  CHECK(bp.intervals[1] == std::vector<int>{4, 5, 6});
  CHECK(bp.intervals[2] == std::vector<int>{7, 8, 9});
  CHECK(bp.intervals[3] == std::vector<int>{10});

  std::set<int> all;
  std::size_t total = 0;
  for (const auto& set : bp.even_sets) {
    all.insert(set.begin(), set.end());
    total += set.size();
  }
  for (const auto& set : bp.odd_sets) {
    all.insert(set.begin(), set.end());
    total += set.size();
  }
  CHECK(all.size() == 10);           // union is {1..10}
  CHECK(total == 10);                // pairwise disjoint
  CHECK(*all.begin() == 1);
  CHECK(*all.rbegin() == 10);
}

TEST_CASE("build_blocks: n = S gives a single full block") {
  BlockPartition bp = build_blocks(7, 7);
  CHECK(bp.num_full_blocks == 1);
  CHECK(bp.intervals[0].size() == 7);
  CHECK(bp.intervals[1].empty());
}

TEST_CASE("build_blocks: out-of-range S rejected") {
  CHECK_THROWS_AS(build_blocks(5, 0), std::invalid_argument);
  CHECK_THROWS_AS(build_blocks(5, 6), std::invalid_argument);
}

TEST_CASE("build_blocks matches brute force on a spot grid") {
  for (int n : {10, 37, 64}) {
    for (int S : {1, 3, 5}) {
      BlockPartition bp = build_blocks(n, S);
      BruteBlocks brute(n, S);
      for (int s = 0; s < S; ++s) {
        CHECK(bp.even_sets[s] == brute.even[s]);
        CHECK(bp.odd_sets[s] == brute.odd[s]);
      }
    }
  }
}

TEST_CASE("default_block_length") {
  CHECK(default_block_length(20) == 3);
  CHECK(default_block_length(2) == 1);
  CHECK(default_block_length(403) == 6);
  CHECK_THROWS_AS(default_block_length(1), std::invalid_argument);
}
