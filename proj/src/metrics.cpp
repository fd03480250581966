#include "tsreg/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace tsreg {

double empirical_norm_sq(const std::vector<Eigen::VectorXd>& values,
                         const std::vector<int>& group_sizes) {
  const int n = static_cast<int>(group_sizes.size());
  if (static_cast<int>(values.size()) != n)
    throw std::invalid_argument("empirical_norm_sq: shape mismatch");
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    if (values[i].size() != group_sizes[i])
      throw std::invalid_argument("empirical_norm_sq: group shape mismatch at " +
                                  std::to_string(i));
    total += values[i].squaredNorm() / group_sizes[i];
  }
  return total / n;
}

double relative_error(const std::vector<Eigen::VectorXd>& fhat_vals,
                      const std::vector<Eigen::VectorXd>& ftrue_vals,
                      const std::vector<int>& group_sizes) {
  double denom = empirical_norm_sq(ftrue_vals, group_sizes);
  if (denom == 0.0)
    throw std::invalid_argument("relative_error: target function is identically zero");
  std::vector<Eigen::VectorXd> diff(fhat_vals.size());
  for (std::size_t i = 0; i < fhat_vals.size(); ++i) diff[i] = fhat_vals[i] - ftrue_vals[i];
  return empirical_norm_sq(diff, group_sizes) / denom;
}

MonteCarloEstimate population_l2_error(
    const DenseNet& net, double truncation,
    const std::function<double(const Eigen::VectorXd&)>& f_star, int d, long mc_samples,
    std::uint64_t seed) {
  if (mc_samples < 1) throw std::invalid_argument("population_l2_error: mc_samples >= 1");
  Rng rng(seed);
  Eigen::VectorXd x(d);
  double sum = 0.0, sum_sq = 0.0;
  for (long s = 0; s < mc_samples; ++s) {
    for (int k = 0; k < d; ++k) x(k) = rng.uniform();
    double diff = truncate(net.forward(x), truncation) - f_star(x);
    double sq = diff * diff;
    sum += sq;
    sum_sq += sq * sq;
  }
  MonteCarloEstimate est;
  est.value = sum / mc_samples;
  // sample variance of the squared differences
  double var =
      std::max(0.0, (sum_sq - sum * sum / mc_samples) / std::max<long>(1, mc_samples - 1));
  est.std_error = std::sqrt(var / mc_samples);
  return est;
}

double harmonic_mean(const std::vector<int>& group_sizes) {
  if (group_sizes.empty()) throw std::invalid_argument("harmonic_mean: empty list");
  double inv_sum = 0.0;
  for (int m : group_sizes) {
    if (m <= 0) throw std::invalid_argument("harmonic_mean: nonpositive group size");
    inv_sum += 1.0 / m;
  }
  return group_sizes.size() / inv_sum;
}

BlockPartition build_blocks(int n, int block_length) {
  if (block_length < 1 || block_length > n)
    throw std::invalid_argument("build_blocks: S must satisfy 1 <= S <= n");
  BlockPartition bp;
  bp.n = n;
  bp.block_length = block_length;
  bp.num_full_blocks = n / block_length;
  const int K = bp.num_full_blocks;
  const int S = block_length;
  bp.intervals.resize(K + 1);
  bp.even_sets.resize(S);
  bp.odd_sets.resize(S);
  for (int i = 1; i <= n; ++i) {
    int k = (i - 1) / S + 1;  // block index, 1-based; remainder lands in K+1
    bp.intervals[k - 1].push_back(i);
    int s = i % S;
    if (k % 2 == 0)
      bp.even_sets[s].push_back(i);
    else
      bp.odd_sets[s].push_back(i);
  }
  return bp;
}

int default_block_length(int n, double c) {
  if (n < 2) throw std::invalid_argument("default_block_length: n >= 2 required");
  return std::max(1, static_cast<int>(std::floor(c * std::log(static_cast<double>(n)) + 0.5)));
}

}  // namespace tsreg
