#ifndef TSREG_METRICS_HPP
#define TSREG_METRICS_HPP

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "tsreg/net.hpp"
#include "tsreg/rng.hpp"

namespace tsreg {

// (1/n) sum_i (1/m_i) sum_j v_ij^2
double empirical_norm_sq(const std::vector<Eigen::VectorXd>& values,
                         const std::vector<int>& group_sizes);

// ||fhat - ftrue||_nm^2 / ||ftrue||_nm^2; throws if the target norm is zero.
double relative_error(const std::vector<Eigen::VectorXd>& fhat_vals,
                      const std::vector<Eigen::VectorXd>& ftrue_vals,
                      const std::vector<int>& group_sizes);

struct MonteCarloEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Monte Carlo estimate of ||truncate(net, A) - f*||^2 in L2(Uniform([0,1]^d)).
MonteCarloEstimate population_l2_error(const DenseNet& net, double truncation,
                                       const std::function<double(const Eigen::VectorXd&)>& f_star,
                                       int d, long mc_samples, std::uint64_t seed);

// ((1/n) sum 1/m_i)^{-1}
double harmonic_mean(const std::vector<int>& group_sizes);

// Length-S interval blocks over 1-based time indices {1..n} and the
// parity/residue index sets used to decouple mixing sequences.
struct BlockPartition {
  int n = 0;
  int block_length = 0;          // S
  int num_full_blocks = 0;       // K = floor(n/S)
  std::vector<std::vector<int>> intervals;   // I_1..I_{K+1} (last may be empty)
  std::vector<std::vector<int>> even_sets;   // J_{e,s}, s = 0..S-1 (even block index)
  std::vector<std::vector<int>> odd_sets;    // J_{o,s}
};

// I_k = ((k-1)S, kS] for k <= K, I_{K+1} = (KS, n]; J_{e,s} collects the i in
// even-indexed blocks with i % S == s, J_{o,s} the odd-indexed ones.
BlockPartition build_blocks(int n, int block_length);

// max(1, round(c * ln n)), default c = 1.
int default_block_length(int n, double c = 1.0);

}  // namespace tsreg

#endif  // TSREG_METRICS_HPP
