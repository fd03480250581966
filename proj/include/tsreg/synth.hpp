#ifndef TSREG_SYNTH_HPP
#define TSREG_SYNTH_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "tsreg/panel.hpp"
#include "tsreg/rng.hpp"

namespace tsreg {

// Quartered group-size pattern: first n/4 time indices get 16*m_mult
// measurements, then 24*m_mult, 20*m_mult, 10*m_mult. n must be divisible
// by 4.
std::vector<int> make_group_sizes(int n, int m_mult);

// Sticky design points: row 1 is i.i.d. Uniform([0,1]^d); for i > 1 each
// column j with a predecessor independently repeats x_{i-1,j} with
// probability phi, otherwise resamples. Columns j >= m_{i-1} are always
// fresh.
std::vector<Eigen::MatrixXd> sample_designs(int n, const std::vector<int>& group_sizes,
                                            int d, double phi, Rng& rng);

// Product-sine basis h_t(x) = prod_j (1/(sqrt(2) pi)) sin(t pi x_j),
// t in 1..25.
double eval_basis(int t, const Eigen::Ref<const Eigen::VectorXd>& x);

inline constexpr int kSpatialBasisSize = 25;
inline constexpr double kSpatialArCoefficient = 0.5;

// Per-time random function gamma_i(x) = sum_t c_t h_t(x) whose coefficients
// follow the AR recursion c_t <- 0.5 c_t + t^{-1} b_{i,t}.
struct SpatialNoiseState {
  Eigen::VectorXd coefficients = Eigen::VectorXd::Zero(kSpatialBasisSize);
  int time_index = 0;
  double innovation_scale = 1.0;  // std dev of b_{i,t}

  double evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

void spatial_noise_step(SpatialNoiseState& state, Rng& rng);

// Vector AR(1) measurement errors in R^M with coefficient rho: row i is the
// first m_i entries of eps_i = rho * eps_{i-1} + xi_i, xi i.i.d.
// N(0, sigma_xi^2 I).
std::vector<Eigen::VectorXd> measurement_errors(const std::vector<int>& group_sizes,
                                                double rho, double sigma_xi, Rng& rng);

inline constexpr double kMeasurementArCoefficient = 0.3;
inline constexpr double kDefaultStickyProbability = 0.1;

enum class ScenarioId : int {
  Step = 1,
  SineSum = 2,
  TwoLevel = 3,
  ThreeLevel = 4,
  Interaction = 5,
  QuadSine = 6,
};

ScenarioId scenario_from_int(int id);

// The six synthetic regression functions on [0,1]^d, d >= 2. Scenario 3's
// first g_1 component reads the radical as covering q_1 only; set
// sqrt_covers_sum to evaluate sqrt(q_1 + sum q_i q_{i+1}) instead.
double scenario_f(ScenarioId id, const Eigen::Ref<const Eigen::VectorXd>& q,
                  bool sqrt_covers_sum = false);

struct PanelNoise {
  double sigma_xi = 1.0;       // measurement-error innovation scale
  double sigma_b = 1.0;        // spatial-noise innovation scale
  double phi = kDefaultStickyProbability;
  int spatial_burn_in = 100;   // AR warm-up steps before i = 1
  bool scenario3_sqrt_covers_sum = false;
};

// y_ij = f*(x_ij) + gamma_i(x_ij) + eps_ij, deterministic given the seed.
PanelDataset generate_panel(ScenarioId scenario, int d, int n, int m_mult,
                            const PanelNoise& noise, std::uint64_t seed);

// Sticky designs supported on a fixed d*-dimensional bi-Lipschitz manifold:
// latent u in [0,1]^{d*} maps through
// (cos 2 pi u_1, sin 2 pi u_1, u_2, ..., u_{d*}, 0, ..., 0), each coordinate
// rescaled by v -> (v+1)/2. Requires 1 <= d_star < d.
std::vector<Eigen::MatrixXd> manifold_designs(int n, const std::vector<int>& group_sizes,
                                              int d, int d_star, double phi, Rng& rng);

Eigen::VectorXd manifold_embed(const Eigen::Ref<const Eigen::VectorXd>& u, int d);

// Same generator as generate_panel but with manifold-supported designs.
PanelDataset generate_manifold_panel(ScenarioId scenario, int d, int d_star, int n,
                                     int m_mult, const PanelNoise& noise,
                                     std::uint64_t seed);

}  // namespace tsreg

#endif  // TSREG_SYNTH_HPP
