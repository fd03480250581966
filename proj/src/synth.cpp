#include "tsreg/synth.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace tsreg {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

std::vector<int> make_group_sizes(int n, int m_mult) {
  if (n <= 0 || n % 4 != 0)
    throw std::invalid_argument("group_sizes: n must be a positive multiple of 4");
  if (m_mult < 1) throw std::invalid_argument("group_sizes: m_mult must be >= 1");
  const int quarter = n / 4;
  const int bases[4] = {16, 24, 20, 10};
  std::vector<int> sizes(n);
  for (int i = 0; i < n; ++i) sizes[i] = bases[i / quarter] * m_mult;
  return sizes;
}

std::vector<Eigen::MatrixXd> sample_designs(int n, const std::vector<int>& group_sizes,
                                            int d, double phi, Rng& rng) {
  if (phi < 0.0 || phi > 1.0) throw std::invalid_argument("sample_designs: phi in [0,1]");
  if (static_cast<int>(group_sizes.size()) != n)
    throw std::invalid_argument("sample_designs: group_sizes length mismatch");
  std::vector<Eigen::MatrixXd> x(n);
  for (int i = 0; i < n; ++i) {
    const int m = group_sizes[i];
    if (m <= 0) throw std::invalid_argument("sample_designs: nonpositive group size");
    x[i].resize(m, d);
    for (int j = 0; j < m; ++j) {
      bool copy = i > 0 && j < group_sizes[i - 1] && rng.uniform() < phi;
      if (copy) {
        x[i].row(j) = x[i - 1].row(j);
      } else {
        for (int k = 0; k < d; ++k) x[i](j, k) = rng.uniform();
      }
    }
  }
  return x;
}

double eval_basis(int t, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (t < 1 || t > kSpatialBasisSize)
    throw std::invalid_argument("eval_basis: t must lie in 1..25");
  double value = 1.0;
  for (Eigen::Index k = 0; k < x.size(); ++k)
    value *= std::sin(t * kPi * x(k)) / (std::sqrt(2.0) * kPi);
  return value;
}

double SpatialNoiseState::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  double value = 0.0;
  for (int t = 1; t <= kSpatialBasisSize; ++t)
    value += coefficients(t - 1) * eval_basis(t, x);
  return value;
}

void spatial_noise_step(SpatialNoiseState& state, Rng& rng) {
  for (int t = 1; t <= kSpatialBasisSize; ++t) {
    double innovation = state.innovation_scale * rng.normal();
    state.coefficients(t - 1) =
        kSpatialArCoefficient * state.coefficients(t - 1) + innovation / t;
  }
  ++state.time_index;
}

std::vector<Eigen::VectorXd> measurement_errors(const std::vector<int>& group_sizes,
                                                double rho, double sigma_xi, Rng& rng) {
  const int n = static_cast<int>(group_sizes.size());
  int max_m = 0;
  for (int m : group_sizes) max_m = std::max(max_m, m);
  Eigen::VectorXd state = Eigen::VectorXd::Zero(max_m);
  std::vector<Eigen::VectorXd> errors(n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < max_m; ++k)
      state(k) = rho * state(k) + sigma_xi * rng.normal();
    errors[i] = state.head(group_sizes[i]);
  }
  return errors;
}

ScenarioId scenario_from_int(int id) {
  if (id < 1 || id > 6) throw std::invalid_argument("scenario: id must lie in 1..6");
  return static_cast<ScenarioId>(id);
}

namespace {

double scenario_step(const Eigen::Ref<const Eigen::VectorXd>& q) {
  const int d = static_cast<int>(q.size());
  const int half = d / 2;
  Eigen::VectorXd centers[4];
  const double first[4] = {0.25, 0.5, 0.75, 0.5};
  const double second[4] = {0.5, 0.25, 0.5, 0.75};
  double dist[4];
  for (int c = 0; c < 4; ++c) {
    Eigen::VectorXd center(d);
    center.head(half).setConstant(first[c]);
    center.tail(d - half).setConstant(second[c]);
    dist[c] = (q - center).norm();
  }
  const double values[3] = {2.0, 1.0, 0.0};
  for (int c = 0; c < 3; ++c) {
    double other_min = std::numeric_limits<double>::infinity();
    for (int o = 0; o < 4; ++o)
      if (o != c) other_min = std::min(other_min, dist[o]);
    if (dist[c] < other_min) return values[c];
  }
  return -1.0;
}

double scenario_two_level(const Eigen::Ref<const Eigen::VectorXd>& q, bool sqrt_covers_sum) {
  const int d = static_cast<int>(q.size());
  double cross = 0.0;
  for (int i = 0; i + 1 < d; ++i) cross += q(i) * q(i + 1);
  double a = sqrt_covers_sum ? std::sqrt(q(0) + cross) : std::sqrt(q(0)) + cross;
  double b = std::cos(kTwoPi * q.sum());
  return std::sqrt(a + b * b) + a * a * b;
}

double scenario_three_level(const Eigen::Ref<const Eigen::VectorXd>& q) {
  const int d = static_cast<int>(q.size());
  double tail = 0.0;
  for (int i = 1; i < d; ++i) tail += q(i);
  double a = std::sqrt(q(0) * q(0) + tail);
  double sum = q.sum();
  double b = sum * sum * sum;
  // g2 = (|a|, b * a), g3 = u + sqrt(u + v)
  double u = std::abs(a);
  double v = b * a;
  return u + std::sqrt(u + v);
}

double scenario_interaction(const Eigen::Ref<const Eigen::VectorXd>& q) {
  const int d = static_cast<int>(q.size());
  if (d == 2) return std::sin(kTwoPi * q(0) * q(1));
  if (d == 3) return std::sin(kTwoPi * q(0) * q(1)) + std::cos(kTwoPi * q(2));
  // pairs (q1 q2), (q3 q4), ... alternating sin/cos; odd d > 4 ends with a
  // lone sin(2 pi q_d)
  double value = 0.0;
  int pair = 0;
  int i = 0;
  for (; i + 1 < d; i += 2, ++pair) {
    double arg = kTwoPi * q(i) * q(i + 1);
    value += (pair % 2 == 0) ? std::sin(arg) : std::cos(arg);
  }
  if (i < d) value += std::sin(kTwoPi * q(i));
  return value;
}

double scenario_quad_sine(const Eigen::Ref<const Eigen::VectorXd>& q) {
  const int d = static_cast<int>(q.size());
  const int half = d / 2;
  double quad = 0.0, lin = 0.0;
  for (int i = 0; i < half; ++i) quad += q(i) * q(i);
  for (int i = half; i < d; ++i) lin += q(i);
  return quad * std::sin(lin);
}

}  // namespace

double scenario_f(ScenarioId id, const Eigen::Ref<const Eigen::VectorXd>& q,
                  bool sqrt_covers_sum) {
  if (q.size() < 2) throw std::invalid_argument("scenario_f: d >= 2 required");
  switch (id) {
    case ScenarioId::Step:
      return scenario_step(q);
    case ScenarioId::SineSum:
      return std::sin(q.sum());
    case ScenarioId::TwoLevel:
      return scenario_two_level(q, sqrt_covers_sum);
    case ScenarioId::ThreeLevel:
      return scenario_three_level(q);
    case ScenarioId::Interaction:
      return scenario_interaction(q);
    case ScenarioId::QuadSine:
      return scenario_quad_sine(q);
  }
  throw std::invalid_argument("scenario_f: unknown scenario id");
}

namespace {

PanelDataset assemble_panel(ScenarioId scenario, int d,
                            std::vector<Eigen::MatrixXd> designs,
                            const std::vector<int>& group_sizes,
                            const PanelNoise& noise, Rng& rng) {
  const int n = static_cast<int>(group_sizes.size());
  PanelDataset panel;
  panel.n = n;
  panel.d = d;
  panel.group_sizes = group_sizes;
  panel.x = std::move(designs);
  panel.y.resize(n);
  panel.f_true.resize(n);

  SpatialNoiseState gamma;
  gamma.innovation_scale = noise.sigma_b;
  for (int b = 0; b < noise.spatial_burn_in; ++b) spatial_noise_step(gamma, rng);
  std::vector<Eigen::VectorXd> eps =
      measurement_errors(group_sizes, kMeasurementArCoefficient, noise.sigma_xi, rng);

  for (int i = 0; i < n; ++i) {
    spatial_noise_step(gamma, rng);
    const int m = group_sizes[i];
    panel.y[i].resize(m);
    panel.f_true[i].resize(m);
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXd point = panel.x[i].row(j).transpose();
      double f = scenario_f(scenario, point, noise.scenario3_sqrt_covers_sum);
      panel.f_true[i](j) = f;
      panel.y[i](j) = f + gamma.evaluate(point) + eps[i](j);
    }
  }
  panel.validate();
  return panel;
}

}  // namespace

PanelDataset generate_panel(ScenarioId scenario, int d, int n, int m_mult,
                            const PanelNoise& noise, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> sizes = make_group_sizes(n, m_mult);
  std::vector<Eigen::MatrixXd> designs = sample_designs(n, sizes, d, noise.phi, rng);
  return assemble_panel(scenario, d, std::move(designs), sizes, noise, rng);
}

Eigen::VectorXd manifold_embed(const Eigen::Ref<const Eigen::VectorXd>& u, int d) {
  const int d_star = static_cast<int>(u.size());
  if (d_star < 1 || d_star >= d)
    throw std::invalid_argument("manifold_embed: require 1 <= d_star < d");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(d);
  v(0) = std::cos(kTwoPi * u(0));
  v(1) = std::sin(kTwoPi * u(0));
  for (int k = 1; k < d_star; ++k) v(1 + k) = u(k);
  return ((v.array() + 1.0) / 2.0).matrix();
}

std::vector<Eigen::MatrixXd> manifold_designs(int n, const std::vector<int>& group_sizes,
                                              int d, int d_star, double phi, Rng& rng) {
  if (d_star < 1 || d_star >= d)
    throw std::invalid_argument("manifold_designs: require 1 <= d_star < d");
  // sticky mechanism acts in latent space
  std::vector<Eigen::MatrixXd> latent = sample_designs(n, group_sizes, d_star, phi, rng);
  std::vector<Eigen::MatrixXd> x(n);
  for (int i = 0; i < n; ++i) {
    x[i].resize(group_sizes[i], d);
    for (int j = 0; j < group_sizes[i]; ++j)
      x[i].row(j) = manifold_embed(latent[i].row(j).transpose(), d).transpose();
  }
  return x;
}

PanelDataset generate_manifold_panel(ScenarioId scenario, int d, int d_star, int n,
                                     int m_mult, const PanelNoise& noise,
                                     std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> sizes = make_group_sizes(n, m_mult);
  std::vector<Eigen::MatrixXd> designs =
      manifold_designs(n, sizes, d, d_star, noise.phi, rng);
  return assemble_panel(scenario, d, std::move(designs), sizes, noise, rng);
}

}  // namespace tsreg
