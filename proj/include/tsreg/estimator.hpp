#ifndef TSREG_ESTIMATOR_HPP
#define TSREG_ESTIMATOR_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "tsreg/net.hpp"
#include "tsreg/panel.hpp"

namespace tsreg {

enum class ArchCase { Wide, Deep };

struct SizingConstants {
  double c_L = 1.0;
  double c_r = 1.0;
  double c_A = 1.0;
};

// Architecture derived from the sample size: either a wide network with
// L ~ c_L log(nm), r ~ c_r (nm)^{K/(2(2p+K))}, or a deep one with the roles
// swapped; A = c_A max(sigma_eps, sigma_gamma) sqrt(log(nm)).
struct ArchSpec {
  ArchCase arch_case = ArchCase::Wide;
  int depth = 1;       // L
  int width = 1;       // r
  double truncation = 1.0;  // A
  double smoothness_p = 2.0;
  int order_K = 1;
  SizingConstants constants;
};

ArchSpec size_architecture(long n, double m_harmonic, double p, int K, ArchCase arch_case,
                           const SizingConstants& constants, double sigma_eps,
                           double sigma_gamma);

// Weight of observation (i, j) is 1/(n * m_i); they sum to 1 over the panel.
std::vector<Eigen::VectorXd> empirical_weights(const std::vector<int>& group_sizes);

struct TrainConfig {
  int epochs = 400;
  int batch_size = 0;        // 0 = full batch
  double learning_rate = 0.05;
  double lr_decay = 1.0;     // multiplicative
  int lr_decay_every = 0;    // epochs; 0 = no decay
  double momentum = 0.9;
  int patience = 0;          // 0 = no early stopping; otherwise epochs without
                             // validation improvement before stopping
  double holdout_fraction = 0.1;  // fraction of time indices held out when
                                  // patience > 0
  std::uint64_t seed = 0;
};

struct TraceRow {
  int epoch = 0;
  double objective = 0.0;
  double learning_rate = 0.0;
};

struct FitResult {
  DenseNet net;
  std::vector<TraceRow> trace;  // trace[0] is the initial objective
};

// Minimizes the weighted empirical squared loss
// (1/n) sum_i (1/m_i) sum_j (y_ij - f(x_ij))^2 over F(L, r) by momentum SGD.
// Deterministic given (dataset, arch, cfg). Throws a training error carrying
// the epoch index if the loss becomes non-finite.
FitResult fit(const PanelDataset& dataset, const ArchSpec& arch, const TrainConfig& cfg);

double predict_truncated(const DenseNet& net, double truncation,
                         const Eigen::Ref<const Eigen::VectorXd>& x);

// Per-row truncated predictions over a whole panel.
std::vector<Eigen::VectorXd> predict_panel(const DenseNet& net, double truncation,
                                           const PanelDataset& dataset);

// Appendable CSV: epoch, objective, learning rate.
void append_trace_csv(const std::vector<TraceRow>& trace, const std::string& path);

}  // namespace tsreg

#endif  // TSREG_ESTIMATOR_HPP
