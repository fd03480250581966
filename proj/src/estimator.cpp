#include "tsreg/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tsreg {

namespace {

int round_half_up_at_least_one(double v) {
  return std::max(1, static_cast<int>(std::floor(v + 0.5)));
}

}  // namespace

ArchSpec size_architecture(long n, double m_harmonic, double p, int K, ArchCase arch_case,
                           const SizingConstants& constants, double sigma_eps,
                           double sigma_gamma) {
  double nm = static_cast<double>(n) * m_harmonic;
  if (!(nm >= 2.0)) throw std::invalid_argument("size_architecture: n*m must be >= 2");
  if (p < 1.0 || K < 1) throw std::invalid_argument("size_architecture: p >= 1, K >= 1");
  if (constants.c_L <= 0.0 || constants.c_r <= 0.0 || constants.c_A <= 0.0)
    throw std::invalid_argument("size_architecture: constants must be positive");
  double log_nm = std::log(nm);
  double growth = std::pow(nm, K / (2.0 * (2.0 * p + K)));
  ArchSpec spec;
  spec.arch_case = arch_case;
  spec.smoothness_p = p;
  spec.order_K = K;
  spec.constants = constants;
  if (arch_case == ArchCase::Wide) {
    spec.depth = round_half_up_at_least_one(constants.c_L * log_nm);
    spec.width = round_half_up_at_least_one(constants.c_r * growth);
  } else {
    spec.depth = round_half_up_at_least_one(constants.c_L * log_nm * growth);
    spec.width = round_half_up_at_least_one(constants.c_r);
  }
  spec.truncation = constants.c_A * std::max(sigma_eps, sigma_gamma) * std::sqrt(log_nm);
  return spec;
}

std::vector<Eigen::VectorXd> empirical_weights(const std::vector<int>& group_sizes) {
  const int n = static_cast<int>(group_sizes.size());
  std::vector<Eigen::VectorXd> weights(n);
  for (int i = 0; i < n; ++i) {
    if (group_sizes[i] <= 0)
      throw std::invalid_argument("empirical_weights: nonpositive group size");
    weights[i] =
        Eigen::VectorXd::Constant(group_sizes[i], 1.0 / (static_cast<double>(n) * group_sizes[i]));
  }
  return weights;
}

namespace {

struct FlatPanel {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd w;
};

FlatPanel flatten(const PanelDataset& dataset, const std::vector<int>& time_indices) {
  long total = 0;
  for (int i : time_indices) total += dataset.group_sizes[i];
  FlatPanel flat;
  flat.x.resize(total, dataset.d);
  flat.y.resize(total);
  flat.w.resize(total);
  const double n_eff = static_cast<double>(time_indices.size());
  long row = 0;
  for (int i : time_indices) {
    const int m = dataset.group_sizes[i];
    flat.x.middleRows(row, m) = dataset.x[i];
    flat.y.segment(row, m) = dataset.y[i];
    flat.w.segment(row, m).setConstant(1.0 / (n_eff * m));
    row += m;
  }
  return flat;
}

double objective(const DenseNet& net, const FlatPanel& flat) {
  Eigen::ArrayXd resid = net.forward_batch(flat.x).array() - flat.y.array();
  return (flat.w.array() * resid.square()).sum();
}

}  // namespace

FitResult fit(const PanelDataset& dataset, const ArchSpec& arch, const TrainConfig& cfg) {
  dataset.validate();
  if (dataset.n == 0) throw std::invalid_argument("fit: empty dataset");
  if (cfg.epochs < 1 || !(cfg.learning_rate > 0.0))
    throw std::invalid_argument("fit: epochs and learning rate must be positive");

  Rng rng(cfg.seed);

  // optional held-out split over whole time indices
  std::vector<int> train_idx(dataset.n);
  std::iota(train_idx.begin(), train_idx.end(), 0);
  std::vector<int> valid_idx;
  if (cfg.patience > 0) {
    int n_hold = std::max(1, static_cast<int>(std::floor(dataset.n * cfg.holdout_fraction)));
    if (n_hold >= dataset.n)
      throw std::invalid_argument("fit: holdout fraction leaves no training data");
    for (int i = static_cast<int>(train_idx.size()) - 1; i > 0; --i)
      std::swap(train_idx[i], train_idx[rng.below(i + 1)]);
    valid_idx.assign(train_idx.end() - n_hold, train_idx.end());
    train_idx.resize(train_idx.size() - n_hold);
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(valid_idx.begin(), valid_idx.end());
  }

  FlatPanel train = flatten(dataset, train_idx);
  FlatPanel valid;
  if (!valid_idx.empty()) valid = flatten(dataset, valid_idx);

  const long N = train.x.rows();
  const long B = (cfg.batch_size <= 0 || cfg.batch_size > N) ? N : cfg.batch_size;

  FitResult result{DenseNet::he_init(dataset.d, arch.depth, arch.width, rng), {}};
  MomentumState momentum = MomentumState::zeros_like(result.net);

  double lr = cfg.learning_rate;
  result.trace.push_back({0, objective(result.net, train), lr});

  double best_valid = std::numeric_limits<double>::infinity();
  int epochs_since_best = 0;
  DenseNet best_net = result.net;

  std::vector<long> order(N);
  std::iota(order.begin(), order.end(), 0);
  Batch batch;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (B < N) {
      for (long i = N - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    }
    for (long start = 0; start < N; start += B) {
      long count = std::min(B, N - start);
      if (B == N) {
        batch.x = train.x;
        batch.y = train.y;
        batch.w = train.w;
      } else {
        batch.x.resize(count, dataset.d);
        batch.y.resize(count);
        batch.w.resize(count);
        for (long k = 0; k < count; ++k) {
          batch.x.row(k) = train.x.row(order[start + k]);
          batch.y(k) = train.y(order[start + k]);
          batch.w(k) = train.w(order[start + k]);
        }
      }
      auto [grads, loss] = backward(result.net, batch);
      if (!std::isfinite(loss))
        throw std::runtime_error("fit: non-finite loss at epoch " + std::to_string(epoch));
      if (count < N) {
        // keep the stochastic gradient an unbiased estimate of the full one
        double scale = static_cast<double>(N) / count;
        for (auto& g : grads.weights) g *= scale;
        for (auto& g : grads.biases) g *= scale;
      }
      try {
        sgd_step(result.net, grads, lr, momentum, cfg.momentum);
      } catch (const std::runtime_error& e) {
        throw std::runtime_error(std::string(e.what()) + " (epoch " + std::to_string(epoch) +
                                 ")");
      }
    }
    double train_obj = objective(result.net, train);
    if (!std::isfinite(train_obj))
      throw std::runtime_error("fit: non-finite objective at epoch " + std::to_string(epoch));
    result.trace.push_back({epoch, train_obj, lr});

    if (cfg.lr_decay_every > 0 && epoch % cfg.lr_decay_every == 0) lr *= cfg.lr_decay;

    if (!valid_idx.empty()) {
      double valid_obj = objective(result.net, valid);
      if (valid_obj < best_valid) {
        best_valid = valid_obj;
        best_net = result.net;
        epochs_since_best = 0;
      } else if (++epochs_since_best >= cfg.patience) {
        result.net = best_net;
        return result;
      }
    }
  }
  if (!valid_idx.empty()) result.net = best_net;
  return result;
}

double predict_truncated(const DenseNet& net, double truncation,
                         const Eigen::Ref<const Eigen::VectorXd>& x) {
  return truncate(net.forward(x), truncation);
}

std::vector<Eigen::VectorXd> predict_panel(const DenseNet& net, double truncation,
                                           const PanelDataset& dataset) {
  std::vector<Eigen::VectorXd> preds(dataset.n);
  for (int i = 0; i < dataset.n; ++i) {
    Eigen::VectorXd raw = net.forward_batch(dataset.x[i]);
    preds[i] = raw.unaryExpr([truncation](double v) { return truncate(v, truncation); });
  }
  return preds;
}

void append_trace_csv(const std::vector<TraceRow>& trace, const std::string& path) {
  bool fresh = !std::ifstream(path).good();
  std::ofstream os(path, std::ios::app);
  if (!os) throw std::runtime_error("trace: cannot open for append: " + path);
  if (fresh) os << "epoch,objective,learning_rate\n";
  char buf[96];
  for (const TraceRow& row : trace) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g\n", row.epoch, row.objective,
                  row.learning_rate);
    os << buf;
  }
}

}  // namespace tsreg
