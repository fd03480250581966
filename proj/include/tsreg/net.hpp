#ifndef TSREG_NET_HPP
#define TSREG_NET_HPP

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "tsreg/rng.hpp"

namespace tsreg {

// Fully connected feedforward ReLU network with L hidden layers of equal
// width r and a scalar affine output. weights[l] maps the layer-l input to
// its output (out x in); layer 0 is d -> r, layers 1..L-1 are r -> r and the
// final entry is the r -> 1 output layer.
class DenseNet {
 public:
  // zero-initialized parameters
  DenseNet(int input_dim, int depth, int width);

  // Gaussian weights with variance 2/fan_in, zero biases.
  static DenseNet he_init(int input_dim, int depth, int width, Rng& rng);

  int input_dim() const { return input_dim_; }
  int depth() const { return depth_; }
  int width() const { return width_; }
  int num_layers() const { return depth_ + 1; }
  long parameter_count() const;

  std::vector<Eigen::MatrixXd>& weights() { return weights_; }
  std::vector<Eigen::VectorXd>& biases() { return biases_; }
  const std::vector<Eigen::MatrixXd>& weights() const { return weights_; }
  const std::vector<Eigen::VectorXd>& biases() const { return biases_; }

  double forward(const Eigen::Ref<const Eigen::VectorXd>& x) const;

  // One sample per row of X.
  Eigen::VectorXd forward_batch(const Eigen::Ref<const Eigen::MatrixXd>& X) const;

  // Throws std::runtime_error naming the first offending layer if any
  // parameter is NaN or infinite.
  void check_finite() const;

 private:
  int input_dim_;
  int depth_;
  int width_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

// Per-parameter arrays shape-congruent with a DenseNet.
struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static Gradients zeros_like(const DenseNet& net);
};

// sign(value) * min(|value|, threshold); threshold must be positive.
double truncate(double value, double threshold);

struct Batch {
  Eigen::MatrixXd x;  // N x d
  Eigen::VectorXd y;  // N
  Eigen::VectorXd w;  // N, nonnegative
};

// Loss is sum_i w_i (y_i - f(x_i))^2; gradients are its exact partials with
// the ReLU subgradient at 0 taken as 0. Throws on an empty batch.
std::pair<Gradients, double> backward(const DenseNet& net, const Batch& batch);

struct MomentumState {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  static MomentumState zeros_like(const DenseNet& net);
};

// v <- momentum * v + g; p <- p - lr * v. Throws a divergence error naming
// the layer if any parameter becomes non-finite.
void sgd_step(DenseNet& net, const Gradients& grads, double lr,
              MomentumState& state, double momentum);

// Text checkpoint, format tag "tsreg-net 1": header (d, L, r) followed by
// row-major weight rows and bias lines per layer at full precision.
void save_checkpoint(const DenseNet& net, const std::string& path);
DenseNet load_checkpoint(const std::string& path);

}  // namespace tsreg

#endif  // TSREG_NET_HPP
