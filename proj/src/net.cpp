#include "tsreg/net.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace tsreg {

DenseNet::DenseNet(int input_dim, int depth, int width)
    : input_dim_(input_dim), depth_(depth), width_(width) {
  if (input_dim <= 0 || depth <= 0 || width <= 0)
    throw std::invalid_argument("net: input_dim, depth and width must be positive");
  weights_.reserve(depth + 1);
  biases_.reserve(depth + 1);
  for (int l = 0; l <= depth; ++l) {
    int in = (l == 0) ? input_dim : width;
    int out = (l == depth) ? 1 : width;
    weights_.push_back(Eigen::MatrixXd::Zero(out, in));
    biases_.push_back(Eigen::VectorXd::Zero(out));
  }
}

DenseNet DenseNet::he_init(int input_dim, int depth, int width, Rng& rng) {
  DenseNet net(input_dim, depth, width);
  for (int l = 0; l <= depth; ++l) {
    Eigen::MatrixXd& w = net.weights_[l];
    double scale = std::sqrt(2.0 / static_cast<double>(w.cols()));
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = scale * rng.normal();
  }
  return net;
}

long DenseNet::parameter_count() const {
  long count = 0;
  for (int l = 0; l <= depth_; ++l) count += weights_[l].size() + biases_[l].size();
  return count;
}

double DenseNet::forward(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != input_dim_)
    throw std::invalid_argument("net: input has length " + std::to_string(x.size()) +
                                ", expected " + std::to_string(input_dim_));
  Eigen::VectorXd a = x;
  for (int l = 0; l < depth_; ++l)
    a = ((weights_[l] * a + biases_[l]).array().max(0.0)).matrix();
  return (weights_[depth_] * a + biases_[depth_])(0);
}

Eigen::VectorXd DenseNet::forward_batch(const Eigen::Ref<const Eigen::MatrixXd>& X) const {
  if (X.cols() != input_dim_)
    throw std::invalid_argument("net: batch has " + std::to_string(X.cols()) +
                                " columns, expected " + std::to_string(input_dim_));
  Eigen::MatrixXd a = X;
  for (int l = 0; l < depth_; ++l)
    a = (((a * weights_[l].transpose()).rowwise() + biases_[l].transpose()).array().max(0.0))
            .matrix();
  return (a * weights_[depth_].transpose()).col(0).array() + biases_[depth_](0);
}

void DenseNet::check_finite() const {
  for (int l = 0; l <= depth_; ++l) {
    if (!weights_[l].allFinite() || !biases_[l].allFinite())
      throw std::runtime_error("net: non-finite parameter in layer " + std::to_string(l));
  }
}

Gradients Gradients::zeros_like(const DenseNet& net) {
  Gradients g;
  for (int l = 0; l <= net.depth(); ++l) {
    g.weights.push_back(Eigen::MatrixXd::Zero(net.weights()[l].rows(), net.weights()[l].cols()));
    g.biases.push_back(Eigen::VectorXd::Zero(net.biases()[l].size()));
  }
  return g;
}

MomentumState MomentumState::zeros_like(const DenseNet& net) {
  MomentumState s;
  for (int l = 0; l <= net.depth(); ++l) {
    s.weights.push_back(Eigen::MatrixXd::Zero(net.weights()[l].rows(), net.weights()[l].cols()));
    s.biases.push_back(Eigen::VectorXd::Zero(net.biases()[l].size()));
  }
  return s;
}

double truncate(double value, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("truncate: threshold must be positive");
  if (value > threshold) return threshold;
  if (value < -threshold) return -threshold;
  return value;
}

std::pair<Gradients, double> backward(const DenseNet& net, const Batch& batch) {
  const Eigen::Index N = batch.x.rows();
  if (N == 0) throw std::invalid_argument("backward: empty batch");
  if (batch.x.cols() != net.input_dim())
    throw std::invalid_argument("backward: input dimension mismatch");
  if (batch.y.size() != N || batch.w.size() != N)
    throw std::invalid_argument("backward: batch shape mismatch");

  const int L = net.depth();
  // activations[l] is the input to layer l
  std::vector<Eigen::MatrixXd> activations(L + 1);
  std::vector<Eigen::MatrixXd> pre(L);  // hidden pre-activations
  activations[0] = batch.x;
  for (int l = 0; l < L; ++l) {
    pre[l] = (activations[l] * net.weights()[l].transpose()).rowwise() +
             net.biases()[l].transpose();
    activations[l + 1] = pre[l].array().max(0.0).matrix();
  }
  Eigen::VectorXd f =
      (activations[L] * net.weights()[L].transpose()).col(0).array() + net.biases()[L](0);

  Eigen::ArrayXd resid = f.array() - batch.y.array();
  double loss = (batch.w.array() * resid.square()).sum();

  Gradients grads = Gradients::zeros_like(net);
  // dL/df, N x 1
  Eigen::MatrixXd delta = (2.0 * batch.w.array() * resid).matrix();
  grads.weights[L] = delta.transpose() * activations[L];
  grads.biases[L](0) = delta.sum();
  for (int l = L - 1; l >= 0; --l) {
    // subgradient 0 at the kink: strict positivity mask
    Eigen::MatrixXd mask = (pre[l].array() > 0.0).cast<double>();
    delta = ((delta * net.weights()[l + 1]).array() * mask.array()).matrix();
    grads.weights[l] = delta.transpose() * activations[l];
    grads.biases[l] = delta.colwise().sum().transpose();
  }
  return {std::move(grads), loss};
}

void sgd_step(DenseNet& net, const Gradients& grads, double lr, MomentumState& state,
              double momentum) {
  if (!(lr > 0.0)) throw std::invalid_argument("sgd_step: learning rate must be positive");
  if (momentum < 0.0 || momentum >= 1.0)
    throw std::invalid_argument("sgd_step: momentum must lie in [0,1)");
  for (int l = 0; l <= net.depth(); ++l) {
    if (grads.weights[l].rows() != net.weights()[l].rows() ||
        grads.weights[l].cols() != net.weights()[l].cols() ||
        grads.biases[l].size() != net.biases()[l].size())
      throw std::invalid_argument("sgd_step: gradient shape mismatch at layer " +
                                  std::to_string(l));
    state.weights[l] = momentum * state.weights[l] + grads.weights[l];
    state.biases[l] = momentum * state.biases[l] + grads.biases[l];
    net.weights()[l] -= lr * state.weights[l];
    net.biases()[l] -= lr * state.biases[l];
    if (!net.weights()[l].allFinite() || !net.biases()[l].allFinite())
      throw std::runtime_error("sgd_step: divergence in layer " + std::to_string(l));
  }
}

namespace {

void write_row(std::ofstream& os, const double* data, Eigen::Index count) {
  char buf[32];
  for (Eigen::Index k = 0; k < count; ++k) {
    std::snprintf(buf, sizeof(buf), "%.17g", data[k]);
    os << buf << (k + 1 < count ? ' ' : '\n');
  }
}

}  // namespace

void save_checkpoint(const DenseNet& net, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("checkpoint: cannot open for writing: " + path);
  os << "tsreg-net 1\n";
  os << net.input_dim() << ' ' << net.depth() << ' ' << net.width() << '\n';
  for (int l = 0; l <= net.depth(); ++l) {
    const Eigen::MatrixXd& w = net.weights()[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      Eigen::RowVectorXd row = w.row(r);
      write_row(os, row.data(), row.size());
    }
    write_row(os, net.biases()[l].data(), net.biases()[l].size());
  }
  if (!os) throw std::runtime_error("checkpoint: write failed: " + path);
}

DenseNet load_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("checkpoint: cannot open: " + path);
  std::string tag;
  int version = 0;
  is >> tag >> version;
  if (tag != "tsreg-net" || version != 1)
    throw std::runtime_error("checkpoint: unrecognized format tag in " + path);
  int d = 0, L = 0, r = 0;
  is >> d >> L >> r;
  if (!is) throw std::runtime_error("checkpoint: bad header in " + path);
  DenseNet net(d, L, r);
  for (int l = 0; l <= L; ++l) {
    Eigen::MatrixXd& w = net.weights()[l];
    for (Eigen::Index row = 0; row < w.rows(); ++row)
      for (Eigen::Index col = 0; col < w.cols(); ++col) is >> w(row, col);
    for (Eigen::Index k = 0; k < net.biases()[l].size(); ++k) is >> net.biases()[l](k);
  }
  if (!is) throw std::runtime_error("checkpoint: truncated parameters in " + path);
  net.check_finite();
  return net;
}

}  // namespace tsreg
