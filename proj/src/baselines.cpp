#include "tsreg/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "tsreg/metrics.hpp"
#include "tsreg/rng.hpp"

namespace tsreg {

namespace {

Eigen::MatrixXd flatten_x(const PanelDataset& panel) {
  Eigen::MatrixXd x(panel.total_observations(), panel.d);
  long row = 0;
  for (int i = 0; i < panel.n; ++i) {
    x.middleRows(row, panel.group_sizes[i]) = panel.x[i];
    row += panel.group_sizes[i];
  }
  return x;
}

Eigen::VectorXd flatten_y(const PanelDataset& panel) {
  Eigen::VectorXd y(panel.total_observations());
  long row = 0;
  for (int i = 0; i < panel.n; ++i) {
    y.segment(row, panel.group_sizes[i]) = panel.y[i];
    row += panel.group_sizes[i];
  }
  return y;
}

}  // namespace

KnnModel knn_fit(const PanelDataset& train, int k) {
  if (train.total_observations() == 0) throw std::invalid_argument("knn: empty training set");
  KnnModel model;
  model.points = flatten_x(train);
  model.responses = flatten_y(train);
  if (k < 1 || k > model.points.rows())
    throw std::invalid_argument("knn: k must lie in [1, N]");
  model.k = k;
  return model;
}

Eigen::VectorXd knn_predict(const KnnModel& model,
                            const Eigen::Ref<const Eigen::MatrixXd>& query) {
  const long N = model.points.rows();
  Eigen::VectorXd predictions(query.rows());
  std::vector<long> idx(N);
  Eigen::VectorXd dist(N);
  for (Eigen::Index q = 0; q < query.rows(); ++q) {
    dist = (model.points.rowwise() - query.row(q)).rowwise().squaredNorm();
    std::iota(idx.begin(), idx.end(), 0L);
    auto closer = [&dist](long a, long b) {
      return dist(a) < dist(b) || (dist(a) == dist(b) && a < b);
    };
    std::nth_element(idx.begin(), idx.begin() + (model.k - 1), idx.end(), closer);
    double sum = 0.0;
    for (int t = 0; t < model.k; ++t) sum += model.responses(idx[t]);
    predictions(q) = sum / model.k;
  }
  return predictions;
}

Eigen::VectorXd knn_fit_predict(const PanelDataset& train, int k,
                                const Eigen::Ref<const Eigen::MatrixXd>& query) {
  return knn_predict(knn_fit(train, k), query);
}

namespace {

Eigen::MatrixXd gaussian_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                double bandwidth) {
  Eigen::MatrixXd sq = -2.0 * a * b.transpose();
  sq.colwise() += a.rowwise().squaredNorm();
  sq.rowwise() += b.rowwise().squaredNorm().transpose();
  return (-sq.array().max(0.0) / (2.0 * bandwidth * bandwidth)).exp().matrix();
}

}  // namespace

KrrModel krr_fit(const PanelDataset& train, double bandwidth, double alpha) {
  if (!(alpha > 0.0) || !(bandwidth > 0.0))
    throw std::invalid_argument("krr: bandwidth and alpha must be positive");
  KrrModel model;
  model.points = flatten_x(train);
  model.bandwidth = bandwidth;
  model.alpha = alpha;
  Eigen::VectorXd y = flatten_y(train);
  const long N = model.points.rows();
  if (N == 0) throw std::invalid_argument("krr: empty training set");

  Eigen::MatrixXd gram = gaussian_kernel(model.points, model.points, bandwidth);
  gram.diagonal().array() += alpha;

  // Cholesky with jitter escalation: 1e-10 I, x10, up to 3 retries
  double jitter = 0.0;
  for (int attempt = 0;; ++attempt) {
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() == Eigen::Success) {
      model.dual_coefficients = llt.solve(y);
      double rel_residual = (gram * model.dual_coefficients - y).norm() /
                            std::max(1e-300, y.norm());
      if (y.norm() == 0.0) rel_residual = (gram * model.dual_coefficients).norm();
      if (rel_residual <= 1e-8) return model;
    }
    if (attempt >= 3)
      throw std::runtime_error("krr: linear system remained singular after jitter escalation");
    jitter = (jitter == 0.0) ? 1e-10 : jitter * 10.0;
    gram.diagonal().array() += jitter;
  }
}

double krr_predict(const KrrModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
  Eigen::VectorXd k =
      (-(model.points.rowwise() - x.transpose()).rowwise().squaredNorm().array() /
       (2.0 * model.bandwidth * model.bandwidth))
          .exp()
          .matrix();
  return k.dot(model.dual_coefficients);
}

Eigen::VectorXd krr_predict_batch(const KrrModel& model,
                                  const Eigen::Ref<const Eigen::MatrixXd>& query) {
  return gaussian_kernel(Eigen::MatrixXd(query), model.points, model.bandwidth) *
         model.dual_coefficients;
}

double median_heuristic_bandwidth(const PanelDataset& train, std::uint64_t seed) {
  Eigen::MatrixXd x = flatten_x(train);
  const long N = x.rows();
  Rng rng(seed);
  const long pairs = std::min<long>(2000, N * (N - 1) / 2);
  if (pairs == 0) return 1.0;
  std::vector<double> dists;
  dists.reserve(pairs);
  for (long t = 0; t < pairs; ++t) {
    long a = static_cast<long>(rng.below(N));
    long b = static_cast<long>(rng.below(N));
    if (a == b) b = (b + 1) % N;
    dists.push_back((x.row(a) - x.row(b)).norm());
  }
  std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
  double med = dists[dists.size() / 2];
  return med > 0.0 ? med : 1.0;
}

namespace {

// restrict a panel to a subset of time indices
PanelDataset subset_panel(const PanelDataset& panel, const std::vector<int>& indices) {
  PanelDataset out;
  out.n = static_cast<int>(indices.size());
  out.d = panel.d;
  for (int i : indices) {
    out.group_sizes.push_back(panel.group_sizes[i]);
    out.x.push_back(panel.x[i]);
    out.y.push_back(panel.y[i]);
    if (panel.has_f_true()) out.f_true.push_back(panel.f_true[i]);
  }
  return out;
}

std::vector<std::vector<int>> five_folds(int n, Rng& rng) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  std::vector<std::vector<int>> folds(5);
  for (int i = 0; i < n; ++i) folds[i % 5].push_back(order[i]);
  return folds;
}

double fold_mse(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  return (pred - truth).squaredNorm() / truth.size();
}

}  // namespace

int knn_cross_validate(const PanelDataset& train, const std::vector<int>& k_grid,
                       std::uint64_t seed) {
  Rng rng(seed);
  auto folds = five_folds(train.n, rng);
  double best_score = std::numeric_limits<double>::infinity();
  int best_k = k_grid.front();
  for (int k : k_grid) {
    double score = 0.0;
    for (const auto& fold : folds) {
      if (fold.empty()) continue;
      std::vector<int> rest;
      for (int i = 0; i < train.n; ++i)
        if (std::find(fold.begin(), fold.end(), i) == fold.end()) rest.push_back(i);
      PanelDataset tr = subset_panel(train, rest);
      PanelDataset va = subset_panel(train, fold);
      int k_eff = std::min<long>(k, tr.total_observations());
      KnnModel model = knn_fit(tr, k_eff);
      for (int i = 0; i < va.n; ++i)
        score += fold_mse(knn_predict(model, va.x[i]), va.y[i]);
    }
    if (score < best_score) {
      best_score = score;
      best_k = k;
    }
  }
  return best_k;
}

KrrHyperparams krr_cross_validate(const PanelDataset& train, std::uint64_t seed) {
  Rng rng(seed);
  auto folds = five_folds(train.n, rng);
  double med = median_heuristic_bandwidth(train, derive_seed(seed, 1));
  std::vector<double> bandwidths = {0.5 * med, med, 2.0 * med};
  std::vector<double> alphas = {1e-2, 1e-1, 1.0, 1e1, 1e2};
  KrrHyperparams best;
  double best_score = std::numeric_limits<double>::infinity();
  for (double h : bandwidths) {
    for (double alpha : alphas) {
      double score = 0.0;
      for (const auto& fold : folds) {
        if (fold.empty()) continue;
        std::vector<int> rest;
        for (int i = 0; i < train.n; ++i)
          if (std::find(fold.begin(), fold.end(), i) == fold.end()) rest.push_back(i);
        KrrModel model = krr_fit(subset_panel(train, rest), h, alpha);
        PanelDataset va = subset_panel(train, fold);
        for (int i = 0; i < va.n; ++i)
          score += fold_mse(krr_predict_batch(model, va.x[i]), va.y[i]);
      }
      if (score < best_score) {
        best_score = score;
        best = {h, alpha};
      }
    }
  }
  return best;
}

}  // namespace tsreg
