#ifndef TSREG_BASELINES_HPP
#define TSREG_BASELINES_HPP

#include <Eigen/Dense>
#include <vector>

#include "tsreg/panel.hpp"

namespace tsreg {

// k-nearest-neighbor mean over the flattened panel. Ties on equal distance
// break toward the lower flat index.
struct KnnModel {
  Eigen::MatrixXd points;  // N x d
  Eigen::VectorXd responses;
  int k = 1;
};

KnnModel knn_fit(const PanelDataset& train, int k);
Eigen::VectorXd knn_predict(const KnnModel& model, const Eigen::Ref<const Eigen::MatrixXd>& query);
Eigen::VectorXd knn_fit_predict(const PanelDataset& train, int k,
                                const Eigen::Ref<const Eigen::MatrixXd>& query);

// Gaussian-kernel ridge regression: dual solve (K + alpha I) c = y with
// k(x, x') = exp(-||x - x'||^2 / (2 h^2)).
struct KrrModel {
  Eigen::MatrixXd points;
  Eigen::VectorXd dual_coefficients;
  double bandwidth = 1.0;
  double alpha = 1.0;
};

KrrModel krr_fit(const PanelDataset& train, double bandwidth, double alpha);
double krr_predict(const KrrModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);
Eigen::VectorXd krr_predict_batch(const KrrModel& model,
                                  const Eigen::Ref<const Eigen::MatrixXd>& query);

// Median pairwise distance over a subsample; the usual bandwidth heuristic.
double median_heuristic_bandwidth(const PanelDataset& train, std::uint64_t seed = 0);

// 5-fold cross-validation over whole time indices. Grids follow the bench
// defaults: k in {5, 10, 15}; alpha log-spaced in [1e-2, 1e2] with bandwidth
// = median heuristic x {0.5, 1, 2}.
int knn_cross_validate(const PanelDataset& train, const std::vector<int>& k_grid,
                       std::uint64_t seed);
struct KrrHyperparams {
  double bandwidth = 1.0;
  double alpha = 1.0;
};
KrrHyperparams krr_cross_validate(const PanelDataset& train, std::uint64_t seed);

}  // namespace tsreg

#endif  // TSREG_BASELINES_HPP
