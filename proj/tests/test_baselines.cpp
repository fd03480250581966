#include <doctest.h>

#include <cmath>

#include "tsreg/baselines.hpp"
#include "tsreg/rng.hpp"

using namespace tsreg;

namespace {

PanelDataset flat_panel(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  PanelDataset panel;
  panel.n = 1;
  panel.d = static_cast<int>(x.cols());
  panel.group_sizes = {static_cast<int>(x.rows())};
  panel.x = {x};
  panel.y = {y};
  return panel;
}

}  // namespace

TEST_CASE("knn: k = N predicts the global mean everywhere") {
  Eigen::MatrixXd x(4, 1);
  x << 0.1, 0.3, 0.6, 0.9;
  Eigen::VectorXd y(4);
  y << 1.0, 2.0, 3.0, 6.0;
  Eigen::MatrixXd q(2, 1);
  q << 0.2, 0.8;
  Eigen::VectorXd pred = knn_fit_predict(flat_panel(x, y), 4, q);
  CHECK(pred(0) == doctest::Approx(3.0));
  CHECK(pred(1) == doctest::Approx(3.0));
}

TEST_CASE("knn: self-match with k = 1") {
  Eigen::MatrixXd x(3, 2);
  x << 0.1, 0.1, 0.5, 0.5, 0.9, 0.9;
  Eigen::VectorXd y(3);
  y << 7.0, 8.0, 9.0;
  Eigen::VectorXd pred = knn_fit_predict(flat_panel(x, y), 1, x.row(1));
  CHECK(pred(0) == 8.0);
}

TEST_CASE("knn: equidistant tie breaks toward the lower flat index") {
  Eigen::MatrixXd x(3, 1);
  x << 0.0, 0.5, 1.0;
  Eigen::VectorXd y(3);
  y << 0.0, 1.0, 2.0;
  Eigen::MatrixXd q(1, 1);
  q << 0.5;
  Eigen::VectorXd pred = knn_fit_predict(flat_panel(x, y), 2, q);
  CHECK(pred(0) == doctest::Approx(0.5));  // mean of y = 1 (self) and y = 0 (tie rule)
}

TEST_CASE("knn: invalid k and empty training rejected") {
  Eigen::MatrixXd x(2, 1);
  x << 0.1, 0.9;
  Eigen::VectorXd y(2);
  y << 1.0, 2.0;
  CHECK_THROWS_AS(knn_fit(flat_panel(x, y), 0), std::invalid_argument);
  CHECK_THROWS_AS(knn_fit(flat_panel(x, y), 3), std::invalid_argument);
}

TEST_CASE("knn: permutation invariance away from ties") {
  Rng rng(41);
  Eigen::MatrixXd x(20, 2);
  Eigen::VectorXd y(20);
  for (int i = 0; i < 20; ++i) {
    x(i, 0) = rng.uniform();
    x(i, 1) = rng.uniform();
    y(i) = rng.normal();
  }
  Eigen::MatrixXd xr = x.colwise().reverse();
  Eigen::VectorXd yr = y.reverse();
  Eigen::MatrixXd q(5, 2);
  for (int i = 0; i < 5; ++i) {
    q(i, 0) = rng.uniform();
    q(i, 1) = rng.uniform();
  }
  Eigen::VectorXd a = knn_fit_predict(flat_panel(x, y), 3, q);
  Eigen::VectorXd b = knn_fit_predict(flat_panel(xr, yr), 3, q);
  CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("krr: single training point solves the 1x1 system") {
  Eigen::MatrixXd x(1, 1);
  x << 0.5;
  Eigen::VectorXd y(1);
  y << 2.0;
  KrrModel model = krr_fit(flat_panel(x, y), 1.0, 0.5);
  CHECK(krr_predict(model, x.row(0).transpose()) == doctest::Approx(2.0 / 1.5).epsilon(1e-10));
}

TEST_CASE("krr: zero targets give zero everywhere") {
  Eigen::MatrixXd x(5, 1);
  x << 0.1, 0.3, 0.5, 0.7, 0.9;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(5);
  KrrModel model = krr_fit(flat_panel(x, y), 0.5, 1.0);
  CHECK(model.dual_coefficients.cwiseAbs().maxCoeff() == 0.0);
  Eigen::VectorXd q(1);
  q << 0.4;
  CHECK(krr_predict(model, q) == 0.0);
}

TEST_CASE("krr: huge alpha shrinks predictions toward zero") {
  Rng rng(43);
  Eigen::MatrixXd x(10, 1);
  Eigen::VectorXd y(10);
  for (int i = 0; i < 10; ++i) {
    x(i, 0) = rng.uniform();
    y(i) = rng.normal();
  }
  const double alpha = 1e6;
  KrrModel model = krr_fit(flat_panel(x, y), 0.5, alpha);
  Eigen::VectorXd preds = krr_predict_batch(model, x);
  // operator-norm bound: |pred| <= N * ||y||_inf / alpha since |k| <= 1
  double bound = 10.0 * y.cwiseAbs().maxCoeff() / alpha * 10.0;
  CHECK(preds.cwiseAbs().maxCoeff() <= bound);
}

TEST_CASE("krr: alpha -> 0 interpolates well-separated points") {
  Eigen::MatrixXd x(5, 1);
  x << 0.0, 0.25, 0.5, 0.75, 1.0;
  Eigen::VectorXd y(5);
  y << 1.0, -1.0, 0.5, 2.0, -0.5;
  KrrModel model = krr_fit(flat_panel(x, y), 0.1, 1e-10);
  Eigen::VectorXd preds = krr_predict_batch(model, x);
  CHECK((preds - y).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("baselines: constant panel is reproduced") {
  Eigen::MatrixXd x(6, 2);
  Rng rng(44);
  for (int i = 0; i < 6; ++i) {
    x(i, 0) = rng.uniform();
    x(i, 1) = rng.uniform();
  }
  Eigen::VectorXd y = Eigen::VectorXd::Constant(6, 3.25);
  Eigen::VectorXd knn = knn_fit_predict(flat_panel(x, y), 3, x);
  CHECK((knn.array() - 3.25).abs().maxCoeff() == 0.0);
  KrrModel model = krr_fit(flat_panel(x, y), 0.5, 1e-8);
  Eigen::VectorXd krr = krr_predict_batch(model, x);
  CHECK((krr.array() - 3.25).abs().maxCoeff() <= 1e-5);
}

TEST_CASE("cross-validation picks a sensible k") {
  // smooth target: large k should not beat k = 5 badly on a fine design
  Rng rng(45);
  PanelDataset panel;
  panel.n = 25;
  panel.d = 1;
  for (int i = 0; i < 25; ++i) {
    Eigen::MatrixXd x(8, 1);
    Eigen::VectorXd y(8);
    for (int j = 0; j < 8; ++j) {
      x(j, 0) = rng.uniform();
      y(j) = std::sin(6.28 * x(j, 0)) + 0.05 * rng.normal();
    }
    panel.group_sizes.push_back(8);
    panel.x.push_back(x);
    panel.y.push_back(y);
  }
  int k = knn_cross_validate(panel, {5, 10, 15}, 7);
  CHECK(k >= 5);
  CHECK(k <= 15);
}
