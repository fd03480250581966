// Acceptance checks: one pass/fail line per criterion. Exit status is the
// number of failed criteria. An optional list of criterion numbers on the
// command line restricts the run.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "tsreg/baselines.hpp"
#include "tsreg/estimator.hpp"
#include "tsreg/experiment.hpp"
#include "tsreg/metrics.hpp"
#include "tsreg/net.hpp"
#include "tsreg/synth.hpp"

using namespace tsreg;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

int hardware_workers() {
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 2 : static_cast<int>(hc);
}

// Shared estimator settings for the statistical criteria (4-6). Frozen after
// pilot runs; the sizing rule itself scales the architecture with nm.
// c_A = 2 keeps the truncation cap above the scenario targets' sup norm;
// at c_A = 1 the cap alone contributes ~0.014 relative error on scenario 4.
const SizingConstants kConstants{0.22, 6.5, 2.0};

TrainConfig training_schedule() {
  TrainConfig train;
  train.epochs = 300;
  train.batch_size = 256;
  train.learning_rate = 0.02;  // 0.05 lets occasional inits collapse to a constant
  train.lr_decay = 0.5;
  train.lr_decay_every = 100;
  train.momentum = 0.9;
  train.patience = 30;
  train.holdout_fraction = 0.1;
  return train;
}

ExperimentConfig base_config(const std::string& label) {
  ExperimentConfig cfg;
  cfg.scenario = 2;
  cfg.d = 2;
  cfg.n = 500;
  cfg.m_mult = 1;
  cfg.constants = kConstants;
  cfg.train = training_schedule();
  cfg.workers = hardware_workers();
  cfg.out_dir = std::filesystem::temp_directory_path().string();
  cfg.label = label;
  cfg.master_seed = 20260826;
  return cfg;
}

double mean_error(const ExperimentResult& result, const std::string& method) {
  for (const std::string& m : result.methods())
    if (m == method && result.failed(method) > 0)
      throw std::runtime_error("replication failures for " + method);
  return result.stats(method).first;
}

// --- criterion 1: backprop vs central finite differences ------------------

// Smallest |pre-activation| over all hidden units and samples; finite
// differences are only trusted when every unit sits clear of its kink.
double kink_margin(const DenseNet& net, const Eigen::MatrixXd& x) {
  double margin = std::numeric_limits<double>::infinity();
  for (int s = 0; s < x.rows(); ++s) {
    Eigen::VectorXd h = x.row(s).transpose();
    for (int l = 0; l < net.depth(); ++l) {
      Eigen::VectorXd pre = net.weights()[l] * h + net.biases()[l];
      margin = std::min(margin, pre.cwiseAbs().minCoeff());
      h = pre.cwiseMax(0.0);
    }
  }
  return margin;
}

double batch_loss(const DenseNet& net, const Batch& batch) {
  Eigen::VectorXd pred = net.forward_batch(batch.x);
  return (batch.w.array() * (batch.y - pred).array().square()).sum();
}

bool criterion_gradcheck() {
  Rng rng(101);
  const double h = 1e-5;
  int nets_checked = 0;
  long partials = 0;
  while (nets_checked < 100) {
    int d = 1 + static_cast<int>(rng.below(5));
    int L = 1 + static_cast<int>(rng.below(3));
    int r = 1 + static_cast<int>(rng.below(8));
    int N = 1 + static_cast<int>(rng.below(8));
    DenseNet net = DenseNet::he_init(d, L, r, rng);
    Batch batch;
    batch.x.resize(N, d);
    batch.y.resize(N);
    batch.w.resize(N);
    for (int s = 0; s < N; ++s) {
      for (int c = 0; c < d; ++c) batch.x(s, c) = rng.uniform();
      batch.y(s) = rng.normal();
      batch.w(s) = 0.1 + 0.9 * rng.uniform();
    }
    if (kink_margin(net, batch.x) < 1e-3) continue;  // resample, stay off kinks
    ++nets_checked;

    auto [grads, loss] = backward(net, batch);
    (void)loss;
    DenseNet work = net;
    auto check_one = [&](double analytic, double* param) {
      double saved = *param;
      *param = saved + h;
      double up = batch_loss(work, batch);
      *param = saved - h;
      double down = batch_loss(work, batch);
      *param = saved;
      double fd = (up - down) / (2.0 * h);
      ++partials;
      double scale = std::max(std::abs(fd), std::abs(analytic));
      bool ok = scale < 1e-6 ? std::abs(fd - analytic) <= 1e-10
                             : std::abs(fd - analytic) <= 1e-4 * scale;
      if (!ok)
        std::fprintf(stderr, "gradcheck: net %d analytic %.12g fd %.12g\n", nets_checked,
                     analytic, fd);
      return ok;
    };
    for (int l = 0; l < net.num_layers(); ++l) {
      for (int a = 0; a < net.weights()[l].rows(); ++a)
        for (int b = 0; b < net.weights()[l].cols(); ++b)
          if (!check_one(grads.weights[l](a, b), &work.weights()[l](a, b))) return false;
      for (int a = 0; a < net.biases()[l].size(); ++a)
        if (!check_one(grads.biases[l](a), &work.biases()[l](a))) return false;
    }
  }
  return nets_checked == 100 && partials > 0;
}

// --- criterion 2: generator statistics -------------------------------------

bool criterion_generator_stats(std::string& detail) {
  Check ck;
  const long steps = 100000;

  {
    Rng rng(202);
    std::vector<int> sizes(steps, 1);
    std::vector<Eigen::VectorXd> errs =
        measurement_errors(sizes, kMeasurementArCoefficient, 1.0, rng);
    Eigen::VectorXd e(steps);
    for (long i = 0; i < steps; ++i) e(i) = errs[i](0);
    double mean = e.mean();
    Eigen::VectorXd c = e.array() - mean;
    double var = c.squaredNorm() / (steps - 1);
    double autocov = c.head(steps - 1).dot(c.tail(steps - 1)) / (steps - 1);
    double rho = autocov / var;
    double target_var = 1.0 / 0.91;
    ck.require(std::abs(rho - 0.3) <= 0.02, "lag-1 autocorr " + fmt(rho));
    ck.require(std::abs(var - target_var) <= 0.05 * target_var,
               "stationary variance " + fmt(var));
  }

  {
    Rng rng(203);
    const int n = steps + 1;
    std::vector<int> sizes(n, 1);
    std::vector<Eigen::MatrixXd> x = sample_designs(n, sizes, 2, 0.1, rng);
    long copies = 0;
    for (int i = 1; i < n; ++i)
      if (x[i].row(0) == x[i - 1].row(0)) ++copies;
    double freq = static_cast<double>(copies) / steps;
    ck.require(std::abs(freq - 0.1) <= 0.01, "copy frequency " + fmt(freq));
  }

  detail = ck.detail;
  return ck.ok;
}

// --- criterion 3: block construction vs brute force -------------------------

bool criterion_blocks() {
  for (int n = 1; n <= 200; ++n) {
    for (int S = 1; S <= std::min(20, n); ++S) {
      BlockPartition bp = build_blocks(n, S);
      const int K = n / S;
      if (bp.num_full_blocks != K) return false;

      // brute-force enumeration straight from the definitions
      std::vector<std::vector<int>> intervals(K + 1);
      std::vector<std::vector<int>> even(S), odd(S);
      for (int i = 1; i <= n; ++i) {
        int k = (i - 1) / S + 1;
        intervals[std::min(k, K + 1) - 1].push_back(i);
        if (k % 2 == 0)
          even[i % S].push_back(i);
        else
          odd[i % S].push_back(i);
      }
      if (bp.intervals != intervals || bp.even_sets != even || bp.odd_sets != odd)
        return false;

      for (const auto& sets : {bp.even_sets, bp.odd_sets})
        for (const auto& J : sets) {
          double size = static_cast<double>(J.size());
          if (size < (K - 1) / 2.0 || size > (K + 2) / 2.0) return false;
        }
    }
  }
  return true;
}

// --- criterion 4: error decay in n ------------------------------------------

bool criterion_error_decay(std::string& detail) {
  ExperimentConfig small = base_config("acc4_n500");
  small.methods = {Method::DenseNn};
  small.replications = 10;
  ExperimentConfig large = small;
  large.n = 2000;
  large.label = "acc4_n2000";
  large.methods = {Method::DenseNn, Method::Knn};

  ExperimentResult r_small = run_experiment(small);
  ExperimentResult r_large = run_experiment(large);
  double e500 = mean_error(r_small, "dense-nn");
  double e2000 = mean_error(r_large, "dense-nn");
  double knn2000 = mean_error(r_large, "knn");
  std::filesystem::remove(result_path(small));
  std::filesystem::remove(result_path(large));

  Check ck;
  ck.require(e2000 < e500, "no decay: n=2000 " + fmt(e2000) + " vs n=500 " + fmt(e500));
  ck.require(e2000 < knn2000,
             "dense-nn " + fmt(e2000) + " not below knn " + fmt(knn2000));
  detail = "dense-nn " + fmt(e500) + " -> " + fmt(e2000) + ", knn " + fmt(knn2000);
  if (!ck.detail.empty()) detail = ck.detail;
  return ck.ok;
}

// --- criterion 5: table vicinity ---------------------------------------------

bool criterion_table_vicinity(std::string& detail) {
  ExperimentConfig cfg = base_config("acc5_s2");
  cfg.methods = {Method::DenseNn};
  cfg.replications = 20;
  ExperimentResult s2 = run_experiment(cfg);
  double e2 = mean_error(s2, "dense-nn");
  std::filesystem::remove(result_path(cfg));

  cfg.scenario = 4;
  cfg.label = "acc5_s4";
  ExperimentResult s4 = run_experiment(cfg);
  double e4 = mean_error(s4, "dense-nn");
  std::filesystem::remove(result_path(cfg));

  Check ck;
  ck.require(e2 <= 3.0 * 0.0133, "scenario 2 mean " + fmt(e2) + " > " + fmt(3 * 0.0133));
  ck.require(e4 <= 10.0 * 0.0008, "scenario 4 mean " + fmt(e4) + " > " + fmt(10 * 0.0008));
  detail = "scenario 2: " + fmt(e2) + " (bound " + fmt(3 * 0.0133) + "), scenario 4: " +
           fmt(e4) + " (bound " + fmt(10 * 0.0008) + ")";
  if (!ck.detail.empty()) detail = ck.detail;
  return ck.ok;
}

// --- criterion 6: manifold advantage ------------------------------------------

bool criterion_manifold(std::string& detail) {
  ExperimentConfig ambient = base_config("acc6_ambient");
  ambient.d = 5;
  ambient.n = 456;  // ~8000 observations under the quartered size pattern
  ambient.methods = {Method::DenseNn};
  ambient.replications = 10;
  ExperimentConfig manifold = ambient;
  manifold.d_star = 1;
  manifold.label = "acc6_manifold";

  ExperimentResult r_amb = run_experiment(ambient);
  ExperimentResult r_man = run_experiment(manifold);
  double e_amb = mean_error(r_amb, "dense-nn");
  double e_man = mean_error(r_man, "dense-nn");
  std::filesystem::remove(result_path(ambient));
  std::filesystem::remove(result_path(manifold));

  detail = "manifold " + fmt(e_man) + " vs ambient " + fmt(e_amb);
  return e_man < e_amb;
}

// --- criterion 7: benchmark determinism ----------------------------------------

bool criterion_determinism() {
  ExperimentConfig cfg = base_config("acc7_det");
  cfg.n = 16;
  cfg.replications = 4;
  cfg.methods = {Method::DenseNn, Method::Knn, Method::Krr};
  cfg.train.epochs = 30;
  cfg.workers = 2;
  ExperimentResult first = run_experiment(cfg);
  ExperimentResult second = run_experiment(cfg);
  std::filesystem::remove(result_path(cfg));
  if (first.records.size() != second.records.size()) return false;
  for (std::size_t i = 0; i < first.records.size(); ++i) {
    const ReplicationRecord& a = first.records[i];
    const ReplicationRecord& b = second.records[i];
    if (a.method != b.method || a.replication != b.replication || a.seed != b.seed ||
        a.ok != b.ok || a.relative_error != b.relative_error)
      return false;
  }
  return true;
}

// --- criterion 8: norm identities ------------------------------------------------

bool criterion_norm_identities() {
  Rng rng(808);
  for (int trial = 0; trial < 1000; ++trial) {
    int n = 1 + static_cast<int>(rng.below(8));
    std::vector<int> sizes(n);
    std::vector<Eigen::VectorXd> f(n), g(n), cf(n), cg(n);
    double c = std::exp(4.0 * (rng.uniform() - 0.5));  // scale in [e^-2, e^2]
    bool f_nonzero = false;
    for (int i = 0; i < n; ++i) {
      sizes[i] = 1 + static_cast<int>(rng.below(6));
      f[i].resize(sizes[i]);
      g[i].resize(sizes[i]);
      for (int j = 0; j < sizes[i]; ++j) {
        f[i](j) = rng.normal();
        g[i](j) = rng.normal();
        if (f[i](j) != 0.0) f_nonzero = true;
      }
      cf[i] = c * f[i];
      cg[i] = c * g[i];
    }
    if (!f_nonzero) continue;

    double base = empirical_norm_sq(f, sizes);
    double scaled = empirical_norm_sq(cf, sizes);
    if (std::abs(scaled - c * c * base) > 1e-12 * std::max(1.0, std::abs(scaled)))
      return false;

    std::vector<Eigen::VectorXd> w = empirical_weights(sizes);
    double total = 0.0;
    for (const auto& row : w) total += row.sum();
    if (std::abs(total - 1.0) > 1e-12) return false;

    double rel = relative_error(g, f, sizes);
    double rel_scaled = relative_error(cg, cf, sizes);
    if (std::abs(rel - rel_scaled) > 1e-12 * std::max(1.0, rel)) return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int a = 1; a < argc; ++a) only.insert(std::atoi(argv[a]));
  auto wanted = [&](int k) { return only.empty() || only.count(k) > 0; };

  int failures = 0;
  auto report = [&](int id, const char* name, bool ok, const std::string& detail,
                    double seconds) {
    std::printf("criterion %d: %s - %s%s%s (%.1fs)\n", id, ok ? "PASS" : "FAIL", name,
                detail.empty() ? "" : ": ", detail.c_str(), seconds);
    std::fflush(stdout);
    if (!ok) ++failures;
  };
  auto timed = [&](int id, const char* name, auto&& fn) {
    if (!wanted(id)) return;
    std::string detail;
    auto t0 = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = fn(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(id, name, ok, detail, secs);
  };

  timed(1, "backprop matches central finite differences on 100 random nets",
        [](std::string&) { return criterion_gradcheck(); });
  timed(2, "generator autocorrelation, variance and copy frequency",
        [](std::string& d) { return criterion_generator_stats(d); });
  timed(3, "block construction equals brute force for n <= 200, S <= 20",
        [](std::string&) { return criterion_blocks(); });
  timed(4, "relative error decays from n=500 to n=2000 and beats knn",
        [](std::string& d) { return criterion_error_decay(d); });
  timed(5, "mean relative error within table vicinity bounds",
        [](std::string& d) { return criterion_table_vicinity(d); });
  timed(6, "manifold-supported designs beat ambient designs at equal budget",
        [](std::string& d) { return criterion_manifold(d); });
  timed(7, "benchmark reruns with one master seed reproduce errors exactly",
        [](std::string&) { return criterion_determinism(); });
  timed(8, "norm identities hold on 1000 random instances at 1e-12",
        [](std::string&) { return criterion_norm_identities(); });

  return failures;
}
