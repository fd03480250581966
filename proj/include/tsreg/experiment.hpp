#ifndef TSREG_EXPERIMENT_HPP
#define TSREG_EXPERIMENT_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsreg/estimator.hpp"
#include "tsreg/panel.hpp"
#include "tsreg/synth.hpp"

namespace tsreg {

enum class Method { DenseNn, Knn, Krr };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

// Flat key=value experiment description. Unknown keys are rejected.
struct ExperimentConfig {
  int scenario = 2;
  int d = 2;
  int n = 500;
  int m_mult = 1;
  PanelNoise noise;
  std::vector<Method> methods = {Method::DenseNn};

  // estimator sizing
  double p = 2.0;
  int K = 1;
  ArchCase arch_case = ArchCase::Wide;
  SizingConstants constants;
  TrainConfig train;

  // baselines
  int knn_k = 0;           // 0 = 5-fold cross-validation over {5, 10, 15}
  double krr_alpha = 0.0;  // 0 = cross-validate alpha and bandwidth
  double krr_bandwidth = 0.0;  // 0 = median heuristic

  // manifold variant; 0 disables
  int d_star = 0;

  int replications = 20;
  std::uint64_t master_seed = 1;
  int workers = 1;
  std::string out_dir = ".";
  std::string label = "experiment";
};

ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_lines(const std::vector<std::string>& lines);

// Normalized, order-stable rendering of the config; hashed for provenance.
std::string render_config(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);

struct ReplicationRecord {
  int replication = 0;
  std::uint64_t seed = 0;
  std::string method;
  double relative_error = 0.0;
  bool ok = true;
  std::string error_message;
};

struct ExperimentResult {
  std::string label;
  std::uint64_t cfg_hash = 0;
  std::vector<std::string> config_lines;  // normalized echo of the config
  std::vector<ReplicationRecord> records;
  std::string timestamp;

  std::vector<std::string> methods() const;
  // mean/std (n-1 denominator) over completed replications of one method
  std::pair<double, double> stats(const std::string& method) const;
  int completed(const std::string& method) const;
  int failed(const std::string& method) const;
};

// Runs R replications with derived seeds (seed_k = derive_seed(master, k)),
// in parallel up to cfg.workers, and persists the result before returning.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// self-describing text persistence; timestamp lives on its own comment line
void save_result(const ExperimentResult& result, const std::string& path);
ExperimentResult load_result(const std::string& path);
std::string result_path(const ExperimentConfig& cfg);

// rows (d, scenario) x columns (method), cells "mean (std)", best per row
// flagged with '*'
std::string summarize(const std::vector<ExperimentResult>& results);

// long-format CSV: method, replication, relative_error
void emit_plot_data(const ExperimentResult& result, const std::string& path);

// EPA-style daily ozone CSV. Expected header:
// State Code,County Code,Site Number,Latitude,Longitude,Date,Ozone,AQI,Wind,Temperature
// Date is YYYY-MM-DD. Covariates (latitude, longitude, wind, temperature and,
// optionally, a one-hot state code) are min-max scaled to [0,1]; response is
// ozone. Time index = date, within-date observations = stations.
struct ScalingParams {
  std::vector<std::string> feature_names;
  std::vector<double> minima;
  std::vector<double> maxima;
};

struct OzoneIngestResult {
  PanelDataset panel;
  ScalingParams scaling;
};

OzoneIngestResult ingest_ozone_csv(const std::string& path, bool one_hot_state = true);
void save_scaling(const ScalingParams& scaling, const std::string& path);

// Observation-level random split; whole observations are assigned to train
// or test, empty time rows are dropped from the corresponding side.
std::pair<PanelDataset, PanelDataset> train_test_split(const PanelDataset& dataset,
                                                       double fraction,
                                                       std::uint64_t seed);

}  // namespace tsreg

#endif  // TSREG_EXPERIMENT_HPP
