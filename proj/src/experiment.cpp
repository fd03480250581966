#include "tsreg/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "tsreg/baselines.hpp"
#include "tsreg/metrics.hpp"

namespace tsreg {

std::string method_name(Method m) {
  switch (m) {
    case Method::DenseNn: return "dense-nn";
    case Method::Knn: return "knn";
    case Method::Krr: return "krr";
  }
  throw std::invalid_argument("unknown method");
}

Method method_from_name(const std::string& name) {
  if (name == "dense-nn") return Method::DenseNn;
  if (name == "knn") return Method::Knn;
  if (name == "krr") return Method::Krr;
  throw std::invalid_argument("unknown method: " + name);
}

namespace {

std::string trim(const std::string& s) {
  auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) parts.push_back(trim(part));
  return parts;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (...) {
    throw std::invalid_argument("config: bad numeric value for " + key + ": " + value);
  }
}

long parse_long(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (...) {
    throw std::invalid_argument("config: bad integer value for " + key + ": " + value);
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::invalid_argument("config: bad boolean value for " + key + ": " + value);
}

void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "scenario") cfg.scenario = static_cast<int>(parse_long(key, value));
  else if (key == "d") cfg.d = static_cast<int>(parse_long(key, value));
  else if (key == "n") cfg.n = static_cast<int>(parse_long(key, value));
  else if (key == "m_mult") cfg.m_mult = static_cast<int>(parse_long(key, value));
  else if (key == "sigma_xi") cfg.noise.sigma_xi = parse_double(key, value);
  else if (key == "sigma_b") cfg.noise.sigma_b = parse_double(key, value);
  else if (key == "phi") cfg.noise.phi = parse_double(key, value);
  else if (key == "spatial_burn_in")
    cfg.noise.spatial_burn_in = static_cast<int>(parse_long(key, value));
  else if (key == "scenario3_sqrt_covers_sum")
    cfg.noise.scenario3_sqrt_covers_sum = parse_bool(key, value);
  else if (key == "methods") {
    cfg.methods.clear();
    for (const std::string& name : split(value, ','))
      cfg.methods.push_back(method_from_name(name));
    if (cfg.methods.empty()) throw std::invalid_argument("config: empty method list");
  } else if (key == "p") cfg.p = parse_double(key, value);
  else if (key == "K") cfg.K = static_cast<int>(parse_long(key, value));
  else if (key == "case") {
    if (value == "wide") cfg.arch_case = ArchCase::Wide;
    else if (value == "deep") cfg.arch_case = ArchCase::Deep;
    else throw std::invalid_argument("config: case must be wide or deep");
  } else if (key == "c_L") cfg.constants.c_L = parse_double(key, value);
  else if (key == "c_r") cfg.constants.c_r = parse_double(key, value);
  else if (key == "c_A") cfg.constants.c_A = parse_double(key, value);
  else if (key == "epochs") cfg.train.epochs = static_cast<int>(parse_long(key, value));
  else if (key == "batch_size") cfg.train.batch_size = static_cast<int>(parse_long(key, value));
  else if (key == "lr") cfg.train.learning_rate = parse_double(key, value);
  else if (key == "lr_decay") cfg.train.lr_decay = parse_double(key, value);
  else if (key == "lr_decay_every")
    cfg.train.lr_decay_every = static_cast<int>(parse_long(key, value));
  else if (key == "momentum") cfg.train.momentum = parse_double(key, value);
  else if (key == "patience") cfg.train.patience = static_cast<int>(parse_long(key, value));
  else if (key == "holdout_fraction") cfg.train.holdout_fraction = parse_double(key, value);
  else if (key == "knn_k") cfg.knn_k = static_cast<int>(parse_long(key, value));
  else if (key == "krr_alpha") cfg.krr_alpha = parse_double(key, value);
  else if (key == "krr_bandwidth") cfg.krr_bandwidth = parse_double(key, value);
  else if (key == "d_star") cfg.d_star = static_cast<int>(parse_long(key, value));
  else if (key == "R") cfg.replications = static_cast<int>(parse_long(key, value));
  else if (key == "seed") cfg.master_seed = static_cast<std::uint64_t>(parse_long(key, value));
  else if (key == "workers") cfg.workers = static_cast<int>(parse_long(key, value));
  else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "label") cfg.label = value;
  else throw std::invalid_argument("config: unknown key: " + key);
}

}  // namespace

ExperimentConfig parse_config_lines(const std::vector<std::string>& lines) {
  ExperimentConfig cfg;
  for (const std::string& raw : lines) {
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config: expected key=value, got: " + line);
    apply_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  if (cfg.replications < 1) throw std::invalid_argument("config: R must be >= 1");
  if (cfg.workers < 1) throw std::invalid_argument("config: workers must be >= 1");
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("config: cannot open: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) lines.push_back(line);
  return parse_config_lines(lines);
}

std::string render_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  char buf[64];
  auto put_num = [&](const char* key, double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << key << '=' << buf << '\n';
  };
  os << "scenario=" << cfg.scenario << '\n';
  os << "d=" << cfg.d << '\n';
  os << "n=" << cfg.n << '\n';
  os << "m_mult=" << cfg.m_mult << '\n';
  put_num("sigma_xi", cfg.noise.sigma_xi);
  put_num("sigma_b", cfg.noise.sigma_b);
  put_num("phi", cfg.noise.phi);
  os << "spatial_burn_in=" << cfg.noise.spatial_burn_in << '\n';
  os << "scenario3_sqrt_covers_sum=" << (cfg.noise.scenario3_sqrt_covers_sum ? 1 : 0) << '\n';
  os << "methods=";
  for (std::size_t i = 0; i < cfg.methods.size(); ++i)
    os << (i ? "," : "") << method_name(cfg.methods[i]);
  os << '\n';
  put_num("p", cfg.p);
  os << "K=" << cfg.K << '\n';
  os << "case=" << (cfg.arch_case == ArchCase::Wide ? "wide" : "deep") << '\n';
  put_num("c_L", cfg.constants.c_L);
  put_num("c_r", cfg.constants.c_r);
  put_num("c_A", cfg.constants.c_A);
  os << "epochs=" << cfg.train.epochs << '\n';
  os << "batch_size=" << cfg.train.batch_size << '\n';
  put_num("lr", cfg.train.learning_rate);
  put_num("lr_decay", cfg.train.lr_decay);
  os << "lr_decay_every=" << cfg.train.lr_decay_every << '\n';
  put_num("momentum", cfg.train.momentum);
  os << "patience=" << cfg.train.patience << '\n';
  put_num("holdout_fraction", cfg.train.holdout_fraction);
  os << "knn_k=" << cfg.knn_k << '\n';
  put_num("krr_alpha", cfg.krr_alpha);
  put_num("krr_bandwidth", cfg.krr_bandwidth);
  os << "d_star=" << cfg.d_star << '\n';
  os << "R=" << cfg.replications << '\n';
  os << "seed=" << cfg.master_seed << '\n';
  os << "label=" << cfg.label << '\n';
  return os.str();
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  // FNV-1a over the normalized rendering
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : render_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::vector<std::string> ExperimentResult::methods() const {
  std::vector<std::string> out;
  for (const auto& rec : records)
    if (std::find(out.begin(), out.end(), rec.method) == out.end()) out.push_back(rec.method);
  return out;
}

std::pair<double, double> ExperimentResult::stats(const std::string& method) const {
  std::vector<double> values;
  for (const auto& rec : records)
    if (rec.ok && rec.method == method) values.push_back(rec.relative_error);
  if (values.empty())
    throw std::runtime_error("result: no completed replications for " + method);
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= values.size();
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  double stddev = values.size() > 1 ? std::sqrt(ss / (values.size() - 1)) : 0.0;
  return {mean, stddev};
}

int ExperimentResult::completed(const std::string& method) const {
  int c = 0;
  for (const auto& rec : records)
    if (rec.ok && rec.method == method) ++c;
  return c;
}

int ExperimentResult::failed(const std::string& method) const {
  int c = 0;
  for (const auto& rec : records)
    if (!rec.ok && rec.method == method) ++c;
  return c;
}

namespace {

constexpr double kInvFourPiSq = 1.0 / (4.0 * std::numbers::pi * std::numbers::pi);

// stationary std dev of the measurement error entries
double sigma_eps_stationary(double sigma_xi) {
  return sigma_xi / std::sqrt(1.0 - kMeasurementArCoefficient * kMeasurementArCoefficient);
}

// sqrt of E_x Var(gamma(x)) at stationarity: coefficients have variance
// (sigma_b^2 / t^2) / (1 - 0.25) and E[h_t(x)^2] = (1/(4 pi^2))^d
double sigma_gamma_stationary(double sigma_b, int d) {
  double coeff_sum = 0.0;
  for (int t = 1; t <= kSpatialBasisSize; ++t)
    coeff_sum += 1.0 / (static_cast<double>(t) * t);
  double basis_ms = std::pow(kInvFourPiSq, d);
  return sigma_b * std::sqrt(coeff_sum / (1.0 - 0.25) * basis_ms);
}

std::vector<Eigen::VectorXd> flat_predict(const PanelDataset& panel,
                                          const Eigen::VectorXd& flat) {
  std::vector<Eigen::VectorXd> out(panel.n);
  long row = 0;
  for (int i = 0; i < panel.n; ++i) {
    out[i] = flat.segment(row, panel.group_sizes[i]);
    row += panel.group_sizes[i];
  }
  return out;
}

Eigen::MatrixXd flatten_x(const PanelDataset& panel) {
  Eigen::MatrixXd x(panel.total_observations(), panel.d);
  long row = 0;
  for (int i = 0; i < panel.n; ++i) {
    x.middleRows(row, panel.group_sizes[i]) = panel.x[i];
    row += panel.group_sizes[i];
  }
  return x;
}

double run_method(const ExperimentConfig& cfg, Method method, const PanelDataset& panel,
                  std::uint64_t seed) {
  switch (method) {
    case Method::DenseNn: {
      double m_bar = harmonic_mean(panel.group_sizes);
      double s_eps = sigma_eps_stationary(cfg.noise.sigma_xi);
      double s_gam = sigma_gamma_stationary(cfg.noise.sigma_b, cfg.d);
      ArchSpec arch = size_architecture(panel.n, m_bar, cfg.p, cfg.K, cfg.arch_case,
                                        cfg.constants, s_eps, s_gam);
      TrainConfig train = cfg.train;
      train.seed = derive_seed(seed, 1);
      FitResult fitted = fit(panel, arch, train);
      // noiseless panels have A = 0; leave predictions untruncated then
      double A = arch.truncation > 0.0 ? arch.truncation : std::numeric_limits<double>::max();
      return relative_error(predict_panel(fitted.net, A, panel), panel.f_true,
                            panel.group_sizes);
    }
    case Method::Knn: {
      int k = cfg.knn_k > 0 ? cfg.knn_k
                            : knn_cross_validate(panel, {5, 10, 15}, derive_seed(seed, 2));
      Eigen::VectorXd preds = knn_fit_predict(panel, k, flatten_x(panel));
      return relative_error(flat_predict(panel, preds), panel.f_true, panel.group_sizes);
    }
    case Method::Krr: {
      double bandwidth = cfg.krr_bandwidth;
      double alpha = cfg.krr_alpha;
      if (alpha <= 0.0) {
        KrrHyperparams hp = krr_cross_validate(panel, derive_seed(seed, 3));
        bandwidth = hp.bandwidth;
        alpha = hp.alpha;
      } else if (bandwidth <= 0.0) {
        bandwidth = median_heuristic_bandwidth(panel, derive_seed(seed, 3));
      }
      KrrModel model = krr_fit(panel, bandwidth, alpha);
      Eigen::VectorXd preds = krr_predict_batch(model, flatten_x(panel));
      return relative_error(flat_predict(panel, preds), panel.f_true, panel.group_sizes);
    }
  }
  throw std::invalid_argument("unknown method");
}

std::string now_iso8601() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%FT%TZ", std::gmtime(&t));
  return buf;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.scenario < 1 || cfg.scenario > 6)
    throw std::invalid_argument("run_experiment: scenario must lie in 1..6");
  ExperimentResult result;
  result.label = cfg.label;
  result.cfg_hash = config_hash(cfg);
  {
    std::istringstream ss(render_config(cfg));
    std::string line;
    while (std::getline(ss, line)) result.config_lines.push_back(line);
  }
  result.timestamp = now_iso8601();

  const int R = cfg.replications;
  const int methods = static_cast<int>(cfg.methods.size());
  result.records.resize(static_cast<std::size_t>(R) * methods);

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      int k = next.fetch_add(1);
      if (k >= R) return;
      std::uint64_t seed = derive_seed(cfg.master_seed, k);
      PanelDataset panel;
      std::string generation_error;
      try {
        panel = cfg.d_star > 0
                    ? generate_manifold_panel(scenario_from_int(cfg.scenario), cfg.d,
                                              cfg.d_star, cfg.n, cfg.m_mult, cfg.noise, seed)
                    : generate_panel(scenario_from_int(cfg.scenario), cfg.d, cfg.n,
                                     cfg.m_mult, cfg.noise, seed);
      } catch (const std::exception& e) {
        generation_error = e.what();
      }
      for (int m = 0; m < methods; ++m) {
        ReplicationRecord& rec = result.records[static_cast<std::size_t>(k) * methods + m];
        rec.replication = k;
        rec.seed = seed;
        rec.method = method_name(cfg.methods[m]);
        if (!generation_error.empty()) {
          rec.ok = false;
          rec.error_message = generation_error;
          continue;
        }
        try {
          rec.relative_error = run_method(cfg, cfg.methods[m], panel, seed);
        } catch (const std::exception& e) {
          rec.ok = false;
          rec.error_message = e.what();
        }
      }
    }
  };
  if (cfg.workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < cfg.workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  save_result(result, result_path(cfg));
  return result;
}

std::string result_path(const ExperimentConfig& cfg) {
  return cfg.out_dir + "/" + cfg.label + ".result.txt";
}

void save_result(const ExperimentResult& result, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("result: cannot open for writing: " + path);
  os << "tsreg-result 1\n";
  os << "# timestamp " << result.timestamp << '\n';
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(result.cfg_hash));
  os << "hash " << buf << '\n';
  for (const std::string& line : result.config_lines) os << "cfg " << line << '\n';
  char val[32];
  for (const ReplicationRecord& rec : result.records) {
    os << "rep " << rec.replication << ' ' << rec.seed << ' ' << rec.method << ' ';
    if (rec.ok) {
      std::snprintf(val, sizeof(val), "%.17g", rec.relative_error);
      os << "ok " << val << '\n';
    } else {
      os << "fail " << rec.error_message << '\n';
    }
  }
  for (const std::string& method : result.methods()) {
    if (result.completed(method) == 0) {
      os << "summary " << method << " - - 0 " << result.failed(method) << '\n';
      continue;
    }
    auto [mean, stddev] = result.stats(method);
    char mbuf[32], sbuf[32];
    std::snprintf(mbuf, sizeof(mbuf), "%.17g", mean);
    std::snprintf(sbuf, sizeof(sbuf), "%.17g", stddev);
    os << "summary " << method << ' ' << mbuf << ' ' << sbuf << ' '
       << result.completed(method) << ' ' << result.failed(method) << '\n';
  }
  os << "end\n";
  if (!os) throw std::runtime_error("result: write failed: " + path);
}

ExperimentResult load_result(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("result: cannot open: " + path);
  std::string line;
  if (!std::getline(is, line) || line != "tsreg-result 1")
    throw std::runtime_error("result: unrecognized format tag in " + path);
  ExperimentResult result;
  bool saw_end = false;
  while (std::getline(is, line)) {
    if (line.rfind("# timestamp ", 0) == 0) {
      result.timestamp = line.substr(12);
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string kind;
    ss >> kind;
    if (kind == "hash") {
      std::string hex;
      ss >> hex;
      result.cfg_hash = std::stoull(hex, nullptr, 16);
    } else if (kind == "cfg") {
      std::string rest;
      std::getline(ss, rest);
      result.config_lines.push_back(trim(rest));
      if (result.config_lines.back().rfind("label=", 0) == 0)
        result.label = result.config_lines.back().substr(6);
    } else if (kind == "rep") {
      ReplicationRecord rec;
      std::string status;
      ss >> rec.replication >> rec.seed >> rec.method >> status;
      if (status == "ok") {
        ss >> rec.relative_error;
      } else {
        rec.ok = false;
        std::getline(ss, rec.error_message);
        rec.error_message = trim(rec.error_message);
      }
      result.records.push_back(rec);
    } else if (kind == "summary") {
      std::string method, mean_s, std_s;
      int completed = 0, failed = 0;
      ss >> method >> mean_s >> std_s >> completed >> failed;
      if (completed != result.completed(method) || failed != result.failed(method))
        throw std::runtime_error("result: stored counts disagree with records in " + path);
      if (mean_s != "-") {
        auto [mean, stddev] = result.stats(method);
        if (std::abs(mean - std::stod(mean_s)) > 1e-12 * std::max(1.0, std::abs(mean)) ||
            std::abs(stddev - std::stod(std_s)) > 1e-12 * std::max(1.0, stddev))
          throw std::runtime_error("result: stored statistics disagree with records in " +
                                   path);
      }
    } else if (kind == "end") {
      saw_end = true;
    } else {
      throw std::runtime_error("result: unknown record kind '" + kind + "' in " + path);
    }
  }
  if (!saw_end) throw std::runtime_error("result: truncated file: " + path);
  return result;
}

namespace {

std::string get_cfg(const ExperimentResult& result, const std::string& key) {
  for (const std::string& line : result.config_lines)
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  throw std::runtime_error("result: missing config key: " + key);
}

}  // namespace

std::string summarize(const std::vector<ExperimentResult>& results) {
  if (results.empty()) throw std::invalid_argument("summarize: no results");
  std::vector<std::string> methods = results.front().methods();
  for (const auto& r : results)
    if (r.methods() != methods)
      throw std::invalid_argument("summarize: results do not share a method schema");

  std::ostringstream os;
  os << "d scenario";
  for (const std::string& m : methods) os << " | " << m;
  os << '\n';
  for (const auto& r : results) {
    os << get_cfg(r, "d") << ' ' << get_cfg(r, "scenario");
    int best = -1;
    double best_mean = std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, double>> cells;
    for (std::size_t m = 0; m < methods.size(); ++m) {
      auto st = r.stats(methods[m]);
      cells.push_back(st);
      if (st.first < best_mean) {
        best_mean = st.first;
        best = static_cast<int>(m);
      }
    }
    char buf[64];
    for (std::size_t m = 0; m < methods.size(); ++m) {
      std::snprintf(buf, sizeof(buf), "%.4f (%.3f)", cells[m].first, cells[m].second);
      os << " | " << buf << (static_cast<int>(m) == best ? "*" : "");
    }
    os << '\n';
  }
  return os.str();
}

void emit_plot_data(const ExperimentResult& result, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("plotdata: cannot open for writing: " + path);
  os << "method,replication,relative_error\n";
  char buf[32];
  for (const ReplicationRecord& rec : result.records) {
    if (!rec.ok) continue;
    std::snprintf(buf, sizeof(buf), "%.17g", rec.relative_error);
    os << rec.method << ',' << rec.replication << ',' << buf << '\n';
  }
  if (!os) throw std::runtime_error("plotdata: write failed: " + path);
}

namespace {

struct OzoneRecord {
  std::string state_code;
  std::string county_code;
  std::string site_number;
  double latitude = 0.0;
  double longitude = 0.0;
  int year = 0, month = 0, day = 0;
  double ozone = 0.0;
  double aqi = 0.0;
  double wind = 0.0;
  double temperature = 0.0;

  long date_key() const { return year * 10000L + month * 100L + day; }
};

bool valid_date(int year, int month, int day) {
  if (year < 1 || month < 1 || month > 12 || day < 1) return false;
  static const int days[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  int dmax = days[month - 1];
  bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
  if (month == 2 && leap) dmax = 29;
  return day <= dmax;
}

const char* kOzoneHeader =
    "State Code,County Code,Site Number,Latitude,Longitude,Date,Ozone,AQI,Wind,Temperature";

}  // namespace

OzoneIngestResult ingest_ozone_csv(const std::string& path, bool one_hot_state) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("ozone: cannot open: " + path);
  std::string line;
  if (!std::getline(is, line) || trim(line) != kOzoneHeader)
    throw std::runtime_error("ozone: missing or unexpected header row; expected: " +
                             std::string(kOzoneHeader));
  std::vector<OzoneRecord> records;
  long line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> f = split(line, ',');
    if (f.size() != 10)
      throw std::runtime_error("ozone: malformed row at line " + std::to_string(line_no) +
                               " (expected 10 fields, got " + std::to_string(f.size()) + ")");
    OzoneRecord rec;
    try {
      rec.state_code = f[0];
      rec.county_code = f[1];
      rec.site_number = f[2];
      rec.latitude = parse_double("Latitude", f[3]);
      rec.longitude = parse_double("Longitude", f[4]);
      if (std::sscanf(f[5].c_str(), "%d-%d-%d", &rec.year, &rec.month, &rec.day) != 3 ||
          !valid_date(rec.year, rec.month, rec.day))
        throw std::invalid_argument("ozone: unparseable or invalid date: " + f[5]);
      rec.ozone = parse_double("Ozone", f[6]);
      rec.aqi = parse_double("AQI", f[7]);
      rec.wind = parse_double("Wind", f[8]);
      rec.temperature = parse_double("Temperature", f[9]);
    } catch (const std::exception& e) {
      throw std::runtime_error("ozone: line " + std::to_string(line_no) + ": " + e.what());
    }
    if (rec.latitude < -90.0 || rec.latitude > 90.0)
      throw std::runtime_error("ozone: latitude out of range at line " + std::to_string(line_no));
    if (rec.longitude < -180.0 || rec.longitude > 180.0)
      throw std::runtime_error("ozone: longitude out of range at line " +
                               std::to_string(line_no));
    records.push_back(rec);
  }
  if (records.empty()) throw std::runtime_error("ozone: no data rows in " + path);

  std::set<long> dates;
  std::set<std::string> states;
  for (const auto& rec : records) {
    dates.insert(rec.date_key());
    states.insert(rec.state_code);
  }
  std::map<long, int> date_index;
  int next_i = 0;
  for (long k : dates) date_index[k] = next_i++;

  OzoneIngestResult out;
  out.scaling.feature_names = {"latitude", "longitude", "wind", "temperature"};
  std::vector<std::string> state_list(states.begin(), states.end());
  if (one_hot_state)
    for (const std::string& s : state_list)
      out.scaling.feature_names.push_back("state_" + s);
  const int d = static_cast<int>(out.scaling.feature_names.size());

  // raw feature rows
  Eigen::MatrixXd raw(records.size(), d);
  for (std::size_t r = 0; r < records.size(); ++r) {
    raw(r, 0) = records[r].latitude;
    raw(r, 1) = records[r].longitude;
    raw(r, 2) = records[r].wind;
    raw(r, 3) = records[r].temperature;
    if (one_hot_state)
      for (std::size_t s = 0; s < state_list.size(); ++s)
        raw(r, 4 + s) = records[r].state_code == state_list[s] ? 1.0 : 0.0;
  }
  out.scaling.minima.resize(d);
  out.scaling.maxima.resize(d);
  for (int c = 0; c < d; ++c) {
    out.scaling.minima[c] = raw.col(c).minCoeff();
    out.scaling.maxima[c] = raw.col(c).maxCoeff();
    double range = out.scaling.maxima[c] - out.scaling.minima[c];
    if (range > 0.0)
      raw.col(c) = (raw.col(c).array() - out.scaling.minima[c]) / range;
    else
      raw.col(c).setZero();  // zero-range column maps to 0
  }

  PanelDataset& panel = out.panel;
  panel.n = static_cast<int>(dates.size());
  panel.d = d;
  panel.group_sizes.assign(panel.n, 0);
  for (const auto& rec : records) panel.group_sizes[date_index[rec.date_key()]]++;
  panel.x.resize(panel.n);
  panel.y.resize(panel.n);
  for (int i = 0; i < panel.n; ++i) {
    panel.x[i].resize(panel.group_sizes[i], d);
    panel.y[i].resize(panel.group_sizes[i]);
  }
  std::vector<int> cursor(panel.n, 0);
  for (std::size_t r = 0; r < records.size(); ++r) {
    int i = date_index[records[r].date_key()];
    int j = cursor[i]++;
    panel.x[i].row(j) = raw.row(r);
    panel.y[i](j) = records[r].ozone;
  }
  panel.validate();
  return out;
}

void save_scaling(const ScalingParams& scaling, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("scaling: cannot open for writing: " + path);
  os << "tsreg-scaling 1\n";
  char lo[32], hi[32];
  for (std::size_t c = 0; c < scaling.feature_names.size(); ++c) {
    std::snprintf(lo, sizeof(lo), "%.17g", scaling.minima[c]);
    std::snprintf(hi, sizeof(hi), "%.17g", scaling.maxima[c]);
    os << scaling.feature_names[c] << ' ' << lo << ' ' << hi << '\n';
  }
}

std::pair<PanelDataset, PanelDataset> train_test_split(const PanelDataset& dataset,
                                                       double fraction,
                                                       std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("train_test_split: fraction must lie in (0,1)");
  const long N = dataset.total_observations();
  std::vector<std::pair<int, int>> obs;
  obs.reserve(N);
  for (int i = 0; i < dataset.n; ++i)
    for (int j = 0; j < dataset.group_sizes[i]; ++j) obs.emplace_back(i, j);
  Rng rng(seed);
  for (long i = N - 1; i > 0; --i) std::swap(obs[i], obs[rng.below(i + 1)]);
  long n_train = std::lround(fraction * static_cast<double>(N));
  n_train = std::clamp<long>(n_train, 1, N - 1);

  std::vector<std::vector<int>> assignment(dataset.n);  // 1 = train, 0 = test
  for (int i = 0; i < dataset.n; ++i) assignment[i].assign(dataset.group_sizes[i], 0);
  for (long k = 0; k < n_train; ++k) assignment[obs[k].first][obs[k].second] = 1;

  auto build = [&](int keep) {
    PanelDataset out;
    out.d = dataset.d;
    for (int i = 0; i < dataset.n; ++i) {
      std::vector<int> js;
      for (int j = 0; j < dataset.group_sizes[i]; ++j)
        if (assignment[i][j] == keep) js.push_back(j);
      if (js.empty()) continue;
      Eigen::MatrixXd x(js.size(), dataset.d);
      Eigen::VectorXd y(js.size());
      Eigen::VectorXd f(js.size());
      for (std::size_t t = 0; t < js.size(); ++t) {
        x.row(t) = dataset.x[i].row(js[t]);
        y(t) = dataset.y[i](js[t]);
        if (dataset.has_f_true()) f(t) = dataset.f_true[i](js[t]);
      }
      out.group_sizes.push_back(static_cast<int>(js.size()));
      out.x.push_back(std::move(x));
      out.y.push_back(std::move(y));
      if (dataset.has_f_true()) out.f_true.push_back(std::move(f));
    }
    out.n = static_cast<int>(out.group_sizes.size());
    out.validate();
    return out;
  };
  return {build(1), build(0)};
}

}  // namespace tsreg
