/// Command-line driver: panel generation, estimator training and evaluation,
// Monte Carlo benchmark sweeps, EPA ozone ingestion, and result reporting.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>

#include "tsreg/baselines.hpp"
#include "tsreg/experiment.hpp"
#include "tsreg/metrics.hpp"

namespace {

std::string default_out_dir() {
  const char* env = std::getenv("TSREG_OUT_DIR");
  return env ? env : ".";
}

struct ArchFlags {
  double p = 2.0;
  int K = 1;
  std::string arch_case = "wide";
  double c_L = 1.0, c_r = 1.0, c_A = 1.0;
  double sigma_eps = 1.0, sigma_gamma = 0.0;

  void attach(CLI::App* app) {
    app->add_option("--p", p, "smoothness used for sizing");
    app->add_option("--K", K, "order used for sizing");
    app->add_option("--case", arch_case, "wide or deep")
        ->check(CLI::IsMember({"wide", "deep"}));
    app->add_option("--c-L", c_L, "depth sizing constant");
    app->add_option("--c-r", c_r, "width sizing constant");
    app->add_option("--c-A", c_A, "truncation sizing constant");
    app->add_option("--sigma-eps", sigma_eps, "measurement-error scale for truncation");
    app->add_option("--sigma-gamma", sigma_gamma, "spatial-noise scale for truncation");
  }

  tsreg::ArchSpec resolve(int n, double m_bar) const {
    return tsreg::size_architecture(
        n, m_bar, p, K,
        arch_case == "wide" ? tsreg::ArchCase::Wide : tsreg::ArchCase::Deep,
        {c_L, c_r, c_A}, sigma_eps, sigma_gamma);
  }
};

struct TrainFlags {
  tsreg::TrainConfig cfg;

  void attach(CLI::App* app) {
    app->add_option("--epochs", cfg.epochs);
    app->add_option("--batch-size", cfg.batch_size, "0 = full batch");
    app->add_option("--lr", cfg.learning_rate);
    app->add_option("--lr-decay", cfg.lr_decay);
    app->add_option("--lr-decay-every", cfg.lr_decay_every);
    app->add_option("--momentum", cfg.momentum);
    app->add_option("--patience", cfg.patience, "0 = no early stopping");
    app->add_option("--train-seed", cfg.seed);
  }
};

int run(int argc, char** argv) {
  CLI::App app{"temporal-spatial dense ReLU regression toolkit"};
  app.require_subcommand(1);

  // ---- generate -------------------------------------------------------
  auto* gen = app.add_subcommand("generate", "generate a synthetic panel file");
  int g_scenario = 2, g_d = 2, g_n = 500, g_m_mult = 1, g_d_star = 0;
  std::uint64_t g_seed = 1;
  tsreg::PanelNoise g_noise;
  std::string g_out = default_out_dir() + "/panel.txt";
  gen->add_option("--scenario", g_scenario)->check(CLI::Range(1, 6));
  gen->add_option("--d", g_d);
  gen->add_option("--n", g_n);
  gen->add_option("--m-mult", g_m_mult);
  gen->add_option("--d-star", g_d_star, "manifold intrinsic dimension; 0 = ambient uniform");
  gen->add_option("--sigma-xi", g_noise.sigma_xi);
  gen->add_option("--sigma-b", g_noise.sigma_b);
  gen->add_option("--phi", g_noise.phi);
  gen->add_option("--seed", g_seed);
  gen->add_option("--out", g_out);

  // ---- fit ------------------------------------------------------------
  auto* fit_cmd = app.add_subcommand("fit", "train the dense ReLU estimator on a panel");
  std::string f_panel, f_checkpoint = default_out_dir() + "/net.ckpt", f_trace;
  ArchFlags f_arch;
  TrainFlags f_train;
  fit_cmd->add_option("--panel", f_panel)->required();
  fit_cmd->add_option("--out-checkpoint", f_checkpoint);
  fit_cmd->add_option("--trace", f_trace, "append per-epoch objective CSV here");
  f_arch.attach(fit_cmd);
  f_train.attach(fit_cmd);

  // ---- eval -----------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint against a panel");
  std::string e_checkpoint, e_panel;
  double e_truncation = 0.0;
  eval_cmd->add_option("--checkpoint", e_checkpoint)->required();
  eval_cmd->add_option("--panel", e_panel)->required();
  eval_cmd->add_option("--A", e_truncation, "truncation threshold; 0 = no truncation");

  // ---- bench ----------------------------------------------------------
  auto* bench = app.add_subcommand("bench", "run a Monte Carlo benchmark experiment");
  std::string b_config;
  std::vector<std::string> b_overrides;
  bench->add_option("--config", b_config, "key=value experiment file")->required();
  bench->add_option("--set", b_overrides, "extra key=value overrides");

  // ---- ingest-ozone ---------------------------------------------------
  auto* ingest = app.add_subcommand("ingest-ozone", "convert an EPA-style ozone CSV to a panel");
  std::string i_csv, i_out = default_out_dir() + "/ozone_panel.txt";
  bool i_no_state = false;
  ingest->add_option("--csv", i_csv)->required();
  ingest->add_option("--out", i_out);
  ingest->add_flag("--no-state-onehot", i_no_state, "exclude the state-code one-hot block");

  // ---- summarize ------------------------------------------------------
  auto* summ = app.add_subcommand("summarize", "tabulate stored experiment results");
  std::vector<std::string> s_files;
  summ->add_option("results", s_files, "result files")->required();

  // ---- plotdata -------------------------------------------------------
  auto* plot = app.add_subcommand("plotdata", "emit long-format per-replication CSV");
  std::string p_result, p_out = default_out_dir() + "/plotdata.csv";
  plot->add_option("--result", p_result)->required();
  plot->add_option("--out", p_out);

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    tsreg::PanelDataset panel =
        g_d_star > 0
            ? tsreg::generate_manifold_panel(tsreg::scenario_from_int(g_scenario), g_d,
                                             g_d_star, g_n, g_m_mult, g_noise, g_seed)
            : tsreg::generate_panel(tsreg::scenario_from_int(g_scenario), g_d, g_n,
                                    g_m_mult, g_noise, g_seed);
    tsreg::save_panel(panel, g_out);
    std::cout << "wrote " << g_out << " (" << panel.total_observations()
              << " observations)\n";
  } else if (fit_cmd->parsed()) {
    tsreg::PanelDataset panel = tsreg::load_panel(f_panel);
    tsreg::ArchSpec arch =
        f_arch.resolve(panel.n, tsreg::harmonic_mean(panel.group_sizes));
    tsreg::FitResult result = tsreg::fit(panel, arch, f_train.cfg);
    tsreg::save_checkpoint(result.net, f_checkpoint);
    if (!f_trace.empty()) tsreg::append_trace_csv(result.trace, f_trace);
    std::cout << "L=" << arch.depth << " r=" << arch.width << " A=" << arch.truncation
              << " final_objective=" << result.trace.back().objective << '\n';
    std::cout << "wrote " << f_checkpoint << '\n';
  } else if (eval_cmd->parsed()) {
    tsreg::DenseNet net = tsreg::load_checkpoint(e_checkpoint);
    tsreg::PanelDataset panel = tsreg::load_panel(e_panel);
    double A = e_truncation > 0.0 ? e_truncation : std::numeric_limits<double>::max();
    auto preds = tsreg::predict_panel(net, A, panel);
    std::vector<Eigen::VectorXd> resid(panel.n);
    for (int i = 0; i < panel.n; ++i) resid[i] = preds[i] - panel.y[i];
    std::cout << "empirical_mse=" << tsreg::empirical_norm_sq(resid, panel.group_sizes)
              << '\n';
    if (panel.has_f_true())
      std::cout << "relative_error="
                << tsreg::relative_error(preds, panel.f_true, panel.group_sizes) << '\n';
  } else if (bench->parsed()) {
    std::vector<std::string> lines;
    {
      std::ifstream is(b_config);
      if (!is) throw std::runtime_error("config: cannot open: " + b_config);
      std::string line;
      while (std::getline(is, line)) lines.push_back(line);
    }
    lines.insert(lines.end(), b_overrides.begin(), b_overrides.end());
    tsreg::ExperimentConfig cfg = tsreg::parse_config_lines(lines);
    if (cfg.out_dir == ".") cfg.out_dir = default_out_dir();
    tsreg::ExperimentResult result = tsreg::run_experiment(cfg);
    for (const std::string& method : result.methods()) {
      if (result.completed(method) == 0) {
        std::cout << method << ": all " << result.failed(method) << " replications failed\n";
        continue;
      }
      auto [mean, stddev] = result.stats(method);
      std::cout << method << ": mean=" << mean << " std=" << stddev
                << " completed=" << result.completed(method)
                << " failed=" << result.failed(method) << '\n';
    }
    std::cout << "wrote " << tsreg::result_path(cfg) << '\n';
  } else if (ingest->parsed()) {
    tsreg::OzoneIngestResult out = tsreg::ingest_ozone_csv(i_csv, !i_no_state);
    tsreg::save_panel(out.panel, i_out);
    tsreg::save_scaling(out.scaling, i_out + ".scaling");
    std::cout << "wrote " << i_out << " (n=" << out.panel.n << ", d=" << out.panel.d
              << ") and " << i_out << ".scaling\n";
  } else if (summ->parsed()) {
    std::vector<tsreg::ExperimentResult> results;
    for (const std::string& file : s_files) results.push_back(tsreg::load_result(file));
    std::cout << tsreg::summarize(results);
  } else if (plot->parsed()) {
    tsreg::emit_plot_data(tsreg::load_result(p_result), p_out);
    std::cout << "wrote " << p_out << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
