// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

// cve_gnn: train, evaluate and probe control-variate GCN models.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "cvegnn/checkpoint.hpp"
#include "cvegnn/config.hpp"
#include "cvegnn/diagnostics.hpp"
#include "cvegnn/experiment.hpp"
#include "cvegnn/kernels.hpp"
#include "cvegnn/sbm.hpp"

#ifndef CVEGNN_SOURCE_DIR
#define CVEGNN_SOURCE_DIR "."
#endif

namespace fs = std::filesystem;
using namespace cvegnn;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Value-carrying keys shared by every subcommand that trains.
const std::vector<std::pair<std::string, std::string>> kValueKeys = {
    {"dataset-dir", "Dataset directory (edges.tsv, features.bin/csv, labels.tsv, train/val/test.txt)"},
    {"optimizer", "sgd | heavy-ball | adam | amsgrad | adagrad"},
    {"lr", "Step size alpha"},
    {"beta1", "First-moment decay (not for sgd)"},
    {"beta2", "Second-moment decay (adam, amsgrad)"},
    {"eps", "Added under the square root of V_t"},
    {"weight-decay", "L2 penalty coefficient"},
    {"dropout", "Dropout rate in [0, 1)"},
    {"hidden-dim", "Hidden width"},
    {"layers", "Number of GCN layers K"},
    {"neighbors", "Sampled neighbors per node and layer"},
    {"batch-size", "Minibatch draws per iteration"},
    {"epochs", "Training epochs"},
    {"seed", "Random seed"},
    {"runs", "Repetitions (seeds seed, seed+1, ...)"},
    {"sampling-mode", "without-replacement | with-replacement-dedup"},
    {"sample-scaling", "pool | literal"},
    {"cache-init", "activated | linear"},
    {"eval-every", "Iterations between evaluations (0: once per epoch)"},
    {"metrics-out", "Metrics CSV path"},
    {"checkpoint-out", "Weight checkpoint path"},
    {"output-iterate", "last | uniform-random"},
    {"sbm-nodes", "Synthetic SBM: node count"},
    {"sbm-blocks", "Synthetic SBM: block count"},
    {"sbm-p-in", "Synthetic SBM: within-block edge probability"},
    {"sbm-p-out", "Synthetic SBM: cross-block edge probability"},
    {"sbm-dim", "Synthetic SBM: feature dimension"},
    {"sbm-seed", "Synthetic SBM: generator seed"},
};
const std::vector<std::pair<std::string, std::string>> kBoolKeys = {
    {"adam-bias-correction", "Bias-corrected Adam moments"},
    {"deterministic", "Single thread and wall_s = 0, for byte-identical reruns"},
};

struct ExperimentFlags {
  std::map<std::string, std::string> values;
  std::map<std::string, bool> bools;
  std::map<std::string, CLI::Option*> options;
  std::string config_path;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "key = value experiment file; flags override it");
    for (const auto& [key, help] : kValueKeys) options[key] = app->add_option("--" + key, values[key], help);
    for (const auto& [key, help] : kBoolKeys) options[key] = app->add_flag("--" + key, bools[key], help);
  }

  bool given(const std::string& key) const { return options.at(key)->count() > 0; }

  /// File values overlaid with explicitly given flags.
  KeyValueConfig merged(KeyValueConfig base = {}) const {
    if (!config_path.empty()) {
      const KeyValueConfig file = KeyValueConfig::load(config_path);
      for (const auto& [k, v] : file.entries()) base.set(k, v);
    }
    for (const auto& [key, help] : kValueKeys) {
      if (given(key)) base.set(key, values.at(key));
    }
    for (const auto& [key, help] : kBoolKeys) {
      if (given(key)) base.set(key, bools.at(key) ? "true" : "false");
    }
    const std::string kind = base.get("optimizer").value_or("sgd");
    const std::string origin = given("optimizer") ? "--optimizer " + kind : "optimizer " + kind + " (from config)";
    if (kind == "sgd" && given("beta1")) throw UsageError("conflicting flags: " + origin + " and --beta1");
    if (kind != "adam" && kind != "amsgrad" && given("beta2")) {
      throw UsageError("conflicting flags: " + origin + " and --beta2");
    }
    return base;
  }

  ExperimentSpec spec(KeyValueConfig base = {}) const {
    ExperimentSpec s = ExperimentSpec::from_config(merged(std::move(base)));
    if (s.dataset_dir.empty() && !s.sbm) s.sbm = SbmConfig{};
    s.validate();
    return s;
  }
};

void apply_runtime(const ExperimentSpec& spec) {
  if (!spec.train.record_wall_time) kernels::set_max_threads(1);
}

void print_summary(const RepetitionSummary& s) {
  std::cout.setf(std::ios::fixed);
  std::cout.precision(4);
  for (std::size_t r = 0; r < s.run_max_test.size(); ++r) {
    std::cout << "run " << r << ": max test accuracy " << s.run_max_test[r] << '\n';
  }
  std::cout << "mean of per-run max test accuracy: " << s.mean_of_max << '\n';
  std::cout << "max of mean test-accuracy curve:   " << s.max_of_mean << '\n';
}

int run_training(const ExperimentSpec& spec) {
  apply_runtime(spec);
  const Problem problem = load_problem(spec);
  const auto summary = run_repetitions(problem, spec, [&](std::size_t r, const TrainResult& result) {
    if (!spec.metrics_out.empty()) {
      const auto path = per_run_path(spec.metrics_out, r, spec.runs);
      std::ofstream out(path);
      if (!out) throw std::runtime_error("cannot write " + path.string());
      write_metrics_csv(out, result.metrics);
    }
    if (!spec.checkpoint_out.empty()) save_params(result.params, per_run_path(spec.checkpoint_out, r, spec.runs));
    const auto& last = result.metrics.records.back();
    std::cout << "run " << r << " (seed " << spec.train.seed + r << "): " << last.iter << " iterations, final test "
              << last.acc.test << ", max test " << result.metrics.max_test_accuracy() << '\n';
  });
  print_summary(summary);
  return 0;
}

fs::path default_data_root() {
  if (const char* env = std::getenv("CVE_GNN_DATA_ROOT"); env && *env) return env;
  return fs::path(CVEGNN_SOURCE_DIR) / "data";
}

}  // namespace

int main(int argc, char** argv) {
  kernels::configure_threads_from_env();

  CLI::App app{"Control-variate GCN training with Adam-type optimizers"};
  app.require_subcommand(1);

  auto* train_cmd = app.add_subcommand("train", "Train a model");
  ExperimentFlags train_flags;
  train_flags.attach(train_cmd);

  auto* eval_cmd = app.add_subcommand("evaluate", "Score a weight checkpoint on every split");
  ExperimentFlags eval_flags;
  eval_flags.attach(eval_cmd);
  std::string checkpoint_in;
  eval_cmd->add_option("--checkpoint", checkpoint_in, "Checkpoint written by train")->required();

  auto* bias_cmd = app.add_subcommand("probe-bias", "Monte-Carlo bias of the sampled gradient at alpha and alpha/d");
  ExperimentFlags bias_flags;
  bias_flags.attach(bias_cmd);
  std::size_t bias_iters = 50, bias_samples = 1000;
  double bias_divisor = 4.0;
  bool bias_full_batch = false;
  std::string bias_out;
  bias_cmd->add_option("--probe-iters", bias_iters, "Training iterations before the snapshot");
  bias_cmd->add_option("--samples", bias_samples, "Monte-Carlo draws m (>= 100)")->check(CLI::Range(100, 100000000));
  bias_cmd->add_option("--alpha-divisor", bias_divisor, "Second step size is lr / divisor");
  bias_cmd->add_flag("--full-batch", bias_full_batch, "Every draw uses the whole training set");
  bias_cmd->add_option("--probe-out", bias_out, "Probe CSV path");

  auto* rate_cmd = app.add_subcommand("probe-rate", "Mean exact squared gradient norm with alpha = eta/sqrt(T)");
  ExperimentFlags rate_flags;
  rate_flags.attach(rate_cmd);
  double rate_eta = 0.1;
  std::vector<std::uint64_t> rate_horizons{100, 400};
  std::size_t rate_evals = 50;
  std::string rate_out;
  rate_cmd->add_option("--eta", rate_eta, "Step-size numerator");
  rate_cmd->add_option("--horizons", rate_horizons, "Increasing T grid")->delimiter(',');
  rate_cmd->add_option("--max-evals", rate_evals, "Exact gradient evaluations per T");
  rate_cmd->add_option("--probe-out", rate_out, "Probe CSV path");

  auto* grad_cmd = app.add_subcommand("gradcheck", "backward() against central finite differences");
  ExperimentFlags grad_flags;
  grad_flags.attach(grad_cmd);
  double grad_h = 1e-5, grad_tol = 1e-5;
  grad_cmd->add_option("--step", grad_h, "Finite-difference step");
  grad_cmd->add_option("--tolerance", grad_tol, "Maximum per-coordinate relative error");

  auto* sbm_cmd = app.add_subcommand("gen-sbm", "Write a stochastic-block-model dataset directory");
  SbmConfig sbm;
  std::string sbm_out;
  sbm_cmd->add_option("--nodes", sbm.nodes, "Node count");
  sbm_cmd->add_option("--blocks", sbm.blocks, "Block (class) count");
  sbm_cmd->add_option("--p-in", sbm.p_in, "Within-block edge probability");
  sbm_cmd->add_option("--p-out", sbm.p_out, "Cross-block edge probability");
  sbm_cmd->add_option("--dim", sbm.dim, "Feature dimension (>= blocks)");
  sbm_cmd->add_option("--seed", sbm.seed, "Generator seed");
  sbm_cmd->add_option("--out", sbm_out, "Output directory")->required();

  auto* repro_cmd = app.add_subcommand("repro", "Run a shipped reproduction config");
  ExperimentFlags repro_flags;
  repro_flags.attach(repro_cmd);
  std::string repro_dataset, repro_optimizer, data_root, config_dir = std::string(CVEGNN_SOURCE_DIR) + "/configs";
  repro_cmd->add_option("DATASET", repro_dataset, "cora | citeseer | ogbn-arxiv | flickr | reddit")->required();
  repro_cmd->add_option("OPTIMIZER", repro_optimizer, "sgd | heavy-ball | adam | amsgrad | adagrad")->required();
  repro_cmd->add_option("--data-root", data_root, "Directory holding <dataset>/ (default $CVE_GNN_DATA_ROOT)");
  repro_cmd->add_option("--config-dir", config_dir, "Directory of <dataset>-<optimizer>.conf files");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  auto usage = [&](const CLI::App* sub, const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n\n" << sub->help();
    return 2;
  };

  CLI::App* active = app.get_subcommands().front();
  try {
    if (active == train_cmd) return run_training(train_flags.spec());

    if (active == eval_cmd) {
      const ExperimentSpec spec = eval_flags.spec();
      apply_runtime(spec);
      const Problem problem = load_problem(spec);
      const ModelParams params = load_params(checkpoint_in);
      const auto acc = evaluate_splits(problem, params);
      std::cout << "train " << acc.train << "\nval " << acc.val << "\ntest " << acc.test << '\n';
      return 0;
    }

    if (active == bias_cmd) {
      const ExperimentSpec spec = bias_flags.spec();
      apply_runtime(spec);
      const Problem problem = load_problem(spec);
      std::ofstream csv;
      if (!bias_out.empty()) {
        csv.open(bias_out);
        if (!csv) throw std::runtime_error("cannot write " + bias_out);
        write_probe_csv_header(csv);
      }
      for (double alpha : {spec.train.optimizer.lr, spec.train.optimizer.lr / bias_divisor}) {
        TrainConfig tc = spec.train;
        tc.optimizer.lr = alpha;
        TrainingSession session(problem, tc);
        for (std::size_t t = 0; t < bias_iters; ++t) session.step();
        BiasProbeConfig pc;
        pc.sampler = tc.sampler();
        pc.samples = bias_samples;
        pc.full_batch = bias_full_batch;
        pc.seed = spec.train.seed + 0x9e3779b9ULL;
        pc.alpha = alpha;
        const auto est = bias_probe(problem, session.params(), session.cache(), pc);
        std::cout << "alpha " << alpha << ": bias " << est.estimate << " (stderr " << est.std_error << ", max stderr "
                  << est.max_std_error << ", m " << est.samples << ")\n";
        if (csv.is_open()) write_probe_csv(csv, est);
      }
      return 0;
    }

    if (active == rate_cmd) {
      const ExperimentSpec spec = rate_flags.spec();
      apply_runtime(spec);
      const Problem problem = load_problem(spec);
      RateProbeConfig rc;
      rc.train = spec.train;
      rc.eta = rate_eta;
      rc.horizons = rate_horizons;
      rc.max_evaluations = rate_evals;
      const auto trace = rate_probe(problem, rc);
      for (const auto& p : trace.points) {
        std::cout << "T " << p.horizon << " alpha " << p.alpha << ": mean ||grad F||^2 " << p.statistic
                  << " (stderr " << p.std_error << ", " << p.evaluations << " iterates)\n";
      }
      if (!rate_out.empty()) {
        std::ofstream csv(rate_out);
        if (!csv) throw std::runtime_error("cannot write " + rate_out);
        write_probe_csv_header(csv);
        write_probe_csv(csv, "rate-" + to_string(spec.train.optimizer.kind), trace);
      }
      return 0;
    }

    if (active == grad_cmd) {
      KeyValueConfig base;
      for (auto [k, v] : {std::pair{"sbm-nodes", "8"}, {"sbm-blocks", "2"}, {"sbm-p-in", "0.6"},
                          {"sbm-p-out", "0.2"}, {"sbm-dim", "4"}, {"hidden-dim", "5"}, {"batch-size", "3"}}) {
        base.set(k, v);
      }
      const ExperimentSpec spec = grad_flags.spec(base);
      apply_runtime(spec);
      const Problem problem = load_problem(spec);
      Rng rng(spec.train.seed);
      std::vector<std::size_t> dims{problem.features.cols()};
      for (std::size_t k = 1; k < spec.train.layers; ++k) dims.push_back(spec.train.hidden_dim);
      dims.push_back(problem.num_classes);
      const ModelParams params = ModelParams::glorot(dims, rng);
      const HistoricalCache cache = init_cache(problem, ModelParams::glorot(dims, rng));
      const auto batch = sample_minibatch(problem.split.train, spec.train.batch_size, rng);
      const auto plan =
          build_plan(problem.graph, problem.propagation, batch, spec.train.layers, spec.train.sampler(), rng);
      const auto res = gradient_check(problem, params, cache, plan, grad_h, spec.train.optimizer.weight_decay);
      std::cout << "coordinates " << res.coordinates << ", max relative error " << res.max_rel_error
                << ", max absolute error " << res.max_abs_error << '\n';
      return res.max_rel_error < grad_tol ? 0 : 1;
    }

    if (active == sbm_cmd) {
      save_dataset(gen_sbm(sbm), sbm_out);
      std::cout << "wrote " << sbm_out << '\n';
      return 0;
    }

    if (active == repro_cmd) {
      const fs::path conf = fs::path(config_dir) / (repro_dataset + "-" + repro_optimizer + ".conf");
      KeyValueConfig base = KeyValueConfig::load(conf);
      const fs::path root = data_root.empty() ? default_data_root() : fs::path(data_root);
      if (!repro_flags.given("dataset-dir")) base.set("dataset-dir", (root / repro_dataset).string());
      const ExperimentSpec spec = repro_flags.spec(base);
      if (spec.large_scale) std::cout << "note: " << conf.filename().string() << " is a large-scale config\n";
      std::cout << "repro " << repro_dataset << ' ' << repro_optimizer << ": lr " << spec.train.optimizer.lr
                << ", neighbors " << spec.train.neighbors << ", batch " << spec.train.batch_size << ", hidden "
                << spec.train.hidden_dim << ", weight decay " << spec.train.optimizer.weight_decay << ", dropout "
                << spec.train.dropout << ", epochs " << spec.train.epochs << ", runs " << spec.runs << '\n';
      return run_training(spec);
    }
  } catch (const UsageError& e) {
    return usage(active, e);
  } catch (const ConfigError& e) {
    return usage(active, e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
