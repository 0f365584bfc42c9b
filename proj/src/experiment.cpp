// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "cvegnn/experiment.hpp"

#include <algorithm>
#include <cmath>

#include "cvegnn/sbm.hpp"

namespace cvegnn {

Problem load_problem(const ExperimentSpec& spec) {
  if (!spec.dataset_dir.empty()) return Problem::from_dataset(load_dataset(spec.dataset_dir));
  if (spec.sbm) return Problem::from_dataset(gen_sbm(*spec.sbm));
  throw ConfigError("no dataset: set dataset-dir or sbm-* keys");
}

RepetitionSummary run_repetitions(const Problem& problem, const ExperimentSpec& spec,
                                  const std::function<void(std::size_t, const TrainResult&)>& on_run) {
  RepetitionSummary out;
  std::vector<double> curve_sum;
  std::vector<std::size_t> curve_count;
  for (std::size_t r = 0; r < spec.runs; ++r) {
    TrainConfig tc = spec.train;
    tc.seed = spec.train.seed + r;
    TrainResult result = train(problem, tc);
    const auto& recs = result.metrics.records;
    if (curve_sum.size() < recs.size()) {
      curve_sum.resize(recs.size(), 0.0);
      curve_count.resize(recs.size(), 0);
    }
    for (std::size_t i = 0; i < recs.size(); ++i) {
      if (std::isfinite(recs[i].acc.test)) {
        curve_sum[i] += recs[i].acc.test;
        ++curve_count[i];
      }
    }
    out.run_max_test.push_back(result.metrics.max_test_accuracy());
    if (on_run) on_run(r, result);
    out.runs.push_back(std::move(result.metrics));
    out.last_params = std::move(result.params);
  }
  double sum = 0.0;
  for (double v : out.run_max_test) sum += v;
  out.mean_of_max = sum / static_cast<double>(out.run_max_test.size());
  for (std::size_t i = 0; i < curve_sum.size(); ++i) {
    if (curve_count[i] > 0) out.max_of_mean = std::max(out.max_of_mean, curve_sum[i] / curve_count[i]);
  }
  return out;
}

std::filesystem::path per_run_path(const std::filesystem::path& path, std::size_t run, std::size_t runs) {
  if (runs <= 1) return path;
  auto out = path;
  out.replace_filename(path.stem().string() + ".run" + std::to_string(run) + path.extension().string());
  return out;
}

}  // namespace cvegnn
