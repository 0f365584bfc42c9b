// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "cvegnn/config.hpp"
#include "cvegnn/model.hpp"
#include "cvegnn/trainer.hpp"

namespace cvegnn {

/// Loads spec.dataset_dir, or generates the SBM instance when no directory is set.
Problem load_problem(const ExperimentSpec& spec);

struct RepetitionSummary {
  std::vector<RunMetrics> runs;
  std::vector<double> run_max_test;  // max over evaluations, per run
  double mean_of_max = 0.0;          // mean of run_max_test
  double max_of_mean = 0.0;          // max over evaluations of the run-mean test curve
  ModelParams last_params;
};

/// Trains spec.runs times with seeds seed, seed + 1, ...
/// `on_run(r, result)` is called after each run.
RepetitionSummary run_repetitions(const Problem& problem, const ExperimentSpec& spec,
                                  const std::function<void(std::size_t, const TrainResult&)>& on_run = {});

/// "<stem>.run<r><ext>" when runs > 1, else `path` unchanged.
std::filesystem::path per_run_path(const std::filesystem::path& path, std::size_t run, std::size_t runs);

}  // namespace cvegnn
