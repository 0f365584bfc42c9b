// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

// Flat "key = value" experiment files. Keys are the long CLI flag names
// without dashes; '#' starts a comment and ':' is accepted in place of '='.

#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cvegnn/sbm.hpp"
#include "cvegnn/trainer.hpp"

namespace cvegnn {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Ordered key/value pairs; keys are unique.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::string_view text, const std::string& source = "<config>");
  static KeyValueConfig load(const std::filesystem::path& path);

  std::optional<std::string> get(const std::string& key) const;
  bool contains(const std::string& key) const { return get(key).has_value(); }
  /// Inserts or overwrites, keeping the original position.
  void set(const std::string& key, std::string value);
  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  std::string serialize() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Everything needed to run one experiment.
struct ExperimentSpec {
  std::string dataset;       // name used by repro, e.g. "cora"
  std::string dataset_dir;   // empty for synthetic
  std::optional<SbmConfig> sbm;
  TrainConfig train;
  std::size_t runs = 1;
  std::string metrics_out;
  std::string checkpoint_out;
  bool large_scale = false;

  /// Optimizer hyper-parameters start from OptimizerConfig::defaults_for.
  /// Throws ConfigError on unknown keys, bad values and keys that do not
  /// apply to the chosen optimizer (beta1 for sgd; beta2 outside adam/amsgrad).
  static ExperimentSpec from_config(const KeyValueConfig& config);
  KeyValueConfig to_config() const;

  void validate() const;
  bool operator==(const ExperimentSpec&) const = default;
};

/// Shortest decimal text that parses back to the same double.
std::string format_real(double v);

}  // namespace cvegnn
