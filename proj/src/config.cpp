// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

#include "cvegnn/config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace cvegnn {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text, const std::string& source) {
  KeyValueConfig out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto sep = line.find_first_of("=:");
    const auto where = source + ":" + std::to_string(line_no) + ": ";
    if (sep == std::string_view::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key(trim(line.substr(0, sep)));
    const std::string value(trim(line.substr(sep + 1)));
    if (key.empty()) throw ConfigError(where + "empty key");
    if (out.contains(key)) throw ConfigError(where + "duplicate key '" + key + "'");
    out.entries_.emplace_back(key, value);
  }
  return out;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

void KeyValueConfig::set(const std::string& key, std::string value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(key, std::move(value));
}

std::string KeyValueConfig::serialize() const {
  std::string out;
  for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
  return out;
}

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

double to_real(const std::string& key, const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError(key + ": expected a real number, got '" + s + "'");
  }
  return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& s) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + s + "'");
  }
  return v;
}

bool to_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + s + "'");
}

std::string bool_text(bool b) { return b ? "true" : "false"; }

std::string to_string(CacheInit c) { return c == CacheInit::kActivated ? "activated" : "linear"; }
std::string to_string(SampleScaling s) { return s == SampleScaling::kPoolOverRealized ? "pool" : "literal"; }

template <typename F>
auto wrap(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

bool uses_beta2(OptimizerKind k) { return k == OptimizerKind::kAdam || k == OptimizerKind::kAmsgrad; }

}  // namespace

ExperimentSpec ExperimentSpec::from_config(const KeyValueConfig& config) {
  ExperimentSpec spec;
  auto& tc = spec.train;
  const OptimizerKind kind =
      config.contains("optimizer")
          ? wrap("optimizer", [&] { return parse_optimizer_kind(*config.get("optimizer")); })
          : OptimizerKind::kSgd;
  tc.optimizer = OptimizerConfig::defaults_for(kind);
  if (kind == OptimizerKind::kSgd && config.contains("beta1")) {
    throw ConfigError("beta1 does not apply to optimizer sgd");
  }
  if (!uses_beta2(kind) && config.contains("beta2")) {
    throw ConfigError("beta2 does not apply to optimizer " + to_string(kind));
  }

  SbmConfig sbm;
  bool any_sbm = false;
  for (const auto& [key, value] : config.entries()) {
    auto& oc = tc.optimizer;
    if (key == "optimizer") continue;
    else if (key == "dataset") spec.dataset = value;
    else if (key == "dataset-dir") spec.dataset_dir = value;
    else if (key == "lr") oc.lr = to_real(key, value);
    else if (key == "beta1") oc.beta1 = to_real(key, value);
    else if (key == "beta2") oc.beta2 = to_real(key, value);
    else if (key == "eps") oc.eps = to_real(key, value);
    else if (key == "weight-decay") oc.weight_decay = to_real(key, value);
    else if (key == "adam-bias-correction") oc.adam_bias_correction = to_bool(key, value);
    else if (key == "dropout") tc.dropout = to_real(key, value);
    else if (key == "hidden-dim") tc.hidden_dim = to_uint(key, value);
    else if (key == "layers") tc.layers = to_uint(key, value);
    else if (key == "neighbors") tc.neighbors = to_uint(key, value);
    else if (key == "batch-size") tc.batch_size = to_uint(key, value);
    else if (key == "epochs") tc.epochs = to_uint(key, value);
    else if (key == "seed") tc.seed = to_uint(key, value);
    else if (key == "eval-every") tc.eval_every = to_uint(key, value);
    else if (key == "sampling-mode") tc.sampling_mode = wrap(key, [&] { return parse_sampling_mode(value); });
    else if (key == "sample-scaling") {
      if (value == "pool") tc.scaling = SampleScaling::kPoolOverRealized;
      else if (value == "literal") tc.scaling = SampleScaling::kLiteral;
      else throw ConfigError(key + ": expected pool or literal, got '" + value + "'");
    } else if (key == "cache-init") {
      if (value == "activated") tc.cache_init = CacheInit::kActivated;
      else if (value == "linear") tc.cache_init = CacheInit::kLinear;
      else throw ConfigError(key + ": expected activated or linear, got '" + value + "'");
    } else if (key == "output-iterate") tc.output_iterate = wrap(key, [&] { return parse_output_iterate(value); });
    else if (key == "deterministic") tc.record_wall_time = !to_bool(key, value);
    else if (key == "runs") spec.runs = to_uint(key, value);
    else if (key == "metrics-out") spec.metrics_out = value;
    else if (key == "checkpoint-out") spec.checkpoint_out = value;
    else if (key == "large-scale") spec.large_scale = to_bool(key, value);
    else if (key == "sbm-nodes") any_sbm = true, sbm.nodes = to_uint(key, value);
    else if (key == "sbm-blocks") any_sbm = true, sbm.blocks = to_uint(key, value);
    else if (key == "sbm-p-in") any_sbm = true, sbm.p_in = to_real(key, value);
    else if (key == "sbm-p-out") any_sbm = true, sbm.p_out = to_real(key, value);
    else if (key == "sbm-dim") any_sbm = true, sbm.dim = to_uint(key, value);
    else if (key == "sbm-seed") any_sbm = true, sbm.seed = to_uint(key, value);
    else throw ConfigError("unknown key '" + key + "'");
  }
  if (any_sbm) spec.sbm = sbm;
  // Value checks only; the dataset location may still be supplied later.
  if (spec.runs < 1) throw ConfigError("runs must be >= 1");
  try {
    spec.train.validate();
    if (spec.sbm) spec.sbm->validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return spec;
}

KeyValueConfig ExperimentSpec::to_config() const {
  KeyValueConfig c;
  const auto& tc = train;
  const auto& oc = tc.optimizer;
  if (!dataset.empty()) c.set("dataset", dataset);
  if (!dataset_dir.empty()) c.set("dataset-dir", dataset_dir);
  if (sbm) {
    c.set("sbm-nodes", std::to_string(sbm->nodes));
    c.set("sbm-blocks", std::to_string(sbm->blocks));
    c.set("sbm-p-in", format_real(sbm->p_in));
    c.set("sbm-p-out", format_real(sbm->p_out));
    c.set("sbm-dim", std::to_string(sbm->dim));
    c.set("sbm-seed", std::to_string(sbm->seed));
  }
  if (large_scale) c.set("large-scale", "true");
  c.set("optimizer", to_string(oc.kind));
  c.set("lr", format_real(oc.lr));
  if (oc.kind != OptimizerKind::kSgd) c.set("beta1", format_real(oc.beta1));
  if (uses_beta2(oc.kind)) c.set("beta2", format_real(oc.beta2));
  c.set("eps", format_real(oc.eps));
  c.set("weight-decay", format_real(oc.weight_decay));
  c.set("adam-bias-correction", bool_text(oc.adam_bias_correction));
  c.set("dropout", format_real(tc.dropout));
  c.set("hidden-dim", std::to_string(tc.hidden_dim));
  c.set("layers", std::to_string(tc.layers));
  c.set("neighbors", std::to_string(tc.neighbors));
  c.set("batch-size", std::to_string(tc.batch_size));
  c.set("epochs", std::to_string(tc.epochs));
  c.set("seed", std::to_string(tc.seed));
  c.set("runs", std::to_string(runs));
  c.set("sampling-mode", to_string(tc.sampling_mode));
  c.set("sample-scaling", to_string(tc.scaling));
  c.set("cache-init", to_string(tc.cache_init));
  c.set("eval-every", std::to_string(tc.eval_every));
  c.set("output-iterate", to_string(tc.output_iterate));
  c.set("deterministic", bool_text(!tc.record_wall_time));
  if (!metrics_out.empty()) c.set("metrics-out", metrics_out);
  if (!checkpoint_out.empty()) c.set("checkpoint-out", checkpoint_out);
  return c;
}

void ExperimentSpec::validate() const {
  if (runs < 1) throw ConfigError("runs must be >= 1");
  if (dataset_dir.empty() && !sbm) throw ConfigError("no dataset: set dataset-dir or sbm-* keys");
  try {
    train.validate();
    if (sbm) sbm->validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace cvegnn
