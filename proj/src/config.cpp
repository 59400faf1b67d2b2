/* Copyright 2026 The dsdlab Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "dsd/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "dsd/metrics.hpp"

namespace dsd {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError(path.empty() ? message : path + ": " + message);
}

std::string join_path(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void require_object(const json& node, const std::string& path) {
  if (!node.is_object()) fail(path, "expected a JSON object");
}

/// Unknown keys are hard errors so sweep/field typos never pass silently.
void check_keys(const json& node, const std::string& path,
                std::initializer_list<const char*> allowed) {
  require_object(node, path);
  for (const auto& item : node.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* k) { return item.key() == k; });
    if (!known) fail(path, "unknown key '" + item.key() + "'");
  }
}

const json* find(const json& node, const std::string& key) {
  const auto it = node.find(key);
  return it == node.end() ? nullptr : &*it;
}

double as_double(const json& node, const std::string& path) {
  if (!node.is_number()) fail(path, "expected a number");
  return node.get<double>();
}

/// Thresholds may be the string "inf" to disable a clause.
double as_threshold(const json& node, const std::string& path) {
  if (node.is_string()) {
    const std::string s = node.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    fail(path, "expected a number or \"inf\", got \"" + s + "\"");
  }
  return as_double(node, path);
}

int as_int(const json& node, const std::string& path) {
  if (!node.is_number_integer()) fail(path, "expected an integer");
  return node.get<int>();
}

std::vector<double> as_double_list(const json& node, const std::string& path) {
  if (!node.is_array() || node.empty()) fail(path, "expected a nonempty array of numbers");
  std::vector<double> out;
  out.reserve(node.size());
  for (std::size_t i = 0; i < node.size(); ++i) {
    out.push_back(as_double(node[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<int> as_int_list(const json& node, const std::string& path) {
  if (!node.is_array()) fail(path, "expected an array of integers");
  std::vector<int> out;
  out.reserve(node.size());
  for (std::size_t i = 0; i < node.size(); ++i) {
    out.push_back(as_int(node[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

Distribution parse_distribution(const json& node, const std::string& path,
                                std::size_t vocab) {
  const std::vector<double> probs = as_double_list(node, path);
  if (probs.size() != vocab) {
    fail(path, "expected " + std::to_string(vocab) + " probabilities, got " +
                   std::to_string(probs.size()));
  }
  try {
    return Distribution(probs);
  } catch (const InvariantError& e) {
    fail(path, e.what());
  }
}

TokenModel parse_model(const json& node, const std::string& path, std::size_t vocab) {
  check_keys(node, path, {"kind", "probs", "matrix", "initial", "temperature"});
  const json* kind_node = find(node, "kind");
  if (kind_node == nullptr) fail(path, "missing 'kind'");
  const std::string kind = kind_node->is_string() ? kind_node->get<std::string>() : "";
  double temperature = 1.0;
  if (const json* t = find(node, "temperature")) {
    temperature = as_double(*t, join_path(path, "temperature"));
  }

  try {
    if (kind == "categorical-iid") {
      const json* probs = find(node, "probs");
      if (probs == nullptr) fail(path, "categorical-iid model needs 'probs'");
      if (find(node, "matrix") || find(node, "initial")) {
        fail(path, "categorical-iid model cannot carry 'matrix'/'initial'");
      }
      return TokenModel::categorical(parse_distribution(*probs, join_path(path, "probs"), vocab),
                                     temperature);
    }
    if (kind == "markov-order-1") {
      const json* matrix = find(node, "matrix");
      const json* initial = find(node, "initial");
      if (matrix == nullptr || initial == nullptr) {
        fail(path, "markov-order-1 model needs 'matrix' and 'initial'");
      }
      if (find(node, "probs")) fail(path, "markov-order-1 model cannot carry 'probs'");
      if (!matrix->is_array() || matrix->size() != vocab) {
        fail(join_path(path, "matrix"),
             "expected " + std::to_string(vocab) + " rows");
      }
      std::vector<Distribution> rows;
      rows.reserve(vocab);
      for (std::size_t i = 0; i < vocab; ++i) {
        rows.push_back(parse_distribution(
            (*matrix)[i], join_path(path, "matrix[" + std::to_string(i) + "]"), vocab));
      }
      return TokenModel::markov(std::move(rows),
                                parse_distribution(*initial, join_path(path, "initial"), vocab),
                                temperature);
    }
  } catch (const InvariantError& e) {
    fail(path, e.what());
  }
  fail(join_path(path, "kind"),
       "expected \"categorical-iid\" or \"markov-order-1\"");
}

Context parse_prompt(const json& node, const std::string& path, int vocab) {
  const std::vector<int> ids = as_int_list(node, path);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= vocab) {
      fail(path + "[" + std::to_string(i) + "]",
           "token id " + std::to_string(ids[i]) + " outside vocabulary of size " +
               std::to_string(vocab));
    }
  }
  return Context(ids);
}

KeyCriteria parse_criteria(const json* node, const std::string& path, int vocab) {
  KeyCriteria c;
  c.top_m = std::min(10, vocab);
  if (node == nullptr) return c;
  check_keys(*node, path, {"ratio_limit", "gap_limit", "overlap_floor", "top_m"});
  if (const json* v = find(*node, "ratio_limit")) {
    c.ratio_limit = as_threshold(*v, join_path(path, "ratio_limit"));
  }
  if (const json* v = find(*node, "gap_limit")) {
    c.gap_limit = as_double(*v, join_path(path, "gap_limit"));
  }
  if (const json* v = find(*node, "overlap_floor")) {
    c.overlap_floor = as_double(*v, join_path(path, "overlap_floor"));
  }
  if (const json* v = find(*node, "top_m")) {
    c.top_m = as_int(*v, join_path(path, "top_m"));
    if (c.top_m > vocab) {
      fail(join_path(path, "top_m"), "must not exceed the vocabulary size " +
                                         std::to_string(vocab));
    }
  }
  try {
    c.validate();
  } catch (const InvariantError& e) {
    fail(path, e.what());
  }
  return c;
}

ClusterConfig parse_cluster(const json* node, const std::string& path) {
  ClusterConfig c{4, 1.0, 5.0};
  if (node != nullptr) {
    check_keys(*node, path, {"n_nodes", "t0_ms", "t1_ms"});
    if (const json* v = find(*node, "n_nodes")) c.n_nodes = as_int(*v, join_path(path, "n_nodes"));
    if (const json* v = find(*node, "t0_ms")) {
      c.compute_step_ms = as_double(*v, join_path(path, "t0_ms"));
    }
    if (const json* v = find(*node, "t1_ms")) {
      c.link_latency_ms = as_double(*v, join_path(path, "t1_ms"));
    }
  }
  try {
    c.validate();
  } catch (const InvariantError& e) {
    fail(path, e.what());
  }
  return c;
}

LatencySampler parse_sampler(const json* node, const std::string& path,
                             const ClusterConfig& cluster, bool* tracks_link) {
  LatencySampler s;
  s.base_ms = cluster.link_latency_ms;
  *tracks_link = true;
  if (node == nullptr) return s;

  check_keys(*node, path, {"kind", "base_ms", "jitter_halfwidth_ms"});
  if (const json* v = find(*node, "kind")) {
    const std::string kind = v->is_string() ? v->get<std::string>() : "";
    if (kind == "deterministic") {
      s.kind = LatencySampler::Kind::Deterministic;
    } else if (kind == "uniform-jitter") {
      s.kind = LatencySampler::Kind::UniformJitter;
    } else {
      fail(join_path(path, "kind"), "expected \"deterministic\" or \"uniform-jitter\"");
    }
  }
  if (const json* v = find(*node, "base_ms")) {
    s.base_ms = as_double(*v, join_path(path, "base_ms"));
    *tracks_link = false;
  }
  if (const json* v = find(*node, "jitter_halfwidth_ms")) {
    s.jitter_halfwidth_ms = as_double(*v, join_path(path, "jitter_halfwidth_ms"));
  }
  try {
    s.validate();
  } catch (const InvariantError& e) {
    fail(path, e.what());
  }
  return s;
}

SweepSpec parse_sweep(const json& node, const std::string& path) {
  check_keys(node, path, {"parameter", "values"});
  const json* parameter = find(node, "parameter");
  const json* values = find(node, "values");
  if (parameter == nullptr || values == nullptr) {
    fail(path, "sweep needs 'parameter' and 'values'");
  }
  SweepSpec sweep;
  const std::string name = parameter->is_string() ? parameter->get<std::string>() : "";
  if (name == "tau") {
    sweep.parameter = SweepSpec::Parameter::Tau;
  } else if (name == "n_nodes") {
    sweep.parameter = SweepSpec::Parameter::NNodes;
  } else if (name == "t1") {
    sweep.parameter = SweepSpec::Parameter::LinkLatency;
  } else if (name == "gamma") {
    sweep.parameter = SweepSpec::Parameter::Gamma;
  } else {
    fail(join_path(path, "parameter"),
         "expected one of \"tau\", \"n_nodes\", \"t1\", \"gamma\"");
  }
  sweep.values = as_double_list(*values, join_path(path, "values"));
  for (std::size_t i = 0; i < sweep.values.size(); ++i) {
    const std::string vpath = join_path(path, "values[" + std::to_string(i) + "]");
    const double v = sweep.values[i];
    switch (sweep.parameter) {
      case SweepSpec::Parameter::Tau:
        if (v < 0.0 || v > 1.0) fail(vpath, "tau values must lie in [0, 1]");
        break;
      case SweepSpec::Parameter::NNodes:
        if (v < 1.0 || v != std::floor(v)) fail(vpath, "n_nodes values must be integers >= 1");
        break;
      case SweepSpec::Parameter::LinkLatency:
        if (v < 0.0) fail(vpath, "t1 values must be >= 0");
        break;
      case SweepSpec::Parameter::Gamma:
        if (v < 1.0 || v != std::floor(v)) fail(vpath, "gamma values must be integers >= 1");
        break;
    }
  }
  return sweep;
}

CalibrationSpec parse_calibration(const json& node, const std::string& path,
                                  int default_gamma) {
  check_keys(node, path, {"budget", "grid", "items", "gamma"});
  CalibrationSpec spec;
  spec.gamma = std::min(default_gamma, static_cast<int>(EnumerationGuard::kMaxGamma));
  if (const json* v = find(node, "budget")) {
    spec.budget = as_double(*v, join_path(path, "budget"));
    if (!(spec.budget > 0.0 && spec.budget < 1.0)) {
      fail(join_path(path, "budget"), "must lie in (0, 1)");
    }
  }
  if (const json* v = find(node, "gamma")) {
    spec.gamma = as_int(*v, join_path(path, "gamma"));
    if (spec.gamma < 1 || spec.gamma > static_cast<int>(EnumerationGuard::kMaxGamma)) {
      fail(join_path(path, "gamma"),
           "must lie in [1, " + std::to_string(EnumerationGuard::kMaxGamma) +
               "] for exact calibration");
    }
  }
  if (const json* v = find(node, "grid")) {
    const std::string gpath = join_path(path, "grid");
    check_keys(*v, gpath, {"ratio_limit", "gap_limit", "overlap_floor"});
    if (const json* axis = find(*v, "ratio_limit")) {
      if (!axis->is_array() || axis->empty()) {
        fail(join_path(gpath, "ratio_limit"), "expected a nonempty array");
      }
      spec.grid.ratio_limits.clear();
      for (std::size_t i = 0; i < axis->size(); ++i) {
        spec.grid.ratio_limits.push_back(
            as_threshold((*axis)[i], join_path(gpath, "ratio_limit[" + std::to_string(i) + "]")));
      }
    }
    if (const json* axis = find(*v, "gap_limit")) {
      spec.grid.gap_limits = as_double_list(*axis, join_path(gpath, "gap_limit"));
    }
    if (const json* axis = find(*v, "overlap_floor")) {
      spec.grid.overlap_floors = as_double_list(*axis, join_path(gpath, "overlap_floor"));
    }
    try {
      spec.grid.validate();
    } catch (const InvariantError& e) {
      fail(gpath, e.what());
    }
  }
  const json* items = find(node, "items");
  if (items == nullptr || !items->is_array() || items->empty()) {
    fail(join_path(path, "items"), "calibration needs a nonempty 'items' array");
  }
  for (std::size_t i = 0; i < items->size(); ++i) {
    const std::string ipath = join_path(path, "items[" + std::to_string(i) + "]");
    const json& item = (*items)[i];
    check_keys(item, ipath, {"vocab_size", "prompt", "draft", "target", "horizon"});
    const json* vocab_node = find(item, "vocab_size");
    if (vocab_node == nullptr) fail(ipath, "missing 'vocab_size'");
    const int vocab = as_int(*vocab_node, join_path(ipath, "vocab_size"));
    if (vocab < 2 || vocab > static_cast<int>(EnumerationGuard::kMaxVocab)) {
      fail(join_path(ipath, "vocab_size"),
           "must lie in [2, " + std::to_string(EnumerationGuard::kMaxVocab) +
               "] for exact calibration");
    }
    const json* draft = find(item, "draft");
    const json* target = find(item, "target");
    if (draft == nullptr || target == nullptr) fail(ipath, "needs 'draft' and 'target'");
    int horizon = 2;
    if (const json* h = find(item, "horizon")) {
      horizon = as_int(*h, join_path(ipath, "horizon"));
      if (horizon < 1 || horizon > static_cast<int>(EnumerationGuard::kMaxHorizon)) {
        fail(join_path(ipath, "horizon"),
             "must lie in [1, " + std::to_string(EnumerationGuard::kMaxHorizon) + "]");
      }
    }
    Context prompt;
    if (const json* p = find(item, "prompt")) {
      prompt = parse_prompt(*p, join_path(ipath, "prompt"), vocab);
    }
    spec.items.push_back(ValidationItem{
        std::move(prompt),
        parse_model(*draft, join_path(ipath, "draft"), static_cast<std::size_t>(vocab)),
        parse_model(*target, join_path(ipath, "target"), static_cast<std::size_t>(vocab)),
        horizon});
  }
  return spec;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    // Convert the byte offset into a line/column pair.
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < json_text.size(); ++i) {
      if (json_text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("parse error at line " + std::to_string(line) + ", column " +
                      std::to_string(col) + ": " + e.what());
  }

  check_keys(root, "", {"vocab_size", "draft", "target", "prompt", "gamma", "tau",
                        "criteria", "cluster", "sampler", "max_new", "seeds", "sweep",
                        "horizon", "calibration"});

  const json* vocab_node = find(root, "vocab_size");
  if (vocab_node == nullptr) fail("vocab_size", "required");
  const int vocab = as_int(*vocab_node, "vocab_size");
  if (vocab < 2) fail("vocab_size", "must be >= 2");

  const json* draft_node = find(root, "draft");
  const json* target_node = find(root, "target");
  if (draft_node == nullptr) fail("draft", "required");
  if (target_node == nullptr) fail("target", "required");

  VerifyParams params;
  params.gamma = 8;
  params.tau = 0.2;
  if (const json* v = find(root, "gamma")) {
    params.gamma = as_int(*v, "gamma");
    if (params.gamma < 1) fail("gamma", "must be >= 1");
  }
  if (const json* v = find(root, "tau")) {
    params.tau = as_double(*v, "tau");
    if (params.tau < 0.0 || params.tau > 1.0) {
      fail("tau", "must lie in [0, 1], got " + format_double(params.tau));
    }
  }
  params.criteria = parse_criteria(find(root, "criteria"), "criteria", vocab);

  const ClusterConfig cluster = parse_cluster(find(root, "cluster"), "cluster");
  bool tracks_link = false;
  const LatencySampler sampler =
      parse_sampler(find(root, "sampler"), "sampler", cluster, &tracks_link);

  int max_new = 64;
  if (const json* v = find(root, "max_new")) {
    max_new = as_int(*v, "max_new");
    if (max_new < 1) fail("max_new", "must be >= 1");
  }

  std::vector<std::uint64_t> seeds = {1, 2, 3};
  if (const json* v = find(root, "seeds")) {
    const std::vector<int> raw = as_int_list(*v, "seeds");
    if (raw.empty()) fail("seeds", "must be nonempty");
    seeds.clear();
    for (int s : raw) {
      if (s < 0) fail("seeds", "seeds must be non-negative");
      seeds.push_back(static_cast<std::uint64_t>(s));
    }
  }

  int horizon = 3;
  if (const json* v = find(root, "horizon")) {
    horizon = as_int(*v, "horizon");
    if (horizon < 1 || horizon > static_cast<int>(EnumerationGuard::kMaxHorizon)) {
      fail("horizon",
           "must lie in [1, " + std::to_string(EnumerationGuard::kMaxHorizon) + "]");
    }
  }

  Context prompt;
  if (const json* v = find(root, "prompt")) {
    prompt = parse_prompt(*v, "prompt", vocab);
  }

  std::optional<SweepSpec> sweep;
  if (const json* v = find(root, "sweep")) {
    sweep = parse_sweep(*v, "sweep");
  }
  std::optional<CalibrationSpec> calibration;
  if (const json* v = find(root, "calibration")) {
    calibration = parse_calibration(*v, "calibration", params.gamma);
  }

  return ExperimentConfig{vocab,
                          parse_model(*draft_node, "draft", static_cast<std::size_t>(vocab)),
                          parse_model(*target_node, "target", static_cast<std::size_t>(vocab)),
                          std::move(prompt),
                          params,
                          cluster,
                          sampler,
                          tracks_link,
                          max_new,
                          std::move(seeds),
                          std::move(sweep),
                          horizon,
                          std::move(calibration)};
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open config file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

ExperimentConfig with_sweep_value(ExperimentConfig config, double value) {
  if (!config.sweep.has_value()) {
    throw ConfigError("config has no sweep block");
  }
  switch (config.sweep->parameter) {
    case SweepSpec::Parameter::Tau:
      config.params.tau = value;
      break;
    case SweepSpec::Parameter::NNodes:
      config.cluster.n_nodes = static_cast<int>(value);
      break;
    case SweepSpec::Parameter::LinkLatency:
      config.cluster.link_latency_ms = value;
      if (config.sampler_tracks_link_latency) config.sampler.base_ms = value;
      break;
    case SweepSpec::Parameter::Gamma:
      config.params.gamma = static_cast<int>(value);
      break;
  }
  return config;
}

const char* sweep_parameter_name(SweepSpec::Parameter p) {
  switch (p) {
    case SweepSpec::Parameter::Tau:
      return "tau";
    case SweepSpec::Parameter::NNodes:
      return "n_nodes";
    case SweepSpec::Parameter::LinkLatency:
      return "t1";
    case SweepSpec::Parameter::Gamma:
      return "gamma";
  }
  return "unknown";
}

}  // namespace dsd
