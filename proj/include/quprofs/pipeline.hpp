// Copyright 2026 The QuProFS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/*
 * pipeline.hpp
 *
 * End-to-end search:
 *
 *   data -> split 80/20 -> standardize -> [PCA] -> sample population
 *   repeat (iterations + 1) times:
 *       KTA on a stratified subsample for every circuit, keep the top fraction
 *       full proxy vector for the survivors
 *       rank, aggregate, take the top K
 *       (except after the last round) evolve the top K into a new population
 *   QSVM train/test accuracy for the final top K
 *
 * Every random draw comes from derive_seed(run seed, stage, task id), so a
 * report does not depend on the worker count.
 */

#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <json.hpp>

#include "quprofs/circuit.hpp"
#include "quprofs/circuit_io.hpp"
#include "quprofs/common.hpp"
#include "quprofs/datasets.hpp"
#include "quprofs/device.hpp"
#include "quprofs/evolve.hpp"
#include "quprofs/parallel.hpp"
#include "quprofs/proxies.hpp"
#include "quprofs/qsvm.hpp"
#include "quprofs/ranking.hpp"
#include "quprofs/search_space.hpp"

namespace quprofs {

// ---------------------------------------------------------------------------
// Configuration

struct DatasetSpec {
  std::string kind = "linearly_separable";  // a generator name or "csv"
  GeneratorParams params;
  std::uint64_t seed = 0;  // generator seed; 0 = derive from the run seed
  std::string csv_path;
  std::string label_column = "label";
  int pca_dim = 0;  // 0 = no PCA
  bool standardize = true;
  double train_fraction = 0.8;
};

/// Parses "kind[:key=value,...]" or "csv:<path>[:<label column>]".
inline DatasetSpec parse_dataset_spec(const std::string& text) {
  DatasetSpec spec;
  const auto colon = text.find(':');
  spec.kind = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? std::string() : text.substr(colon + 1);
  if (spec.kind == "csv") {
    const auto c2 = rest.rfind(':');
    if (c2 != std::string::npos && c2 > 0) {
      spec.csv_path = rest.substr(0, c2);
      spec.label_column = rest.substr(c2 + 1);
    } else {
      spec.csv_path = rest;
    }
    if (spec.csv_path.empty()) throw ConfigError("dataset spec: csv needs a path");
    return spec;
  }
  dataset_kind_from_string(spec.kind);
  std::stringstream ss(rest);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("dataset spec: expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
    try {
      if (key == "n") spec.params.n = std::stoi(value);
      else if (key == "d") spec.params.d = std::stoi(value);
      else if (key == "margin") spec.params.margin = std::stod(value);
      else if (key == "hyperplanes") spec.params.hyperplanes = std::stoi(value);
      else if (key == "delta") spec.params.delta = std::stod(value);
      else if (key == "latent_dim") spec.params.latent_dim = std::stoi(value);
      else if (key == "seed") spec.seed = std::stoull(value);
      else if (key == "pca") spec.pca_dim = std::stoi(value);
      else throw ConfigError("dataset spec: unknown key '" + key + "'");
    } catch (const std::logic_error&) {
      throw ConfigError("dataset spec: bad value for '" + key + "'");
    }
  }
  return spec;
}

struct SearchConfig {
  DatasetSpec dataset;
  std::string device_path;  // empty = bundled 12-qubit linear chain
  ReadoutPolicy readout = ReadoutPolicy::AllQubits;
  SamplerConfig sampler;
  ProxyConfig proxies;
  RankingConfig ranking;
  EvolveConfig evolve;
  double keep_fraction = 0.2;
  int iterations = 2;
  int top_k = 5;
  SvmParams svm;
  int theta_restarts = 1;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string output_dir = "quprofs_out";

  int n_qubits() const { return sampler.n_qubits; }

  void validate() const {
    if (dataset.kind == "csv") {
      if (dataset.csv_path.empty()) throw ConfigError("dataset: kind = csv needs a csv path");
    } else {
      dataset_kind_from_string(dataset.kind);
    }
    sampler.validate();
    evolve.validate();
    proxies.expr.validate();
    ranking.validate();
    if (iterations < 1) throw ConfigError("run.iterations must be >= 1");
    if (top_k < 1) throw ConfigError("ranking.top_k must be >= 1");
    if (evolve.population_size < top_k) throw ConfigError("population_size must be >= top_k");
    if (!(keep_fraction > 0.0 && keep_fraction <= 1.0)) throw ConfigError("ranking.keep_fraction must be in (0,1]");
    const auto survivors =
        static_cast<int>(std::ceil(keep_fraction * static_cast<double>(evolve.population_size) - 1e-9));
    if (survivors < top_k) {
      throw ConfigError("keep_fraction * population_size (" + std::to_string(survivors) + ") must be >= top_k");
    }
    if (survivors < 2) throw ConfigError("at least two circuits must survive the KTA filter to be ranked");
    if (proxies.subsample < 2) throw ConfigError("proxies.subsample must be >= 2");
    if (theta_restarts < 1) throw ConfigError("run.theta_restarts must be >= 1");
    if (workers < 1) throw ConfigError("run.workers must be >= 1");
    if (!(svm.c > 0.0)) throw ConfigError("svm.c must be > 0");
  }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

}  // namespace detail

/// Builds a SearchConfig from an INI document with sections [dataset],
/// [device], [sampler], [proxies], [ranking], [evolve], [run]. Unknown keys
/// are rejected; missing keys keep their defaults.
inline SearchConfig config_from_ptree(const boost::property_tree::ptree& pt) {
  SearchConfig cfg;
  using Setter = std::function<void(const std::string&)>;
  auto as_int = [](const std::string& v, const std::string& key) {
    std::size_t used = 0;
    int out = 0;
    try {
      out = std::stoi(v, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used == 0 || used != v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return out;
  };
  auto as_double = [](const std::string& v, const std::string& key) {
    std::size_t used = 0;
    double out = 0.0;
    try {
      out = std::stod(v, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used == 0 || used != v.size()) throw ConfigError(key + ": expected a number, got '" + v + "'");
    return out;
  };

  std::vector<std::string> best_list, mid_list;
  std::map<std::string, Direction> direction_overrides;
  bool grouping_given = false;
  bool have_weights = false;

  std::map<std::string, std::map<std::string, Setter>> table;
  auto& ds = table["dataset"];
  ds["kind"] = [&](const std::string& v) { cfg.dataset.kind = v; };
  ds["n"] = [&](const std::string& v) { cfg.dataset.params.n = as_int(v, "dataset.n"); };
  ds["d"] = [&](const std::string& v) { cfg.dataset.params.d = as_int(v, "dataset.d"); };
  ds["margin"] = [&](const std::string& v) { cfg.dataset.params.margin = as_double(v, "dataset.margin"); };
  ds["hyperplanes"] = [&](const std::string& v) { cfg.dataset.params.hyperplanes = as_int(v, "dataset.hyperplanes"); };
  ds["delta"] = [&](const std::string& v) { cfg.dataset.params.delta = as_double(v, "dataset.delta"); };
  ds["latent_dim"] = [&](const std::string& v) { cfg.dataset.params.latent_dim = as_int(v, "dataset.latent_dim"); };
  ds["seed"] = [&](const std::string& v) {
    std::size_t used = 0;
    try {
      cfg.dataset.seed = static_cast<std::uint64_t>(std::stoull(v, &used));
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used == 0 || used != v.size()) throw ConfigError("dataset.seed: expected a non-negative integer, got '" + v + "'");
  };
  ds["csv"] = [&](const std::string& v) { cfg.dataset.csv_path = v; };
  ds["label_column"] = [&](const std::string& v) { cfg.dataset.label_column = v; };
  ds["pca"] = [&](const std::string& v) { cfg.dataset.pca_dim = as_int(v, "dataset.pca"); };
  ds["standardize"] = [&](const std::string& v) { cfg.dataset.standardize = detail::parse_bool(v, "dataset.standardize"); };
  ds["train_fraction"] = [&](const std::string& v) {
    cfg.dataset.train_fraction = as_double(v, "dataset.train_fraction");
  };

  auto& dev = table["device"];
  dev["calibration"] = [&](const std::string& v) { cfg.device_path = v; };
  dev["readout"] = [&](const std::string& v) {
    if (v == "all") cfg.readout = ReadoutPolicy::AllQubits;
    else if (v == "active") cfg.readout = ReadoutPolicy::ActiveQubits;
    else throw ConfigError("device.readout: expected 'all' or 'active'");
  };

  auto& sm = table["sampler"];
  sm["n_qubits"] = [&](const std::string& v) { cfg.sampler.n_qubits = as_int(v, "sampler.n_qubits"); };
  sm["layers_min"] = [&](const std::string& v) { cfg.sampler.layers_min = as_int(v, "sampler.layers_min"); };
  sm["layers_max"] = [&](const std::string& v) { cfg.sampler.layers_max = as_int(v, "sampler.layers_max"); };
  sm["family_weights"] = [&](const std::string& v) {
    const auto parts = detail::split_list(v);
    if (parts.size() != 3) throw ConfigError("sampler.family_weights: expected three comma-separated weights");
    for (int i = 0; i < 3; ++i) cfg.sampler.family_weights[i] = as_double(parts[i], "sampler.family_weights");
    have_weights = true;
  };
  sm["data_fraction"] = [&](const std::string& v) { cfg.sampler.data_fraction = as_double(v, "sampler.data_fraction"); };
  sm["feature_assignment"] = [&](const std::string& v) {
    if (v == "round_robin") cfg.sampler.feature_assignment = FeatureAssignment::RoundRobin;
    else if (v == "random") cfg.sampler.feature_assignment = FeatureAssignment::Random;
    else throw ConfigError("sampler.feature_assignment: expected 'round_robin' or 'random'");
  };
  sm["unstructured_min"] = [&](const std::string& v) { cfg.sampler.unstructured_min = as_int(v, "sampler.unstructured_min"); };
  sm["unstructured_max"] = [&](const std::string& v) { cfg.sampler.unstructured_max = as_int(v, "sampler.unstructured_max"); };
  sm["temperature"] = [&](const std::string& v) {
    cfg.sampler.fidelity_bias_temperature = as_double(v, "sampler.temperature");
  };
  sm["data_scale"] = [&](const std::string& v) {
    cfg.sampler.data_scale = as_double(v, "sampler.data_scale");
    cfg.sampler.data_scales.clear();
  };
  sm["data_scales"] = [&](const std::string& v) {
    cfg.sampler.data_scales.clear();
    for (const auto& part : detail::split_list(v)) cfg.sampler.data_scales.push_back(as_double(part, "sampler.data_scales"));
  };

  auto& px = table["proxies"];
  px["subsample"] = [&](const std::string& v) { cfg.proxies.subsample = as_int(v, "proxies.subsample"); };
  px["led_epsilon"] = [&](const std::string& v) { cfg.proxies.led.epsilon = as_double(v, "proxies.led_epsilon"); };
  px["led_theta_samples"] = [&](const std::string& v) {
    cfg.proxies.led.n_theta_samples = as_int(v, "proxies.led_theta_samples");
  };
  px["led_subsample"] = [&](const std::string& v) { cfg.proxies.led.data_subsample = as_int(v, "proxies.led_subsample"); };
  px["led_gamma"] = [&](const std::string& v) { cfg.proxies.led.gamma = as_double(v, "proxies.led_gamma"); };
  px["led_n_effective"] = [&](const std::string& v) { cfg.proxies.led.n_effective = as_int(v, "proxies.led_n_effective"); };
  px["led_gradient"] = [&](const std::string& v) {
    if (v == "adjoint") cfg.proxies.led.gradient = GradientMethod::Adjoint;
    else if (v == "parameter_shift") cfg.proxies.led.gradient = GradientMethod::ParameterShift;
    else throw ConfigError("proxies.led_gradient: expected 'adjoint' or 'parameter_shift'");
  };
  px["expr_samples"] = [&](const std::string& v) {
    cfg.proxies.expr.n_fidelity_samples = as_int(v, "proxies.expr_samples");
  };
  px["expr_bins"] = [&](const std::string& v) { cfg.proxies.expr.n_bins = as_int(v, "proxies.expr_bins"); };
  px["expr_smoothing"] = [&](const std::string& v) { cfg.proxies.expr.smoothing = as_double(v, "proxies.expr_smoothing"); };

  auto& rk = table["ranking"];
  rk["keep_fraction"] = [&](const std::string& v) { cfg.keep_fraction = as_double(v, "ranking.keep_fraction"); };
  rk["top_k"] = [&](const std::string& v) { cfg.top_k = as_int(v, "ranking.top_k"); };
  rk["best"] = [&](const std::string& v) {
    best_list = detail::split_list(v);
    grouping_given = true;
  };
  rk["mid"] = [&](const std::string& v) {
    mid_list = detail::split_list(v);
    grouping_given = true;
  };
  rk["lower_better"] = [&](const std::string& v) {
    for (const auto& name : detail::split_list(v)) direction_overrides[name] = Direction::LowerBetter;
  };

  auto& ev = table["evolve"];
  ev["population_size"] = [&](const std::string& v) {
    cfg.evolve.population_size = as_int(v, "evolve.population_size");
  };
  ev["prune_rate"] = [&](const std::string& v) { cfg.evolve.prune_rate = as_double(v, "evolve.prune_rate"); };
  ev["mutate_fraction"] = [&](const std::string& v) {
    cfg.evolve.mutate_fraction = as_double(v, "evolve.mutate_fraction");
  };
  ev["elitism"] = [&](const std::string& v) { cfg.evolve.elitism = detail::parse_bool(v, "evolve.elitism"); };

  auto& run = table["run"];
  run["iterations"] = [&](const std::string& v) { cfg.iterations = as_int(v, "run.iterations"); };
  run["seed"] = [&](const std::string& v) {
    std::size_t used = 0;
    try {
      cfg.seed = static_cast<std::uint64_t>(std::stoull(v, &used));
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used == 0 || used != v.size()) throw ConfigError("run.seed: expected a non-negative integer, got '" + v + "'");
  };
  run["workers"] = [&](const std::string& v) { cfg.workers = as_int(v, "run.workers"); };
  run["output_dir"] = [&](const std::string& v) { cfg.output_dir = v; };
  run["theta_restarts"] = [&](const std::string& v) { cfg.theta_restarts = as_int(v, "run.theta_restarts"); };
  run["svm_c"] = [&](const std::string& v) { cfg.svm.c = as_double(v, "run.svm_c"); };
  run["svm_tol"] = [&](const std::string& v) { cfg.svm.tol = as_double(v, "run.svm_tol"); };
  run["svm_max_passes"] = [&](const std::string& v) { cfg.svm.max_passes = as_int(v, "run.svm_max_passes"); };

  for (const auto& [section, body] : pt) {
    auto sit = table.find(section);
    if (sit == table.end()) {
      if (body.empty()) throw ConfigError("config: key '" + section + "' outside any section");
      throw ConfigError("config: unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      auto kit = sit->second.find(key);
      if (kit == sit->second.end()) throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
      kit->second(value.get_value<std::string>());
    }
  }

  if (have_weights) cfg.sampler.normalize_weights();
  if (grouping_given) {
    for (const auto& a : best_list) {
      if (std::find(mid_list.begin(), mid_list.end(), a) != mid_list.end()) {
        throw ConfigError("ranking: proxy '" + a + "' is in both best and mid groups");
      }
    }
    cfg.ranking.proxies.clear();
    for (const auto& name : best_list) cfg.ranking.proxies.push_back({name, Direction::HigherBetter, ProxyGroup::Best});
    for (const auto& name : mid_list) cfg.ranking.proxies.push_back({name, Direction::HigherBetter, ProxyGroup::Mid});
  }
  for (auto& spec : cfg.ranking.proxies) {
    ProxyVector probe;
    proxy_value(probe, spec.name);  // rejects unknown names
    if (auto it = direction_overrides.find(spec.name); it != direction_overrides.end()) spec.direction = it->second;
  }
  cfg.proxies.readout = cfg.readout;
  return cfg;
}

inline SearchConfig load_config(const std::string& path) {
  boost::property_tree::ptree pt;
  try {
    boost::property_tree::read_ini(path, pt);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  return config_from_ptree(pt);
}

// ---------------------------------------------------------------------------
// Data preparation

struct PreparedData {
  Dataset train;
  Dataset test;
  std::vector<double> train_mean;
};

inline Dataset load_dataset(const DatasetSpec& spec, std::uint64_t run_seed) {
  if (spec.kind == "csv") return load_csv(spec.csv_path, spec.label_column);
  Rng rng = spec.seed ? Rng(spec.seed) : make_rng(run_seed, "dataset");
  return generate(dataset_kind_from_string(spec.kind), spec.params, rng);
}

/// Split first, then fit standardization and PCA on the training part only.
inline PreparedData prepare_data(const Dataset& raw, const DatasetSpec& spec, std::uint64_t run_seed) {
  raw.validate();
  Rng rng = make_rng(run_seed, "split");
  Split s = split(raw, spec.train_fraction, rng);
  if (spec.standardize) {
    auto st = standardize(s.train, s.test);
    s.train = std::move(st.train);
    s.test = std::move(st.test);
  }
  if (spec.pca_dim > 0) {
    auto p = pca_reduce(s.train, s.test, spec.pca_dim);
    s.train = std::move(p.train);
    s.test = std::move(p.test);
  }
  PreparedData out{std::move(s.train), std::move(s.test), {}};
  const Eigen::VectorXd mean = out.train.X.colwise().mean().transpose();
  out.train_mean.assign(mean.data(), mean.data() + mean.size());
  return out;
}

// ---------------------------------------------------------------------------
// Report

struct CircuitRecord {
  std::uint64_t id = 0;
  Family family = Family::Custom;
  CircuitStats stats;
  double kta = 0.0;
  bool survived = false;
  std::optional<ProxyVector> proxies;  // survivors only
  std::vector<int> ranks;              // survivors only, one per ranking proxy
  std::optional<double> score;         // survivors only
  bool selected = false;               // in this round's top K
};

struct StageTimings {
  double filter = 0.0;
  double proxies = 0.0;
  double rank = 0.0;
  double evolve = 0.0;
  double total = 0.0;
};

struct IterationRecord {
  int iteration = 0;
  std::vector<CircuitRecord> circuits;
  int evaluated = 0;  // circuits that received the full proxy vector
  StageTimings timings;
};

struct FinalCircuit {
  Circuit circuit;
  double score = 0.0;
  ProxyVector proxies;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  int theta_draw = 0;
};

struct RunReport {
  std::vector<std::string> proxy_names;
  std::vector<IterationRecord> iterations;
  std::vector<FinalCircuit> finals;
  int n_train = 0;
  int n_test = 0;
  int n_features = 0;
  double t_qsvm = 0.0;

  double best_test_accuracy() const {
    double best = 0.0;
    for (const auto& f : finals) best = std::max(best, f.test_accuracy);
    return best;
  }
};

namespace detail {

using Clock = std::chrono::steady_clock;
inline double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace detail

/// QSVM accuracy for one circuit at uniformly drawn parameters. With
/// restarts > 1 the draw with the best training accuracy is kept.
inline FinalCircuit evaluate_qsvm(const Circuit& c, const PreparedData& data, const SvmParams& svm, int restarts,
                                  std::uint64_t seed) {
  FinalCircuit best;
  best.circuit = c;
  best.train_accuracy = -1.0;
  for (int r = 0; r < restarts; ++r) {
    Rng rng = make_rng(seed, "final_theta", c.id * 1000003ULL + static_cast<std::uint64_t>(r));
    const auto theta = draw_theta(c.theta_count, rng);
    const GramMatrix k_train = gram_matrix(c, data.train.X, theta);
    const SvmModel model = svm_train(k_train.values, data.train.y, svm);
    const auto train_pred = svm_predict(model, k_train.values);
    const double train_acc = accuracy(train_pred, data.train.y);
    if (train_acc > best.train_accuracy) {
      const Eigen::MatrixXd k_test = cross_gram(c, data.test.X, data.train.X, theta);
      best.train_accuracy = train_acc;
      best.test_accuracy = accuracy(svm_predict(model, k_test), data.test.y);
      best.theta_draw = r;
    }
  }
  return best;
}

/// One ranking round over `population`: KTA filter, proxies for the
/// survivors, aggregation. Returns the record and the top-K positions.
inline IterationRecord rank_population(const std::vector<Circuit>& population, const PreparedData& data,
                                       const DeviceModel& device, const SearchConfig& cfg, int iteration,
                                       std::vector<std::size_t>& top_positions) {
  IterationRecord rec;
  rec.iteration = iteration;
  const std::uint64_t proxy_seed = derive_seed(cfg.seed, "proxies");

  auto t0 = detail::Clock::now();
  Rng sub_rng = make_rng(cfg.seed, "subsample", static_cast<std::uint64_t>(iteration));
  const auto sub_idx = stratified_subsample(data.train.y, static_cast<std::size_t>(cfg.proxies.subsample), sub_rng);
  const Dataset subsample = select_rows(data.train, sub_idx);

  std::vector<KernelScores> kernel(population.size());
  parallel_for(population.size(), cfg.workers, [&](std::size_t i) {
    const Circuit& c = population[i];
    try {
      kernel[i] = kernel_scores(c, subsample, proxy_theta(c, proxy_seed));
    } catch (const Error& e) {
      throw Error("stage filter, circuit " + std::to_string(c.id) + ": " + e.what());
    }
  });
  std::vector<std::uint64_t> ids;
  std::vector<double> ktas;
  for (std::size_t i = 0; i < population.size(); ++i) {
    ids.push_back(population[i].id);
    ktas.push_back(kernel[i].kta);
  }
  const auto survivors = kta_filter(ids, ktas, cfg.keep_fraction);
  rec.timings.filter = detail::seconds_since(t0);

  t0 = detail::Clock::now();
  std::vector<ProxyVector> proxies(survivors.size());
  parallel_for(survivors.size(), cfg.workers, [&](std::size_t s) {
    const Circuit& c = population[survivors[s]];
    try {
      proxies[s] = evaluate_proxies(c, data.train, subsample, data.train_mean, device, cfg.proxies, proxy_seed,
                                    kernel[survivors[s]]);
    } catch (const Error& e) {
      throw Error("stage proxies, circuit " + std::to_string(c.id) + ": " + e.what());
    }
  });
  rec.evaluated = static_cast<int>(survivors.size());
  rec.timings.proxies = detail::seconds_since(t0);

  t0 = detail::Clock::now();
  const RankTable table = build_rank_table(proxies, cfg.ranking);
  const auto scores = aggregate(table);
  const auto top = top_k(scores, static_cast<std::size_t>(cfg.top_k));
  rec.timings.rank = detail::seconds_since(t0);

  rec.circuits.resize(population.size());
  for (std::size_t i = 0; i < population.size(); ++i) {
    auto& cr = rec.circuits[i];
    cr.id = population[i].id;
    cr.family = population[i].family;
    cr.stats = stats(population[i]);
    cr.kta = kernel[i].kta;
  }
  for (std::size_t s = 0; s < survivors.size(); ++s) {
    auto& cr = rec.circuits[survivors[s]];
    cr.survived = true;
    cr.proxies = proxies[s];
    cr.score = scores[s];
    for (const auto& r : table.ranks) cr.ranks.push_back(r[s]);
  }
  top_positions.clear();
  for (std::size_t t : top) {
    rec.circuits[survivors[t]].selected = true;
    top_positions.push_back(survivors[t]);
  }
  return rec;
}

inline RunReport run_search(const SearchConfig& cfg, const Dataset& raw, const DeviceModel& device) {
  cfg.validate();
  RunReport report;
  for (const auto& p : cfg.ranking.proxies) report.proxy_names.push_back(p.name);

  const PreparedData data = prepare_data(raw, cfg.dataset, cfg.seed);
  report.n_train = static_cast<int>(data.train.size());
  report.n_test = static_cast<int>(data.test.size());
  report.n_features = data.train.dim();

  SamplerConfig sampler = cfg.sampler;
  sampler.n_features = data.train.dim();
  std::vector<Circuit> population =
      sample_population(device, sampler, cfg.evolve.population_size, derive_seed(cfg.seed, "population"));
  std::uint64_t next_id = static_cast<std::uint64_t>(cfg.evolve.population_size);

  std::vector<std::size_t> top;
  for (int it = 0; it <= cfg.iterations; ++it) {
    const auto t_iter = detail::Clock::now();
    IterationRecord rec = rank_population(population, data, device, cfg, it, top);
    if (it < cfg.iterations) {
      const auto t0 = detail::Clock::now();
      std::vector<Circuit> parents;
      for (std::size_t p : top) parents.push_back(population[p]);
      population = evolve_population(parents, device, sampler, cfg.evolve,
                                     derive_seed(cfg.seed, "evolve", static_cast<std::uint64_t>(it)), next_id);
      next_id += static_cast<std::uint64_t>(population.size());
      rec.timings.evolve = detail::seconds_since(t0);
    }
    rec.timings.total = detail::seconds_since(t_iter);
    report.iterations.push_back(std::move(rec));
  }

  const auto t0 = detail::Clock::now();
  const auto& last = report.iterations.back();
  report.finals.resize(top.size());
  parallel_for(top.size(), cfg.workers, [&](std::size_t f) {
    const Circuit& c = population[top[f]];
    try {
      FinalCircuit fc = evaluate_qsvm(c, data, cfg.svm, cfg.theta_restarts, cfg.seed);
      fc.score = *last.circuits[top[f]].score;
      fc.proxies = *last.circuits[top[f]].proxies;
      report.finals[f] = std::move(fc);
    } catch (const Error& e) {
      throw Error("stage qsvm, circuit " + std::to_string(c.id) + ": " + e.what());
    }
  });
  report.t_qsvm = detail::seconds_since(t0);
  return report;
}

inline DeviceModel load_device(const SearchConfig& cfg) {
  return cfg.device_path.empty() ? default_device() : load_calibration(cfg.device_path);
}

inline RunReport run_search(const SearchConfig& cfg) {
  return run_search(cfg, load_dataset(cfg.dataset, cfg.seed), load_device(cfg));
}

// ---------------------------------------------------------------------------
// Output

inline nlohmann::json to_json(const ProxyVector& p) {
  return {{"kta", p.kta},
          {"concentration", p.concentration},
          {"expressivity_kl", p.expressivity_kl},
          {"expressivity_degenerate", p.expressivity_degenerate},
          {"led", p.led},
          {"led_degenerate", p.led_degenerate},
          {"hw_fidelity", p.hw_fidelity},
          {"cnot_count", p.cnot_count},
          {"param_count", p.param_count},
          {"depth", p.depth}};
}

inline nlohmann::json report_to_json(const RunReport& r, bool include_timings = true) {
  nlohmann::json j;
  j["proxies"] = r.proxy_names;
  j["n_train"] = r.n_train;
  j["n_test"] = r.n_test;
  j["n_features"] = r.n_features;
  nlohmann::json its = nlohmann::json::array();
  for (const auto& it : r.iterations) {
    nlohmann::json ji;
    ji["iteration"] = it.iteration;
    ji["population"] = it.circuits.size();
    ji["evaluated"] = it.evaluated;
    nlohmann::json circuits = nlohmann::json::array();
    for (const auto& c : it.circuits) {
      nlohmann::json jc{{"id", c.id},
                        {"family", std::string(to_string(c.family))},
                        {"kta", c.kta},
                        {"survived", c.survived},
                        {"selected", c.selected},
                        {"depth", c.stats.depth},
                        {"gate_count", c.stats.gate_count}};
      if (c.proxies) jc["proxy_vector"] = to_json(*c.proxies);
      if (c.score) {
        jc["score"] = *c.score;
        jc["ranks"] = c.ranks;
      }
      circuits.push_back(std::move(jc));
    }
    ji["circuits"] = std::move(circuits);
    if (include_timings) {
      ji["timings"] = {{"filter", it.timings.filter}, {"proxies", it.timings.proxies}, {"rank", it.timings.rank},
                       {"evolve", it.timings.evolve}, {"total", it.timings.total}};
    }
    its.push_back(std::move(ji));
  }
  j["iterations"] = std::move(its);
  nlohmann::json finals = nlohmann::json::array();
  for (const auto& f : r.finals) {
    finals.push_back({{"id", f.circuit.id},
                      {"family", std::string(to_string(f.circuit.family))},
                      {"score", f.score},
                      {"train_accuracy", f.train_accuracy},
                      {"test_accuracy", f.test_accuracy},
                      {"theta_draw", f.theta_draw},
                      {"proxy_vector", to_json(f.proxies)}});
  }
  j["final"] = std::move(finals);
  j["best_test_accuracy"] = r.best_test_accuracy();
  if (include_timings) j["timings"] = {{"qsvm", r.t_qsvm}};
  return j;
}

/// Writes summary.json, proxies.csv (one row per circuit per round),
/// final_circuits.json and metrics_long.csv (iteration,id,metric,value).
inline void emit_results(const RunReport& r, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error("cannot create output directory " + out_dir + ": " + ec.message());
  const fs::path dir(out_dir);

  {
    std::ofstream out(dir / "summary.json");
    if (!out) throw Error("cannot write summary.json in " + out_dir);
    out << report_to_json(r).dump(2) << '\n';
  }
  {
    std::ofstream out(dir / "proxies.csv");
    if (!out) throw Error("cannot write proxies.csv in " + out_dir);
    out.precision(17);
    out << "iteration,id,family,survived,selected,kta,concentration,expressivity_kl,led,hw_fidelity,cnot_count,"
           "param_count,depth";
    for (const auto& name : r.proxy_names) out << ",rank_" << name;
    out << ",score\n";
    for (const auto& it : r.iterations) {
      for (const auto& c : it.circuits) {
        out << it.iteration << ',' << c.id << ',' << to_string(c.family) << ',' << c.survived << ',' << c.selected
            << ',' << c.kta << ',';
        if (c.proxies) {
          out << c.proxies->concentration << ',' << c.proxies->expressivity_kl << ',' << c.proxies->led << ','
              << c.proxies->hw_fidelity << ',';
        } else {
          out << ",,,,";
        }
        out << c.stats.cnot_count << ',' << c.stats.param_count << ',' << c.stats.depth;
        for (std::size_t k = 0; k < r.proxy_names.size(); ++k) {
          out << ',';
          if (k < c.ranks.size()) out << c.ranks[k];
        }
        out << ',';
        if (c.score) out << *c.score;
        out << '\n';
      }
    }
  }
  {
    std::vector<Circuit> circuits;
    for (const auto& f : r.finals) circuits.push_back(f.circuit);
    save_circuits((dir / "final_circuits.json").string(), circuits);
  }
  {
    std::ofstream out(dir / "metrics_long.csv");
    if (!out) throw Error("cannot write metrics_long.csv in " + out_dir);
    out.precision(17);
    out << "iteration,id,metric,value\n";
    for (const auto& it : r.iterations) {
      for (const auto& c : it.circuits) {
        out << it.iteration << ',' << c.id << ",kta," << c.kta << '\n';
        out << it.iteration << ',' << c.id << ",gate_count," << c.stats.gate_count << '\n';
        out << it.iteration << ',' << c.id << ",depth," << c.stats.depth << '\n';
        if (c.proxies) {
          out << it.iteration << ',' << c.id << ",concentration," << c.proxies->concentration << '\n';
          out << it.iteration << ',' << c.id << ",expressivity_kl," << c.proxies->expressivity_kl << '\n';
          out << it.iteration << ',' << c.id << ",led," << c.proxies->led << '\n';
          out << it.iteration << ',' << c.id << ",hw_fidelity," << c.proxies->hw_fidelity << '\n';
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Scaling benchmark

struct ScalingPoint {
  int population = 0;
  double t_metrics = 0.0;  // filter + proxies, seconds (minimum over repeats)
  int evaluated = 0;
};

struct ScalingFit {
  std::vector<ScalingPoint> points;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

inline ScalingFit fit_linear(std::vector<ScalingPoint> points) {
  ScalingFit fit;
  fit.points = std::move(points);
  const auto n = static_cast<double>(fit.points.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : fit.points) {
    sx += p.population;
    sy += p.t_metrics;
    sxx += double(p.population) * p.population;
    sxy += p.population * p.t_metrics;
  }
  const double denom = n * sxx - sx * sx;
  if (n < 2 || denom == 0.0) return fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double ss_res = 0, ss_tot = 0;
  const double mean = sy / n;
  for (const auto& p : fit.points) {
    const double pred = fit.intercept + fit.slope * p.population;
    ss_res += (p.t_metrics - pred) * (p.t_metrics - pred);
    ss_tot += (p.t_metrics - mean) * (p.t_metrics - mean);
  }
  fit.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

/// Times one metric round (KTA filter + survivor proxies) per population
/// size and fits t_metrics = a + b * population.
inline ScalingFit bench_scaling(const SearchConfig& base, const Dataset& raw, const DeviceModel& device,
                                const std::vector<int>& populations, int repeats = 1) {
  const PreparedData data = prepare_data(raw, base.dataset, base.seed);
  std::vector<ScalingPoint> points;
  for (int pop : populations) {
    SearchConfig cfg = base;
    cfg.evolve.population_size = pop;
    cfg.top_k = std::min(cfg.top_k, std::max(1, static_cast<int>(std::ceil(cfg.keep_fraction * pop - 1e-9))));
    cfg.validate();
    SamplerConfig sampler = cfg.sampler;
    sampler.n_features = data.train.dim();
    const auto population = sample_population(device, sampler, pop, derive_seed(cfg.seed, "population"));
    ScalingPoint pt;
    pt.population = pop;
    pt.t_metrics = std::numeric_limits<double>::infinity();
    for (int r = 0; r < std::max(1, repeats); ++r) {
      std::vector<std::size_t> top;
      const auto rec = rank_population(population, data, device, cfg, 0, top);
      pt.t_metrics = std::min(pt.t_metrics, rec.timings.filter + rec.timings.proxies);
      pt.evaluated = rec.evaluated;
    }
    points.push_back(pt);
  }
  return fit_linear(std::move(points));
}

}  // namespace quprofs
