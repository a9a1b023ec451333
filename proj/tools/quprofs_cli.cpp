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

// quprofs: command-line front end.
//
//   quprofs search --config run.ini [--seed S] [--out DIR] [--theta-restarts R] [--workers W]
//   quprofs gen-data --kind two_curves --n 300 --d 10 --out data.csv
//   quprofs eval-circuit --circuit circuits.json --dataset two_curves:n=300,d=4
//   quprofs bench-scaling --populations 25,50,100 [--config run.ini]
//
// Exit status: 0 success, 1 configuration/input error, 2 runtime error.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "quprofs/quprofs.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct SearchArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> theta_restarts;
  std::optional<int> workers;
};

int cmd_search(const SearchArgs& a) {
  quprofs::SearchConfig cfg = quprofs::load_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  if (a.out) cfg.output_dir = *a.out;
  if (a.theta_restarts) cfg.theta_restarts = *a.theta_restarts;
  if (a.workers) cfg.workers = *a.workers;
  cfg.validate();
  const quprofs::RunReport report = quprofs::run_search(cfg);
  quprofs::emit_results(report, cfg.output_dir);
  std::cout << "best test accuracy " << report.best_test_accuracy() << "\n";
  for (const auto& f : report.finals) {
    std::cout << "  circuit " << f.circuit.id << " (" << quprofs::to_string(f.circuit.family)
              << "): score " << f.score << ", train " << f.train_accuracy << ", test " << f.test_accuracy
              << "\n";
  }
  std::cout << "results written to " << cfg.output_dir << "\n";
  return 0;
}

struct GenArgs {
  std::string kind;
  quprofs::GeneratorParams params;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_gen_data(const GenArgs& a) {
  quprofs::Rng rng(a.seed);
  const quprofs::Dataset ds = quprofs::generate(quprofs::dataset_kind_from_string(a.kind), a.params, rng);
  quprofs::save_csv(ds, a.out);
  std::cout << "wrote " << ds.size() << " rows x " << ds.dim() << " features to " << a.out << "\n";
  return 0;
}

struct EvalArgs {
  std::string circuit;
  std::string dataset;
  std::string calibration;
  std::uint64_t seed = 0;
  int subsample = 64;
};

int cmd_eval_circuit(const EvalArgs& a) {
  const auto circuits = quprofs::load_circuits(a.circuit);
  quprofs::DatasetSpec spec = quprofs::parse_dataset_spec(a.dataset);
  const quprofs::DeviceModel device =
      a.calibration.empty() ? quprofs::default_device() : quprofs::load_calibration(a.calibration);
  const quprofs::Dataset raw = quprofs::load_dataset(spec, a.seed);
  const quprofs::PreparedData data = quprofs::prepare_data(raw, spec, a.seed);

  quprofs::ProxyConfig pcfg;
  pcfg.subsample = a.subsample;
  quprofs::Rng sub_rng = quprofs::make_rng(a.seed, "subsample", 0);
  const auto idx = quprofs::stratified_subsample(data.train.y, static_cast<std::size_t>(pcfg.subsample), sub_rng);
  const quprofs::Dataset subsample = quprofs::select_rows(data.train, idx);
  const std::uint64_t proxy_seed = quprofs::derive_seed(a.seed, "proxies");

  nlohmann::json out = nlohmann::json::array();
  for (const auto& c : circuits) {
    const quprofs::ProxyVector p =
        quprofs::evaluate_proxies(c, data.train, subsample, data.train_mean, device, pcfg, proxy_seed);
    const quprofs::FinalCircuit f = quprofs::evaluate_qsvm(c, data, quprofs::SvmParams{}, 1, a.seed);
    out.push_back({{"id", c.id},
                   {"family", std::string(quprofs::to_string(c.family))},
                   {"proxy_vector", quprofs::to_json(p)},
                   {"train_accuracy", f.train_accuracy},
                   {"test_accuracy", f.test_accuracy}});
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

struct BenchArgs {
  std::string config;
  std::vector<int> populations{25, 50, 100};
  int repeats = 1;
  std::optional<std::uint64_t> seed;
};

int cmd_bench_scaling(const BenchArgs& a) {
  quprofs::SearchConfig cfg = a.config.empty() ? quprofs::SearchConfig{} : quprofs::load_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  const quprofs::Dataset raw = quprofs::load_dataset(cfg.dataset, cfg.seed);
  const quprofs::ScalingFit fit =
      quprofs::bench_scaling(cfg, raw, quprofs::load_device(cfg), a.populations, a.repeats);
  std::cout << "population,evaluated,t_metrics_s\n";
  for (const auto& p : fit.points) std::cout << p.population << ',' << p.evaluated << ',' << p.t_metrics << "\n";
  std::cout << "slope_s_per_circuit " << fit.slope << "\nintercept_s " << fit.intercept << "\nr_squared "
            << fit.r_squared << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Training-free quantum circuit architecture search"};
  app.require_subcommand(1);

  SearchArgs search;
  auto* s = app.add_subcommand("search", "Run the search and write results");
  s->add_option("--config", search.config, "INI configuration file")->required()->check(CLI::ExistingFile);
  s->add_option("--seed", search.seed, "Run seed (overrides [run] seed)");
  s->add_option("--out", search.out, "Output directory (overrides [run] output_dir)");
  s->add_option("--theta-restarts", search.theta_restarts, "Parameter draws per final circuit");
  s->add_option("--workers", search.workers, "Worker threads");

  GenArgs gen;
  auto* g = app.add_subcommand("gen-data", "Write a synthetic dataset as CSV");
  g->add_option("--kind", gen.kind, "linearly_separable | hyperplane_parity | two_curves | hidden_manifold | bars_and_stripes")
      ->required();
  g->add_option("--n", gen.params.n, "Number of samples");
  g->add_option("--d", gen.params.d, "Feature dimension");
  g->add_option("--margin", gen.params.margin, "Margin (linearly_separable)");
  g->add_option("--hyperplanes", gen.params.hyperplanes, "Hyperplanes (hyperplane_parity)");
  g->add_option("--delta", gen.params.delta, "Curve offset (two_curves)");
  g->add_option("--latent-dim", gen.params.latent_dim, "Latent dimension (hidden_manifold)");
  g->add_option("--seed", gen.seed, "Generator seed");
  g->add_option("--out", gen.out, "Output CSV")->required();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval-circuit", "Proxies and QSVM accuracy for saved circuits");
  e->add_option("--circuit", ev.circuit, "Circuit JSON file")->required()->check(CLI::ExistingFile);
  e->add_option("--dataset", ev.dataset, "kind[:key=value,...] or csv:<path>[:<label column>]")->required();
  e->add_option("--calibration", ev.calibration, "Device calibration JSON")->check(CLI::ExistingFile);
  e->add_option("--seed", ev.seed, "Seed");
  e->add_option("--subsample", ev.subsample, "Rows used for the kernel proxies");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench-scaling", "Time the metric stage against population size");
  b->add_option("--populations", bench.populations, "Comma-separated population sizes")->delimiter(',');
  b->add_option("--config", bench.config, "INI configuration file")->check(CLI::ExistingFile);
  b->add_option("--repeats", bench.repeats, "Timing repeats per size (minimum is kept)");
  b->add_option("--seed", bench.seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*s) return cmd_search(search);
    if (*g) return cmd_gen_data(gen);
    if (*e) return cmd_eval_circuit(ev);
    if (*b) return cmd_bench_scaling(bench);
  } catch (const quprofs::ConfigError& err) {
    std::cerr << "configuration error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
