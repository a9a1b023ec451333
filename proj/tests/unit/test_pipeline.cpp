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

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <boost/property_tree/ini_parser.hpp>
#include <gtest/gtest.h>

#include "quprofs/pipeline.hpp"

namespace quprofs {
namespace {

namespace fs = std::filesystem;

constexpr const char* kSmallConfig = R"(
[dataset]
kind = two_curves
n = 60
d = 3

[sampler]
n_qubits = 3
layers_max = 2

[proxies]
subsample = 16
led_theta_samples = 3
led_subsample = 16
expr_samples = 50

[ranking]
keep_fraction = 0.3
top_k = 2

[evolve]
population_size = 10

[run]
iterations = 1
seed = 5
)";

SearchConfig parse(const std::string& text) {
  std::istringstream in(text);
  boost::property_tree::ptree pt;
  boost::property_tree::read_ini(in, pt);
  return config_from_ptree(pt);
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

TEST(Config, ParsesSectionsAndDefaults) {
  const SearchConfig cfg = parse(kSmallConfig);
  EXPECT_EQ(cfg.dataset.kind, "two_curves");
  EXPECT_EQ(cfg.dataset.params.n, 60);
  EXPECT_EQ(cfg.sampler.n_qubits, 3);
  EXPECT_EQ(cfg.proxies.subsample, 16);
  EXPECT_DOUBLE_EQ(cfg.keep_fraction, 0.3);
  EXPECT_EQ(cfg.top_k, 2);
  EXPECT_EQ(cfg.evolve.population_size, 10);
  EXPECT_EQ(cfg.iterations, 1);
  EXPECT_EQ(cfg.seed, 5u);
  EXPECT_EQ(cfg.workers, 1);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, BandwidthKeys) {
  SearchConfig cfg = parse("[sampler]\ndata_scales = 0.5, 2\n");
  EXPECT_EQ(cfg.sampler.data_scales, (std::vector<double>{0.5, 2.0}));
  cfg = parse("[sampler]\ndata_scale = 0.7\n");
  EXPECT_TRUE(cfg.sampler.data_scales.empty());
  EXPECT_DOUBLE_EQ(cfg.sampler.data_scale, 0.7);
}

TEST(Config, RejectsUnknownOrInvalidEntries) {
  const char* bad[] = {
      "[nonsense]\nx = 1\n",
      "[run]\nspeed = 3\n",
      "[run]\niterations = two\n",
      "[ranking]\nbest = concentration\nmid = concentration\n",
      "[ranking]\nbest = magic\n",
      "[sampler]\nfamily_weights = 1, -1, 0\n",
      "[dataset]\nkind = iris\n",
      "[device]\nreadout = some\n",
      "[dataset]\nseed = abc\n",
  };
  for (const char* text : bad) {
    EXPECT_THROW(
        {
          const SearchConfig cfg = parse(text);
          cfg.validate();
        },
        ConfigError)
        << text;
  }
  EXPECT_THROW(load_config("/nonexistent/config.ini"), ConfigError);
}

TEST(Config, TopKCannotExceedSurvivors) {
  SearchConfig cfg = parse(kSmallConfig);
  cfg.top_k = 4;  // ceil(0.3 * 10) = 3 survivors
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(DatasetSpec, ParsesGeneratorAndCsvForms) {
  const DatasetSpec g = parse_dataset_spec("hidden_manifold:n=40,d=5,latent_dim=3,seed=9,pca=2");
  EXPECT_EQ(g.kind, "hidden_manifold");
  EXPECT_EQ(g.params.n, 40);
  EXPECT_EQ(g.params.d, 5);
  EXPECT_EQ(g.params.latent_dim, 3);
  EXPECT_EQ(g.seed, 9u);
  EXPECT_EQ(g.pca_dim, 2);
  const DatasetSpec c = parse_dataset_spec("csv:/tmp/x.csv:target");
  EXPECT_EQ(c.csv_path, "/tmp/x.csv");
  EXPECT_EQ(c.label_column, "target");
  EXPECT_THROW(parse_dataset_spec("two_curves:n"), ConfigError);
  EXPECT_THROW(parse_dataset_spec("two_curves:q=1"), ConfigError);
  EXPECT_THROW(parse_dataset_spec("csv:"), ConfigError);
}

TEST(PrepareData, SplitStandardizeAndPca) {
  DatasetSpec spec = parse_dataset_spec("hidden_manifold:n=50,d=6,pca=3");
  const Dataset raw = load_dataset(spec, 1);
  const PreparedData p = prepare_data(raw, spec, 1);
  EXPECT_EQ(p.train.size(), 40u);
  EXPECT_EQ(p.test.size(), 10u);
  EXPECT_EQ(p.train.dim(), 3);
  EXPECT_EQ(p.train_mean.size(), 3u);
  for (double m : p.train_mean) EXPECT_NEAR(m, 0.0, 1e-12);
}

class SmallSearch : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    cfg_ = new SearchConfig(parse(kSmallConfig));
    report_ = new RunReport(run_search(*cfg_));
  }
  static void TearDownTestSuite() {
    delete report_;
    delete cfg_;
  }
  static SearchConfig* cfg_;
  static RunReport* report_;
};
SearchConfig* SmallSearch::cfg_ = nullptr;
RunReport* SmallSearch::report_ = nullptr;

TEST_F(SmallSearch, BudgetAccounting) {
  ASSERT_EQ(report_->iterations.size(), 2u);
  for (const auto& it : report_->iterations) {
    EXPECT_EQ(it.circuits.size(), 10u);
    EXPECT_EQ(it.evaluated, 3);
    int survived = 0, selected = 0;
    double min_survivor_kta = 2.0, max_other_kta = -2.0;
    for (const auto& c : it.circuits) {
      survived += c.survived ? 1 : 0;
      selected += c.selected ? 1 : 0;
      EXPECT_EQ(c.proxies.has_value(), c.survived);
      EXPECT_TRUE(!c.selected || c.survived);
      if (c.survived) min_survivor_kta = std::min(min_survivor_kta, c.kta);
      else max_other_kta = std::max(max_other_kta, c.kta);
    }
    EXPECT_EQ(survived, 3);
    EXPECT_EQ(selected, 2);
    EXPECT_GE(min_survivor_kta, max_other_kta);
  }
  EXPECT_EQ(report_->finals.size(), 2u);
  EXPECT_EQ(report_->n_train + report_->n_test, 60);
}

TEST_F(SmallSearch, ParentsSurviveIntoNextRound) {
  std::set<std::uint64_t> selected, next;
  for (const auto& c : report_->iterations[0].circuits) {
    if (c.selected) selected.insert(c.id);
  }
  for (const auto& c : report_->iterations[1].circuits) next.insert(c.id);
  for (std::uint64_t id : selected) EXPECT_TRUE(next.count(id)) << id;
}

TEST_F(SmallSearch, FinalAccuraciesAreValid) {
  for (const auto& f : report_->finals) {
    EXPECT_GE(f.test_accuracy, 0.0);
    EXPECT_LE(f.test_accuracy, 1.0);
    EXPECT_GE(f.train_accuracy, 0.0);
    EXPECT_LE(f.train_accuracy, 1.0);
  }
  EXPECT_GE(report_->best_test_accuracy(), report_->finals.front().test_accuracy);
}

TEST_F(SmallSearch, DeterministicAcrossWorkerCounts) {
  SearchConfig two = *cfg_;
  two.workers = 2;
  EXPECT_EQ(report_to_json(run_search(two), false), report_to_json(*report_, false));
}

TEST_F(SmallSearch, EmitsResultFiles) {
  const fs::path dir = fs::temp_directory_path() / "quprofs_emit_test";
  fs::remove_all(dir);
  emit_results(*report_, dir.string());
  for (const char* f : {"summary.json", "proxies.csv", "final_circuits.json", "metrics_long.csv"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  EXPECT_EQ(count_lines(dir / "proxies.csv"), 1u + 2u * 10u);
  // 3 rows per circuit plus 4 more per survivor
  EXPECT_EQ(count_lines(dir / "metrics_long.csv"), 1u + 2u * (10u * 3u + 3u * 4u));
  const auto circuits = load_circuits((dir / "final_circuits.json").string());
  ASSERT_EQ(circuits.size(), report_->finals.size());
  for (std::size_t i = 0; i < circuits.size(); ++i) EXPECT_EQ(circuits[i], report_->finals[i].circuit);
  std::ifstream in(dir / "summary.json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_TRUE(j.contains("iterations"));
  EXPECT_EQ(j.at("final").size(), report_->finals.size());
}

TEST(Scaling, LinearFitOnExactLine) {
  std::vector<ScalingPoint> pts{{10, 1.5, 2}, {20, 2.5, 4}, {40, 4.5, 8}};
  const ScalingFit fit = fit_linear(pts);
  EXPECT_NEAR(fit.slope, 0.1, 1e-12);
  EXPECT_NEAR(fit.intercept, 0.5, 1e-12);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
}

#ifdef QUPROFS_CLI
int run_cli(const std::string& args) {
  const int status = std::system((std::string(QUPROFS_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run_cli("search --config /nonexistent.ini"), 1);
  EXPECT_EQ(run_cli("frobnicate"), 1);
  const fs::path bad = fs::temp_directory_path() / "quprofs_bad.ini";
  std::ofstream(bad) << "[run]\niterations = -1\n";
  EXPECT_EQ(run_cli("search --config " + bad.string()), 1);
  const fs::path circuit = fs::temp_directory_path() / "quprofs_bad_circuit.json";
  std::ofstream(circuit) << R"([{"n_qubits": 2, "gates": [{"kind": "cx", "qubits": [0, 0]}]}])";
  EXPECT_NE(run_cli("eval-circuit --circuit " + circuit.string() + " --dataset two_curves:n=20,d=2"), 0);
}

TEST(Cli, GenDataBarsAndStripes) {
  const fs::path out = fs::temp_directory_path() / "quprofs_bas.csv";
  fs::remove(out);
  ASSERT_EQ(run_cli("gen-data --kind bars_and_stripes --n 30 --seed 3 --out " + out.string()), 0);
  const Dataset d = load_csv(out.string(), "label");
  EXPECT_EQ(d.size(), 30u);
  EXPECT_EQ(d.dim(), 16);
  std::set<std::vector<double>> rows;
  for (std::size_t i = 0; i < d.size(); ++i) rows.insert({d.row(i).begin(), d.row(i).end()});
  EXPECT_EQ(rows.size(), 30u);
}

TEST(Cli, SearchWritesOutputs) {
  const fs::path cfg = fs::temp_directory_path() / "quprofs_cli_small.ini";
  std::ofstream(cfg) << kSmallConfig;
  const fs::path out = fs::temp_directory_path() / "quprofs_cli_out";
  fs::remove_all(out);
  ASSERT_EQ(run_cli("search --config " + cfg.string() + " --out " + out.string()), 0);
  EXPECT_TRUE(fs::exists(out / "summary.json"));
  const fs::path circuits = out / "final_circuits.json";
  EXPECT_EQ(run_cli("eval-circuit --circuit " + circuits.string() + " --dataset two_curves:n=40,d=3 --subsample 8"), 0);
}
#endif

}  // namespace
}  // namespace quprofs
