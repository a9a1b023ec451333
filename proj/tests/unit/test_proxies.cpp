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
#include <vector>

#include <gtest/gtest.h>

#include "quprofs/proxies.hpp"
#include "support/oracles.hpp"

namespace quprofs {
namespace {

using testing::dense_simulate;
using testing::random_circuit;
using testing::random_vector;

Dataset make_data(std::vector<std::vector<double>> rows, std::vector<int> labels) {
  Dataset d;
  d.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  d.y = std::move(labels);
  d.d_original = d.dim();
  return d;
}

TEST(Gram, SingleQubitRotationKernel) {
  // RX(x)|0>: k(x, x') = cos^2((x - x') / 2)
  const Circuit c = make_circuit(1, {Gate::data(GateKind::RX, 0, 0)});
  const Dataset d = make_data({{0.0}, {kPi}, {kPi / 2}}, {1, -1, 1});
  const GramMatrix g = gram_matrix(c, d.X, {});
  EXPECT_NEAR(g.values(0, 1), 0.0, 1e-15);
  EXPECT_NEAR(g.values(0, 2), 0.5, 1e-15);
  EXPECT_NEAR(g.values(1, 2), 0.5, 1e-15);
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(g.values(i, i), 1.0);
}

TEST(Gram, MatchesDenseOracle) {
  Rng rng = make_rng(4, "gram");
  for (int trial = 0; trial < 10; ++trial) {
    const Circuit c = random_circuit(3, 14, 2, 3, rng);
    const auto theta = random_vector(static_cast<std::size_t>(c.theta_count), rng);
    FeatureMatrix X(6, 2);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = uniform_real(rng, -kPi, kPi);
    const GramMatrix g = gram_matrix(c, X, theta);
    for (Eigen::Index i = 0; i < 6; ++i) {
      const auto psi_i = dense_simulate(quprofs::bind(c, {X.row(i).data(), 2}, theta));
      for (Eigen::Index j = 0; j < 6; ++j) {
        const auto psi_j = dense_simulate(quprofs::bind(c, {X.row(j).data(), 2}, theta));
        EXPECT_NEAR(g.values(i, j), std::norm(psi_i.dot(psi_j)), 1e-12);
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(g.values);
    EXPECT_GT(eig.eigenvalues().minCoeff(), -1e-10);
    const Eigen::MatrixXd cross = cross_gram(c, X, X, theta);
    EXPECT_LT((cross - g.values).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Gram, ShotEstimateWithinBinomialError) {
  const Circuit c = make_circuit(2, {Gate::data(GateKind::RY, 0, 0), Gate::cx(0, 1), Gate::data(GateKind::RX, 1, 1)});
  FeatureMatrix X(4, 2);
  X << 0.1, 0.4, 1.2, -0.3, 2.5, 0.9, -1.0, 2.0;
  const auto exact = gram_matrix(c, X, {});
  const std::uint64_t shots = 4000;
  const auto sampled = gram_matrix(c, X, {}, KernelMode::sampled(shots, 9));
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) {
      const double p = exact.values(i, j);
      const double sd = std::sqrt(std::max(p * (1 - p), 1e-4) / shots);
      EXPECT_LT(std::abs(sampled.values(i, j) - p), 5.0 * sd) << i << "," << j;
    }
  }
}

TEST(Kta, HandValues) {
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(2, 2);
  const std::vector<int> same{1, 1}, opposite{1, -1};
  EXPECT_NEAR(kta(ones, same), 1.0, 1e-15);
  EXPECT_NEAR(kta(ones, opposite), 0.0, 1e-15);
  EXPECT_NEAR(kta(Eigen::MatrixXd::Identity(2, 2), opposite), 1.0 / std::sqrt(2.0), 1e-15);
  Eigen::MatrixXd ideal(2, 2);
  ideal << 1, -1, -1, 1;
  EXPECT_NEAR(kta(ideal, opposite), 1.0, 1e-15);
}

TEST(Kta, MatchesFrobeniusDefinition) {
  Rng rng = make_rng(1, "kta");
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(uniform_index(rng, 10));
    Eigen::MatrixXd a = Eigen::MatrixXd::Random(n, n);
    const Eigen::MatrixXd k = a * a.transpose();
    std::vector<int> y(static_cast<std::size_t>(n));
    Eigen::MatrixXd o(n, n);
    for (auto& v : y) v = bernoulli(rng, 0.5) ? 1 : -1;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) o(i, j) = y[static_cast<std::size_t>(i)] * y[static_cast<std::size_t>(j)];
    }
    const double expected = (k.array() * o.array()).sum() / std::sqrt(k.squaredNorm() * o.squaredNorm());
    EXPECT_NEAR(kta(k, y), expected, 1e-12);
  }
}

TEST(Kta, RejectsShapeMismatchAndZeroKernel) {
  const std::vector<int> y{1, -1, 1};
  EXPECT_THROW(kta(Eigen::MatrixXd::Identity(2, 2), y), Error);
  EXPECT_THROW(kta(Eigen::MatrixXd::Zero(3, 3), y), DegenerateError);
}

TEST(Concentration, HandValues) {
  EXPECT_NEAR(concentration(Eigen::MatrixXd::Ones(4, 4)), 0.0, 1e-15);
  EXPECT_NEAR(concentration(Eigen::MatrixXd::Identity(3, 3)), std::sqrt(6.0), 1e-15);
  Eigen::MatrixXd half(2, 2);
  half << 1, 0.5, 0.5, 1;
  EXPECT_NEAR(concentration(half), 0.70711, 5e-6);
}

TEST(Expressivity, HaarBinMassMatchesQuadrature) {
  for (int n : {1, 2, 3, 5}) {
    const double dim = std::ldexp(1.0, n);
    double total = 0.0;
    for (int j = 0; j < 20; ++j) {
      const double lo = j / 20.0, hi = (j + 1) / 20.0;
      // midpoint rule on the Haar density (2^n - 1)(1 - F)^(2^n - 2)
      double integral = 0.0;
      const int steps = 4000;
      for (int s = 0; s < steps; ++s) {
        const double f = lo + (hi - lo) * (s + 0.5) / steps;
        integral += (dim - 1.0) * std::pow(1.0 - f, dim - 2.0) * (hi - lo) / steps;
      }
      EXPECT_NEAR(haar_bin_mass(lo, hi, n), integral, 1e-6) << n << " " << j;
      total += haar_bin_mass(lo, hi, n);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Expressivity, HaarSamplesGiveSmallKl) {
  Rng rng = make_rng(3, "haar");
  ExprConfig cfg;
  cfg.n_bins = 20;
  std::vector<double> f;
  for (int i = 0; i < 20000; ++i) f.push_back(testing::haar_fidelity_sample(3, rng));
  EXPECT_LT(expressivity_kl_from_fidelities(f, 3, cfg), 0.01);
}

TEST(Expressivity, AllOnesClosedForm) {
  // one qubit: the Haar law is uniform, so each bin has mass 1/b
  ExprConfig cfg;
  const int b = cfg.n_bins;
  const double s = cfg.smoothing;
  const double total = 1.0 + (b - 1) * s;
  const double expected = (1.0 / total) * std::log(b / total) + (b - 1) * (s / total) * std::log(b * s / total);
  const std::vector<double> ones(100, 1.0);
  EXPECT_NEAR(expressivity_kl_from_fidelities(ones, 1, cfg), expected, 1e-12);
  EXPECT_NEAR(expected, std::log(75.0), 1e-6);

  Rng rng = make_rng(0, "x");
  const std::vector<double> x{0.3};
  const ExprResult r = expressivity_kl(make_circuit(1, {Gate::data(GateKind::RX, 0, 0)}), x, cfg, rng);
  EXPECT_TRUE(r.degenerate);
  EXPECT_NEAR(r.kl, expected, 1e-12);
}

TEST(Expressivity, SingleRotationIsLessExpressiveThanDeepCircuit) {
  ExprConfig cfg;
  cfg.n_fidelity_samples = 2000;
  Rng rng_a = make_rng(1, "expr"), rng_b = make_rng(2, "expr");
  const std::vector<double> x{0.0};
  const Circuit shallow = make_circuit(2, {Gate::variational(GateKind::RX, 0, 0)});
  std::vector<Gate> gates;
  int t = 0;
  for (int l = 0; l < 6; ++l) {
    for (int q = 0; q < 2; ++q) {
      gates.push_back(Gate::variational(GateKind::RY, q, t++));
      gates.push_back(Gate::variational(GateKind::RZ, q, t++));
    }
    gates.push_back(Gate::cx(0, 1));
  }
  const Circuit deep = make_circuit(2, gates);
  EXPECT_GT(expressivity_kl(shallow, x, cfg, rng_a).kl, expressivity_kl(deep, x, cfg, rng_b).kl);
}

TEST(Fisher, SingleRotationAnalyticValue) {
  // RY(theta)|0>: p(+1) = (1 + cos theta)/2; at theta = pi/2 both labels give |d log p| = 1
  const Circuit c = make_circuit(1, {Gate::variational(GateKind::RY, 0, 0)});
  const Dataset d = make_data({{0.0}, {0.0}}, {1, -1});
  const std::vector<std::size_t> rows{0, 1};
  const std::vector<double> theta{kPi / 2};
  for (auto m : {GradientMethod::Adjoint, GradientMethod::ParameterShift}) {
    const FisherResult f = empirical_fisher_on(c, d, rows, theta, 1e-6, m);
    EXPECT_FALSE(f.degenerate);
    EXPECT_NEAR(f.matrix(0, 0), 1.0, 1e-12);
  }
  // general theta, label +1 only: (sin theta / (1 + cos theta))^2
  const Dataset pos = make_data({{0.0}}, {1});
  const std::vector<std::size_t> one{0};
  for (double th : {0.3, 1.1, 2.0}) {
    const std::vector<double> t{th};
    const double g = std::sin(th) / (1.0 + std::cos(th));
    EXPECT_NEAR(empirical_fisher_on(c, pos, one, t).matrix(0, 0), g * g, 1e-12);
  }
}

TEST(Fisher, ParameterOffTheReadoutQubitGivesZero) {
  const Circuit c = make_circuit(2, {Gate::data(GateKind::RY, 0, 0), Gate::variational(GateKind::RX, 1, 0)});
  const Dataset d = make_data({{kPi / 2}, {kPi / 2}, {1.0}}, {1, -1, 1});
  const std::vector<std::size_t> rows{0, 1, 2};
  const std::vector<double> theta{0.7};
  const FisherResult f = empirical_fisher_on(c, d, rows, theta);
  EXPECT_FALSE(f.degenerate);
  EXPECT_NEAR(f.matrix.norm(), 0.0, 1e-14);
  const std::vector<Eigen::MatrixXd> fishers{f.matrix, f.matrix};
  EXPECT_EQ(led_from_fishers(fishers, 100, 1.0), 0.0);
}

TEST(Fisher, ClippedProbabilitiesAreDegenerate) {
  // RZ does not move |0>, so p(+1) = 1 and every point is clipped
  const Circuit c = make_circuit(1, {Gate::variational(GateKind::RZ, 0, 0)});
  const Dataset d = make_data({{0.0}, {0.0}}, {1, -1});
  const std::vector<std::size_t> rows{0, 1};
  const std::vector<double> theta{0.4};
  EXPECT_TRUE(empirical_fisher_on(c, d, rows, theta).degenerate);
}

TEST(Led, IdentityFisherClosedForm) {
  const std::vector<Eigen::MatrixXd> fbar{Eigen::MatrixXd::Identity(4, 4)};
  EXPECT_NEAR(led_from_normalized(fbar, 100.0), 4.0 * std::log(101.0) / std::log(100.0), 1e-12);
  // raw Fisher 2I normalises to I
  const std::vector<Eigen::MatrixXd> raw{2.0 * Eigen::MatrixXd::Identity(4, 4)};
  const double kappa = 1000.0 / (2.0 * kPi * std::log(1000.0));
  EXPECT_NEAR(led_kappa(1000, 1.0), kappa, 1e-12);
  EXPECT_NEAR(led_from_fishers(raw, 1000, 1.0), 4.0 * std::log1p(kappa) / std::log(kappa), 1e-12);
}

TEST(Led, LogMeanOverSamples) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2), b = Eigen::MatrixXd::Zero(2, 2);
  a(0, 0) = 2.0;
  b(1, 1) = 1.0;
  b(0, 0) = 1.0;
  const std::vector<Eigen::MatrixXd> fbar{a, b};
  const double kappa = 50.0;
  const double expected =
      2.0 * std::log(0.5 * (std::sqrt(1 + 2 * kappa) + std::sqrt((1 + kappa) * (1 + kappa)))) / std::log(kappa);
  EXPECT_NEAR(led_from_normalized(fbar, kappa), expected, 1e-12);
}

TEST(Led, RejectsKappaBelowOne) {
  const std::vector<Eigen::MatrixXd> fbar{Eigen::MatrixXd::Identity(2, 2)};
  EXPECT_THROW(led_from_normalized(fbar, 0.5), ConfigError);
  LedConfig cfg;
  cfg.gamma = 0.01;
  EXPECT_THROW(cfg.validate(100), ConfigError);
}

TEST(Led, SingleSampleEigenvalueBound) {
  Rng rng = make_rng(5, "led");
  LedConfig cfg;
  cfg.n_theta_samples = 1;
  cfg.data_subsample = 20;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 40; ++i) {
    rows.push_back(random_vector(2, rng));
    labels.push_back(i % 2 == 0 ? 1 : -1);
  }
  const Dataset d = make_data(rows, labels);
  for (int trial = 0; trial < 10; ++trial) {
    const Circuit c = random_circuit(3, 12, 2, 4, rng);
    if (c.theta_count == 0) continue;
    const auto theta = random_vector(static_cast<std::size_t>(c.theta_count), rng);
    const LedResult r = local_effective_dimension(c, d, theta, cfg, rng);
    EXPECT_LE(r.lambda_max, c.theta_count + 1e-9);
    EXPECT_GE(r.led, 0.0);
    EXPECT_LE(r.led, c.theta_count * std::log1p(r.kappa * c.theta_count) / std::log(r.kappa) + 1e-9);
  }
}

TEST(EvaluateProxies, ParameterFreeCircuitIsFlaggedDegenerate) {
  const Dataset d = make_data({{0.1, 0.2}, {0.5, -0.3}, {1.0, 0.7}, {-0.4, 0.2}}, {1, -1, 1, -1});
  const Circuit c = make_circuit(2, {Gate::data(GateKind::RY, 0, 0), Gate::cx(0, 1), Gate::data(GateKind::RX, 1, 1)});
  const std::vector<double> mean{0.3, 0.2};
  ProxyConfig cfg;
  cfg.led.n_effective = 100;
  const ProxyVector p = evaluate_proxies(c, d, d, mean, linear_chain_device(2), cfg, 1);
  EXPECT_TRUE(p.expressivity_degenerate);
  EXPECT_TRUE(p.led_degenerate);
  EXPECT_EQ(p.led, 0.0);
  EXPECT_EQ(p.param_count, 0);
  EXPECT_EQ(p.cnot_count, 1);
  EXPECT_NEAR(p.hw_fidelity, hardware_fidelity(c, linear_chain_device(2)), 1e-15);
  const GramMatrix g = gram_matrix(c, d.X, {});
  EXPECT_NEAR(p.kta, kta(g, d.y), 1e-14);
  EXPECT_NEAR(p.concentration, concentration(g), 1e-14);
}

TEST(EvaluateProxies, DeterministicPerSeedAndId) {
  Rng rng = make_rng(8, "ep");
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 30; ++i) {
    rows.push_back(random_vector(3, rng));
    labels.push_back(i % 3 == 0 ? -1 : 1);
  }
  const Dataset d = make_data(rows, labels);
  const std::vector<double> mean{0.0, 0.0, 0.0};
  Circuit c = make_circuit(3, {Gate::variational(GateKind::RY, 0, 0), Gate::data(GateKind::RX, 1, 1), Gate::cx(0, 1),
                               Gate::variational(GateKind::RX, 0, 1), Gate::data(GateKind::RZ, 2, 2), Gate::cx(1, 2)});
  ProxyConfig cfg;
  cfg.expr.n_fidelity_samples = 100;
  cfg.led.n_theta_samples = 5;
  const DeviceModel dev = linear_chain_device(3);
  const ProxyVector a = evaluate_proxies(c, d, d, mean, dev, cfg, 42);
  const ProxyVector b = evaluate_proxies(c, d, d, mean, dev, cfg, 42);
  EXPECT_EQ(a, b);
  c.id = 1;
  EXPECT_NE(evaluate_proxies(c, d, d, mean, dev, cfg, 42).expressivity_kl, a.expressivity_kl);
  EXPECT_FALSE(a.led_degenerate);
  EXPECT_GT(a.led, 0.0);
}

}  // namespace
}  // namespace quprofs
