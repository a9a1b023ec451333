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
 * proxies.hpp
 *
 * Training-free circuit scores:
 *
 *   kta             <K,O>_F / sqrt(<K,K>_F <O,O>_F), O = y y^T
 *   concentration   ||K - 1||_F, distance of the Gram matrix from the all-ones kernel
 *   expressivity    KL(fidelity histogram || Haar fidelity law), Haar density (2^N-1)(1-F)^(2^N-2)
 *   led             local effective dimension from the empirical Fisher matrix
 *   hw_fidelity     product of device survival probabilities (see device.hpp)
 *
 * Kernel proxies use the fidelity kernel k(x, x') = |<phi(x)|phi(x')>|^2 at
 * one uniformly drawn, untrained theta per circuit.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "quprofs/circuit.hpp"
#include "quprofs/common.hpp"
#include "quprofs/datasets.hpp"
#include "quprofs/device.hpp"
#include "quprofs/statevector.hpp"

namespace quprofs {

struct GramMatrix {
  Eigen::MatrixXd values;
  std::vector<std::size_t> sample_ids;

  Eigen::Index n() const { return values.rows(); }
};

/// Kernel evaluation mode. shots == 0 is exact; otherwise each entry is the
/// all-zero frequency of U(x_j)^dagger U(x_i) over `shots` measurements.
struct KernelMode {
  std::uint64_t shots = 0;
  std::uint64_t seed = 0;

  static KernelMode exact() { return {}; }
  static KernelMode sampled(std::uint64_t shots, std::uint64_t seed) { return {shots, seed}; }
};

namespace detail {

inline std::vector<Statevector> feature_states(const Circuit& c, const FeatureMatrix& X, std::span<const double> theta) {
  std::vector<Statevector> states;
  states.reserve(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    try {
      states.push_back(simulate(c, {X.row(i).data(), static_cast<std::size_t>(X.cols())}, theta));
    } catch (const BindError& e) {
      throw BindError("row " + std::to_string(i) + ": " + e.what());
    }
  }
  return states;
}

inline double sampled_overlap(const Circuit& c, std::span<const double> xi, std::span<const double> xj,
                              std::span<const double> theta, std::uint64_t shots, Rng& rng) {
  const BoundCircuit bj = bind(c, xj, theta);
  Statevector psi = simulate(bind(c, xi, theta));
  for (auto it = bj.gates.rbegin(); it != bj.gates.rend(); ++it) psi.apply_inverse(*it);
  const auto counts = sample_shots(psi, shots, rng);
  auto it = counts.find(std::string(static_cast<std::size_t>(c.n_qubits), '0'));
  return it == counts.end() ? 0.0 : static_cast<double>(it->second) / static_cast<double>(shots);
}

}  // namespace detail

/// Symmetric fidelity-kernel Gram matrix over the rows of X. Only the upper
/// triangle is evaluated; the diagonal is 1.
inline GramMatrix gram_matrix(const Circuit& c, const FeatureMatrix& X, std::span<const double> theta,
                              KernelMode mode = KernelMode::exact()) {
  const Eigen::Index n = X.rows();
  GramMatrix g;
  g.values = Eigen::MatrixXd::Identity(n, n);
  g.sample_ids.resize(static_cast<std::size_t>(n));
  std::iota(g.sample_ids.begin(), g.sample_ids.end(), std::size_t{0});
  if (mode.shots == 0) {
    const auto states = detail::feature_states(c, X, theta);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double k = std::min(1.0, std::norm(states[i].inner(states[j])));
        g.values(i, j) = g.values(j, i) = k;
      }
    }
    return g;
  }
  const auto row = [&](Eigen::Index i) { return std::span<const double>(X.row(i).data(), X.cols()); };
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      Rng rng = make_rng(mode.seed, "shots", static_cast<std::uint64_t>(i * n + j));
      try {
        const double k = detail::sampled_overlap(c, row(i), row(j), theta, mode.shots, rng);
        g.values(i, j) = g.values(j, i) = k;
      } catch (const BindError& e) {
        throw BindError("row " + std::to_string(i) + "/" + std::to_string(j) + ": " + e.what());
      }
    }
  }
  return g;
}

/// Rows of A against rows of B (test x train). Exact mode only.
inline Eigen::MatrixXd cross_gram(const Circuit& c, const FeatureMatrix& A, const FeatureMatrix& B,
                                  std::span<const double> theta) {
  const auto sa = detail::feature_states(c, A, theta);
  const auto sb = detail::feature_states(c, B, theta);
  Eigen::MatrixXd k(A.rows(), B.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < B.rows(); ++j) k(i, j) = std::min(1.0, std::norm(sa[i].inner(sb[j])));
  }
  return k;
}

inline double kta(const Eigen::MatrixXd& k, std::span<const int> labels) {
  if (k.rows() != static_cast<Eigen::Index>(labels.size()) || k.cols() != k.rows()) {
    throw Error("kta: Gram matrix is " + std::to_string(k.rows()) + "x" + std::to_string(k.cols()) + " but " +
                std::to_string(labels.size()) + " labels were given");
  }
  const double kk = k.squaredNorm();
  if (!(kk > 0.0)) throw DegenerateError("kta: kernel has zero Frobenius norm");
  Eigen::VectorXd y(k.rows());
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = labels[static_cast<std::size_t>(i)];
  const double ko = y.dot(k * y);  // <K, y y^T>_F
  const double oo = static_cast<double>(k.rows()) * static_cast<double>(k.rows());
  return std::clamp(ko / std::sqrt(kk * oo), -1.0, 1.0);
}

inline double kta(const GramMatrix& g, std::span<const int> labels) { return kta(g.values, labels); }

inline double concentration(const Eigen::MatrixXd& k) { return (k.array() - 1.0).matrix().norm(); }
inline double concentration(const GramMatrix& g) { return concentration(g.values); }

// ---------------------------------------------------------------------------
// Expressivity

struct ExprConfig {
  int n_fidelity_samples = 500;
  int n_bins = 75;
  double smoothing = 1e-12;

  void validate() const {
    if (n_fidelity_samples < 1) throw ConfigError("expressivity: n_fidelity_samples must be >= 1");
    if (n_bins < 2) throw ConfigError("expressivity: n_bins must be >= 2");
    if (!(smoothing >= 0.0)) throw ConfigError("expressivity: smoothing must be >= 0");
  }
};

struct ExprResult {
  double kl = 0.0;
  bool degenerate = false;  // circuit has no variational parameters
};

/// Probability mass of the N-qubit Haar fidelity law on [lo, hi):
/// (1 - lo)^(2^N - 1) - (1 - hi)^(2^N - 1).
inline double haar_bin_mass(double lo, double hi, int n_qubits) {
  const double e = std::ldexp(1.0, n_qubits) - 1.0;
  return std::pow(1.0 - lo, e) - std::pow(1.0 - hi, e);
}

/// KL(histogram of `fidelities` || Haar) over `cfg.n_bins` uniform bins on
/// [0, 1]. Both distributions are floored at cfg.smoothing and renormalised.
inline double expressivity_kl_from_fidelities(std::span<const double> fidelities, int n_qubits,
                                              const ExprConfig& cfg) {
  cfg.validate();
  if (fidelities.empty()) throw DegenerateError("expressivity: no fidelity samples");
  const int b = cfg.n_bins;
  std::vector<double> emp(static_cast<std::size_t>(b), 0.0), haar(static_cast<std::size_t>(b), 0.0);
  for (double f : fidelities) {
    const int bin = std::clamp(static_cast<int>(f * b), 0, b - 1);
    emp[bin] += 1.0;
  }
  for (int j = 0; j < b; ++j) {
    emp[j] /= static_cast<double>(fidelities.size());
    haar[j] = haar_bin_mass(static_cast<double>(j) / b, static_cast<double>(j + 1) / b, n_qubits);
  }
  auto floor_and_normalize = [&](std::vector<double>& p) {
    double total = 0.0;
    for (double& v : p) total += (v = std::max(v, cfg.smoothing));
    for (double& v : p) v /= total;
  };
  floor_and_normalize(emp);
  floor_and_normalize(haar);
  double kl = 0.0;
  for (int j = 0; j < b; ++j) {
    if (emp[j] > 0.0) kl += emp[j] * std::log(emp[j] / haar[j]);
  }
  return std::max(kl, 0.0);
}

/// Samples fidelities between U(x, theta)|0> and U(x, theta')|0> for theta,
/// theta' uniform on [0, 2pi]^d, with x held at `x_fixed`.
inline std::vector<double> sample_pqc_fidelities(const Circuit& c, std::span<const double> x_fixed, int count,
                                                 Rng& rng) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<double> t1(static_cast<std::size_t>(c.theta_count)), t2(t1.size());
  for (int s = 0; s < count; ++s) {
    for (auto& v : t1) v = uniform_real(rng, 0.0, 2.0 * kPi);
    for (auto& v : t2) v = uniform_real(rng, 0.0, 2.0 * kPi);
    out.push_back(std::min(1.0, std::norm(simulate(c, x_fixed, t1).inner(simulate(c, x_fixed, t2)))));
  }
  return out;
}

inline ExprResult expressivity_kl(const Circuit& c, std::span<const double> x_fixed, const ExprConfig& cfg, Rng& rng) {
  cfg.validate();
  if (c.theta_count == 0) {
    const std::vector<double> ones(static_cast<std::size_t>(cfg.n_fidelity_samples), 1.0);
    return {expressivity_kl_from_fidelities(ones, c.n_qubits, cfg), true};
  }
  const auto f = sample_pqc_fidelities(c, x_fixed, cfg.n_fidelity_samples, rng);
  return {expressivity_kl_from_fidelities(f, c.n_qubits, cfg), false};
}

// ---------------------------------------------------------------------------
// Fisher information and local effective dimension

enum class GradientMethod { ParameterShift, Adjoint };

struct LedConfig {
  double epsilon = 0.1;
  int n_theta_samples = 30;
  int data_subsample = 60;
  double gamma = 1.0;
  int n_effective = 0;  // dataset size in kappa; 0 = training-set size
  double p_min = 1e-6;
  GradientMethod gradient = GradientMethod::Adjoint;

  void validate(int n) const {
    if (!(epsilon > 0.0)) throw ConfigError("led.epsilon must be > 0");
    if (n_theta_samples < 1) throw ConfigError("led.n_theta_samples must be >= 1");
    if (data_subsample < 1) throw ConfigError("led.data_subsample must be >= 1");
    if (n < 2) throw ConfigError("led: n_effective must be >= 2");
    const double lower = 2.0 * kPi * std::log(static_cast<double>(n)) / static_cast<double>(n);
    if (!(gamma > lower && gamma <= 1.0)) {
      throw ConfigError("led.gamma must lie in (" + std::to_string(lower) + ", 1] for n = " + std::to_string(n));
    }
    if (!(p_min > 0.0 && p_min < 0.5)) throw ConfigError("led.p_min must be in (0, 0.5)");
  }
};

/// kappa_{n,gamma} = gamma n / (2 pi log n).
inline double led_kappa(int n, double gamma) {
  return gamma * static_cast<double>(n) / (2.0 * kPi * std::log(static_cast<double>(n)));
}

struct FisherResult {
  Eigen::MatrixXd matrix;
  bool degenerate = false;  // every probability was clipped
};

/// Empirical Fisher (1/k) sum_j g_j g_j^T with g_j = d/dtheta log p(y_j | x_j; theta)
/// over the given rows, for the readout model p(y=+1|x) = (1 + <Z_0>)/2
/// clipped to [p_min, 1 - p_min]. Clipped points contribute zero gradient.
inline FisherResult empirical_fisher_on(const Circuit& c, const Dataset& data, std::span<const std::size_t> rows,
                                        std::span<const double> theta, double p_min = 1e-6,
                                        GradientMethod method = GradientMethod::Adjoint) {
  if (c.theta_count < 1) throw ConfigError("empirical_fisher: circuit has no variational parameters");
  const int d = c.theta_count;
  FisherResult out{Eigen::MatrixXd::Zero(d, d), true};
  if (rows.empty()) return out;
  Eigen::VectorXd g(d);
  for (std::size_t r : rows) {
    const auto x = data.row(r);
    double z = 0.0;
    std::vector<double> dz;
    if (method == GradientMethod::Adjoint) {
      dz = adjoint_grad(c, x, theta, 0, &z);
    } else {
      z = expectation_z(simulate(c, x, theta), 0);
      dz = param_shift_grad(c, x, theta, 0);
    }
    const double p = 0.5 * (1.0 + z);
    if (p < p_min || p > 1.0 - p_min) continue;
    out.degenerate = false;
    // d log p / dtheta = (dp/dtheta) / p for y = +1, -(dp/dtheta) / (1 - p) for y = -1
    const double factor = data.y[r] > 0 ? 0.5 / p : -0.5 / (1.0 - p);
    for (int k = 0; k < d; ++k) g[k] = factor * dz[static_cast<std::size_t>(k)];
    out.matrix.noalias() += g * g.transpose();
  }
  out.matrix /= static_cast<double>(rows.size());
  return out;
}

/// Draws min(m_led, n) rows uniformly without replacement and returns the
/// empirical Fisher on them.
inline FisherResult empirical_fisher(const Circuit& c, const Dataset& data, std::span<const double> theta, int m_led,
                                     Rng& rng, double p_min = 1e-6,
                                     GradientMethod method = GradientMethod::Adjoint) {
  if (m_led < 1) throw ConfigError("empirical_fisher: M_led must be >= 1");
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  detail::shuffle(idx, rng);
  idx.resize(std::min(idx.size(), static_cast<std::size_t>(m_led)));
  std::sort(idx.begin(), idx.end());
  return empirical_fisher_on(c, data, idx, theta, p_min, method);
}

/// 2 log(mean_theta sqrt(det(I + kappa Fbar(theta)))) / log kappa, given the
/// already normalised Fisher matrices.
inline double led_from_normalized(std::span<const Eigen::MatrixXd> fbar, double kappa) {
  if (!(kappa > 1.0)) throw ConfigError("led: log(kappa) <= 0; increase n_effective or gamma");
  if (fbar.empty()) throw DegenerateError("led: no parameter samples");
  std::vector<double> half_logdet;
  half_logdet.reserve(fbar.size());
  for (const auto& f : fbar) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(f, Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
      s += std::log1p(kappa * std::max(eig.eigenvalues()[i], 0.0));
    }
    half_logdet.push_back(0.5 * s);
  }
  const double top = *std::max_element(half_logdet.begin(), half_logdet.end());
  double acc = 0.0;
  for (double v : half_logdet) acc += std::exp(v - top);
  const double log_mean = top + std::log(acc / static_cast<double>(half_logdet.size()));
  return 2.0 * log_mean / std::log(kappa);
}

/// Normalises raw Fisher samples to Fbar = d F / mean(tr F) and evaluates the
/// LED. A model whose Fisher trace vanishes everywhere has LED 0.
inline double led_from_fishers(std::span<const Eigen::MatrixXd> fishers, int n, double gamma) {
  if (fishers.empty()) throw DegenerateError("led: no parameter samples");
  const double kappa = led_kappa(n, gamma);
  if (!(kappa > 1.0)) throw ConfigError("led: log(kappa) <= 0; increase n_effective or gamma");
  const auto d = static_cast<double>(fishers.front().rows());
  double mean_trace = 0.0;
  for (const auto& f : fishers) mean_trace += f.trace();
  mean_trace /= static_cast<double>(fishers.size());
  if (!(mean_trace > 0.0)) return 0.0;
  std::vector<Eigen::MatrixXd> fbar;
  fbar.reserve(fishers.size());
  for (const auto& f : fishers) fbar.push_back(d * f / mean_trace);
  return led_from_normalized(fbar, kappa);
}

struct LedResult {
  double led = 0.0;
  double lambda_max = 0.0;  // largest eigenvalue over the normalised Fisher samples
  double kappa = 0.0;
  bool degenerate = false;
};

/// Monte Carlo LED over theta uniform in the infinity-norm ball of radius
/// cfg.epsilon around theta_star. One data subsample is shared by all theta.
inline LedResult local_effective_dimension(const Circuit& c, const Dataset& data, std::span<const double> theta_star,
                                           const LedConfig& cfg, Rng& rng) {
  const int n = cfg.n_effective > 0 ? cfg.n_effective : static_cast<int>(data.size());
  cfg.validate(n);
  if (c.theta_count < 1) throw ConfigError("led: circuit has no variational parameters");
  if (static_cast<int>(theta_star.size()) != c.theta_count) throw BindError("led: theta_star has wrong length");
  LedResult res;
  res.kappa = led_kappa(n, cfg.gamma);
  if (!(res.kappa > 1.0)) throw ConfigError("led: log(kappa) <= 0; increase n_effective or gamma");

  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  detail::shuffle(idx, rng);
  idx.resize(std::min(idx.size(), static_cast<std::size_t>(cfg.data_subsample)));
  std::sort(idx.begin(), idx.end());

  std::vector<Eigen::MatrixXd> fishers;
  std::vector<double> theta(theta_star.begin(), theta_star.end());
  bool all_degenerate = true;
  for (int s = 0; s < cfg.n_theta_samples; ++s) {
    for (std::size_t k = 0; k < theta.size(); ++k) {
      theta[k] = theta_star[k] + uniform_real(rng, -cfg.epsilon, cfg.epsilon);
    }
    auto f = empirical_fisher_on(c, data, idx, theta, cfg.p_min, cfg.gradient);
    all_degenerate = all_degenerate && f.degenerate;
    fishers.push_back(std::move(f.matrix));
  }
  res.degenerate = all_degenerate;
  res.led = led_from_fishers(fishers, n, cfg.gamma);
  double mean_trace = 0.0;
  for (const auto& f : fishers) mean_trace += f.trace();
  mean_trace /= static_cast<double>(fishers.size());
  if (mean_trace > 0.0) {
    for (const auto& f : fishers) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(f, Eigen::EigenvaluesOnly);
      res.lambda_max = std::max(res.lambda_max, eig.eigenvalues().maxCoeff() * f.rows() / mean_trace);
    }
  }
  return res;
}

// ---------------------------------------------------------------------------
// Full proxy vector

struct ProxyVector {
  double kta = 0.0;
  double concentration = 0.0;
  double expressivity_kl = 0.0;
  double led = 0.0;
  double hw_fidelity = 1.0;
  int cnot_count = 0;
  int param_count = 0;
  int depth = 0;
  bool expressivity_degenerate = false;
  bool led_degenerate = false;

  bool operator==(const ProxyVector&) const = default;
};

struct ProxyConfig {
  int subsample = 64;  // M, rows used for the kernel proxies
  LedConfig led;
  ExprConfig expr;
  ReadoutPolicy readout = ReadoutPolicy::AllQubits;
};

/// Untrained variational parameters for a circuit: uniform on [0, 2pi]^d.
inline std::vector<double> draw_theta(int count, Rng& rng) {
  std::vector<double> theta(static_cast<std::size_t>(count));
  for (auto& t : theta) t = uniform_real(rng, 0.0, 2.0 * kPi);
  return theta;
}

/// The parameters at which every proxy of circuit `id` is evaluated.
inline std::vector<double> proxy_theta(const Circuit& c, std::uint64_t seed) {
  Rng rng = make_rng(seed, "theta", c.id);
  return draw_theta(c.theta_count, rng);
}

struct KernelScores {
  double kta = 0.0;
  double concentration = 0.0;
};

/// KTA and concentration on an already selected subsample.
inline KernelScores kernel_scores(const Circuit& c, const Dataset& subsample, std::span<const double> theta) {
  const GramMatrix g = gram_matrix(c, subsample.X, theta);
  return {kta(g, subsample.y), concentration(g)};
}

/// Every proxy for one circuit. `subsample` feeds the kernel proxies,
/// `train` the LED, and `x_mean` fixes the data input of the expressivity
/// estimate. All randomness derives from (seed, circuit id).
inline ProxyVector evaluate_proxies(const Circuit& c, const Dataset& train, const Dataset& subsample,
                                    std::span<const double> x_mean, const DeviceModel& device,
                                    const ProxyConfig& cfg, std::uint64_t seed,
                                    std::optional<KernelScores> cached_kernel = std::nullopt) {
  try {
    ProxyVector p;
    const auto theta = proxy_theta(c, seed);
    const KernelScores ks = cached_kernel ? *cached_kernel : kernel_scores(c, subsample, theta);
    p.kta = ks.kta;
    p.concentration = ks.concentration;

    Rng expr_rng = make_rng(seed, "expr", c.id);
    const ExprResult er = expressivity_kl(c, x_mean, cfg.expr, expr_rng);
    p.expressivity_kl = er.kl;
    p.expressivity_degenerate = er.degenerate;

    if (c.theta_count > 0) {
      Rng led_rng = make_rng(seed, "led", c.id);
      const LedResult lr = local_effective_dimension(c, train, theta, cfg.led, led_rng);
      p.led = lr.led;
      p.led_degenerate = lr.degenerate;
    } else {
      p.led = 0.0;
      p.led_degenerate = true;
    }

    p.hw_fidelity = hardware_fidelity(c, device, cfg.readout);
    const CircuitStats s = stats(c);
    p.cnot_count = s.cnot_count;
    p.param_count = s.param_count;
    p.depth = s.depth;
    return p;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw Error("circuit " + std::to_string(c.id) + ": " + e.what());
  }
}

}  // namespace quprofs
