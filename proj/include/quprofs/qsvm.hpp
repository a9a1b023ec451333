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
 * qsvm.hpp
 *
 * Soft-margin C-SVM on a precomputed kernel. The dual
 *
 *   min_a  1/2 a^T Q a - e^T a,   Q_ij = y_i y_j K_ij,
 *   s.t.   0 <= a_i <= C,  y^T a = 0
 *
 * is solved by SMO with second-order working-set selection (as in LIBSVM).
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "quprofs/common.hpp"

namespace quprofs {

struct SvmParams {
  double c = 1.0;
  double tol = 1e-3;
  int max_passes = 200;  // one pass = n working-set updates
};

struct SvmModel {
  std::vector<double> alpha;          // one per training point
  std::vector<double> dual_coef;      // alpha_i y_i of the support vectors
  std::vector<std::size_t> support;   // indices into the training set
  double bias = 0.0;
  double c = 1.0;
  int iterations = 0;
  bool converged = false;
  bool jittered = false;              // Gram was not PSD; diagonal jitter applied
  std::vector<double> objective_trace;  // dual objective (maximisation form) after each pass
  std::vector<std::string> warnings;
};

/// Dual objective sum(a) - 1/2 sum_ij a_i a_j y_i y_j K_ij.
inline double svm_dual_objective(const Eigen::MatrixXd& k, std::span<const int> y, std::span<const double> alpha) {
  const auto n = static_cast<Eigen::Index>(y.size());
  Eigen::VectorXd ay(n);
  for (Eigen::Index i = 0; i < n; ++i) ay[i] = alpha[i] * y[i];
  return Eigen::Map<const Eigen::VectorXd>(alpha.data(), n).sum() - 0.5 * ay.dot(k * ay);
}

/// Bias from the KKT conditions: mean over free vectors, else the midpoint
/// of the feasible interval.
inline double svm_bias(const Eigen::MatrixXd& k, std::span<const int> y, std::span<const double> alpha, double c,
                       double eps = 1e-8) {
  const auto n = static_cast<Eigen::Index>(y.size());
  Eigen::VectorXd ay(n);
  for (Eigen::Index i = 0; i < n; ++i) ay[i] = alpha[i] * y[i];
  const Eigen::VectorXd f = k * ay;  // decision value without bias
  double sum_free = 0.0;
  int n_free = 0;
  double ub = std::numeric_limits<double>::infinity(), lb = -ub;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = y[i] - f[i];  // b that puts point i on the margin
    if (alpha[i] > eps && alpha[i] < c - eps) {
      sum_free += r;
      ++n_free;
    } else {
      // a_i = 0 needs y_i f_i >= 1, a_i = C needs y_i f_i <= 1
      const bool at_upper = alpha[i] >= c - eps;
      if ((y[i] > 0) != at_upper) {
        lb = std::max(lb, r);
      } else {
        ub = std::min(ub, r);
      }
    }
  }
  if (n_free > 0) return sum_free / n_free;
  if (std::isinf(lb) && std::isinf(ub)) return 0.0;
  if (std::isinf(lb)) return ub;
  if (std::isinf(ub)) return lb;
  return 0.5 * (lb + ub);
}

inline SvmModel svm_train(const Eigen::MatrixXd& gram, std::span<const int> labels, const SvmParams& params = {}) {
  const auto n = static_cast<Eigen::Index>(labels.size());
  if (gram.rows() != n || gram.cols() != n) throw Error("svm_train: Gram shape does not match label count");
  if (!(params.c > 0.0)) throw ConfigError("svm_train: C must be > 0");
  if (n == 0) throw DegenerateError("svm_train: empty training set");
  for (int y : labels) {
    if (y != 1 && y != -1) throw Error("svm_train: labels must be +1 or -1");
  }
  if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw Error("svm_train: Gram matrix is not symmetric");

  SvmModel m;
  m.c = params.c;
  m.alpha.assign(static_cast<std::size_t>(n), 0.0);

  const bool has_pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
  const bool has_neg = std::find(labels.begin(), labels.end(), -1) != labels.end();
  if (!has_pos || !has_neg) {
    m.bias = has_pos ? 1.0 : -1.0;
    m.converged = true;
    m.warnings.emplace_back("single-class training labels; constant classifier");
    return m;
  }

  Eigen::MatrixXd k = gram;
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-8) {
      m.warnings.emplace_back("Gram matrix is not PSD (min eigenvalue " + std::to_string(eig.eigenvalues().minCoeff()) +
                              "); retrying with diagonal jitter 1e-8");
      k.diagonal().array() += 1e-8;
      m.jittered = true;
    }
  }

  const double c = params.c;
  constexpr double kTau = 1e-12;
  std::vector<double>& a = m.alpha;
  // gradient of the minimisation objective: G = Q a - e
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);
  auto q = [&](Eigen::Index i, Eigen::Index j) { return labels[i] * labels[j] * k(i, j); };
  auto in_up = [&](Eigen::Index t) { return (labels[t] > 0 && a[t] < c) || (labels[t] < 0 && a[t] > 0); };
  auto in_low = [&](Eigen::Index t) { return (labels[t] > 0 && a[t] > 0) || (labels[t] < 0 && a[t] < c); };

  const long max_iter = static_cast<long>(std::max(1, params.max_passes)) * std::max<long>(n, 1);
  long iter = 0;
  for (; iter < max_iter; ++iter) {
    if (iter > 0 && iter % n == 0) m.objective_trace.push_back(svm_dual_objective(k, labels, a));
    // i: maximal violator in I_up
    Eigen::Index i = -1;
    double gmax = -std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (in_up(t) && -labels[t] * grad[t] > gmax) {
        gmax = -labels[t] * grad[t];
        i = t;
      }
    }
    // j: second-order choice in I_low
    Eigen::Index j = -1;
    double gmin = std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double yg = -labels[t] * grad[t];
      gmin = std::min(gmin, yg);
      if (i >= 0 && yg < gmax) {
        const double b = gmax - yg;
        double quad = k(i, i) + k(t, t) - 2.0 * k(i, t);
        if (quad <= 0) quad = kTau;
        const double score = -(b * b) / quad;
        if (score < best) {
          best = score;
          j = t;
        }
      }
    }
    if (i < 0 || j < 0 || gmax - gmin < params.tol) {
      m.converged = true;
      break;
    }

    const double ai_old = a[i], aj_old = a[j];
    const int yi = labels[i], yj = labels[j];
    double quad = k(i, i) + k(j, j) - 2.0 * k(i, j);
    if (quad <= 0) quad = kTau;
    if (yi != yj) {
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0) {
        if (a[j] < 0) { a[j] = 0; a[i] = diff; }
      } else {
        if (a[i] < 0) { a[i] = 0; a[j] = -diff; }
      }
      if (diff > 0) {
        if (a[i] > c) { a[i] = c; a[j] = c - diff; }
      } else {
        if (a[j] > c) { a[j] = c; a[i] = c + diff; }
      }
    } else {
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > c) {
        if (a[i] > c) { a[i] = c; a[j] = sum - c; }
      } else {
        if (a[j] < 0) { a[j] = 0; a[i] = sum; }
      }
      if (sum > c) {
        if (a[j] > c) { a[j] = c; a[i] = sum - c; }
      } else {
        if (a[i] < 0) { a[i] = 0; a[j] = sum; }
      }
    }
    const double di = a[i] - ai_old, dj = a[j] - aj_old;
    for (Eigen::Index t = 0; t < n; ++t) grad[t] += q(t, i) * di + q(t, j) * dj;
  }
  m.iterations = static_cast<int>(iter);
  m.objective_trace.push_back(svm_dual_objective(k, labels, a));
  if (!m.converged) m.warnings.emplace_back("SMO stopped at max_passes before reaching tol");

  m.bias = svm_bias(k, labels, a, c);
  for (Eigen::Index t = 0; t < n; ++t) {
    if (a[t] > 0.0) {
      m.support.push_back(static_cast<std::size_t>(t));
      m.dual_coef.push_back(a[t] * labels[t]);
    }
  }
  return m;
}

/// Decision values sum_i alpha_i y_i K(x, x_i) + b for each row of a
/// test x train kernel block.
inline std::vector<double> svm_decision(const SvmModel& m, const Eigen::MatrixXd& k_test_train) {
  if (static_cast<std::size_t>(k_test_train.cols()) != m.alpha.size()) {
    throw Error("svm_predict: kernel has " + std::to_string(k_test_train.cols()) + " columns, model was trained on " +
                std::to_string(m.alpha.size()) + " points");
  }
  std::vector<double> out(static_cast<std::size_t>(k_test_train.rows()), m.bias);
  for (Eigen::Index r = 0; r < k_test_train.rows(); ++r) {
    for (std::size_t s = 0; s < m.support.size(); ++s) {
      out[static_cast<std::size_t>(r)] += m.dual_coef[s] * k_test_train(r, static_cast<Eigen::Index>(m.support[s]));
    }
  }
  return out;
}

/// Labels in {-1, +1}; a zero decision value maps to +1.
inline std::vector<int> svm_predict(const SvmModel& m, const Eigen::MatrixXd& k_test_train) {
  const auto dv = svm_decision(m, k_test_train);
  std::vector<int> out;
  out.reserve(dv.size());
  for (double v : dv) out.push_back(v >= 0.0 ? 1 : -1);
  return out;
}

inline double accuracy(std::span<const int> predicted, std::span<const int> actual) {
  if (predicted.size() != actual.size()) throw Error("accuracy: length mismatch");
  if (predicted.empty()) throw DegenerateError("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == actual[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

}  // namespace quprofs
