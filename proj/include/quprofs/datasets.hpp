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
 * datasets.hpp
 *
 * Binary classification datasets: synthetic generators, CSV ingestion,
 * train-only standardization, PCA and stratified splitting.
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "quprofs/common.hpp"

namespace quprofs {

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Dataset {
  FeatureMatrix X;
  std::vector<int> y;  // +1 / -1
  std::string name;
  int d_original = 0;

  std::size_t size() const { return y.size(); }
  int dim() const { return static_cast<int>(X.cols()); }
  std::span<const double> row(std::size_t i) const {
    return {X.data() + static_cast<std::ptrdiff_t>(i) * X.cols(), static_cast<std::size_t>(X.cols())};
  }

  void validate() const {
    if (static_cast<std::size_t>(X.rows()) != y.size()) throw ConfigError("dataset: row count != label count");
    for (int label : y) {
      if (label != 1 && label != -1) throw ConfigError("dataset: labels must be +1 or -1");
    }
    if (!X.allFinite()) throw ConfigError("dataset: non-finite feature value");
  }
};

/// Rows of `data` selected by `indices`, in that order.
inline Dataset select_rows(const Dataset& data, std::span<const std::size_t> indices) {
  Dataset out;
  out.name = data.name;
  out.d_original = data.d_original;
  out.X.resize(static_cast<Eigen::Index>(indices.size()), data.X.cols());
  out.y.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    out.X.row(static_cast<Eigen::Index>(r)) = data.X.row(static_cast<Eigen::Index>(indices[r]));
    out.y.push_back(data.y[indices[r]]);
  }
  return out;
}

namespace detail {

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[uniform_index(rng, i)]);
}

/// Splits `per_class` counts so they sum to `total`, proportional to class
/// sizes (largest remainder, ties to the lower label).
inline std::map<int, std::size_t> allocate(const std::map<int, std::vector<std::size_t>>& by_class, std::size_t n,
                                           std::size_t total) {
  std::map<int, std::size_t> take;
  std::vector<std::pair<double, int>> rem;
  std::size_t used = 0;
  for (const auto& [label, idx] : by_class) {
    const double exact = static_cast<double>(total) * static_cast<double>(idx.size()) / static_cast<double>(n);
    take[label] = std::min(idx.size(), static_cast<std::size_t>(std::floor(exact)));
    used += take[label];
    rem.emplace_back(exact - std::floor(exact), label);
  }
  std::stable_sort(rem.begin(), rem.end(), [](auto& a, auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; used < total && i < 4 * rem.size(); ++i) {
    const int label = rem[i % rem.size()].second;
    if (take[label] < by_class.at(label).size()) {
      ++take[label];
      ++used;
    }
  }
  return take;
}

inline std::map<int, std::vector<std::size_t>> group_by_label(std::span<const int> labels) {
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  return by_class;
}

}  // namespace detail

/// min(m, n) indices drawn without replacement, class proportions preserved.
/// Returned in ascending order.
inline std::vector<std::size_t> stratified_subsample(std::span<const int> labels, std::size_t m, Rng& rng) {
  const std::size_t n = labels.size();
  if (m >= n) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    return all;
  }
  auto by_class = detail::group_by_label(labels);
  const auto take = detail::allocate(by_class, n, m);
  std::vector<std::size_t> out;
  for (auto& [label, idx] : by_class) {
    detail::shuffle(idx, rng);
    out.insert(out.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take.at(label)));
  }
  std::sort(out.begin(), out.end());
  return out;
}

// ---------------------------------------------------------------------------
// Generators

enum class DatasetKind { LinearlySeparable, HyperplaneParity, TwoCurves, HiddenManifold, BarsAndStripes };

inline std::string_view to_string(DatasetKind k) {
  switch (k) {
    case DatasetKind::LinearlySeparable: return "linearly_separable";
    case DatasetKind::HyperplaneParity: return "hyperplane_parity";
    case DatasetKind::TwoCurves: return "two_curves";
    case DatasetKind::HiddenManifold: return "hidden_manifold";
    case DatasetKind::BarsAndStripes: return "bars_and_stripes";
  }
  return "?";
}

inline DatasetKind dataset_kind_from_string(std::string_view s) {
  for (DatasetKind k : {DatasetKind::LinearlySeparable, DatasetKind::HyperplaneParity, DatasetKind::TwoCurves,
                        DatasetKind::HiddenManifold, DatasetKind::BarsAndStripes}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown dataset kind '" + std::string(s) + "'");
}

struct GeneratorParams {
  int d = 10;
  int n = 300;
  double margin = 0.0;     // linearly_separable
  int hyperplanes = 2;     // hyperplane_parity
  double delta = 0.3;      // two_curves
  int latent_dim = 6;      // hidden_manifold
};

inline Dataset generate(DatasetKind kind, const GeneratorParams& p, Rng& rng) {
  if (p.n < 1) throw ConfigError("generate: n must be >= 1");
  if (kind != DatasetKind::BarsAndStripes && p.d < 1) throw ConfigError("generate: d must be >= 1");
  Dataset ds;
  ds.name = std::string(to_string(kind));
  const auto n = static_cast<Eigen::Index>(p.n);

  auto random_unit = [&](int dim) {
    Eigen::VectorXd v(dim);
    do {
      for (int i = 0; i < dim; ++i) v[i] = standard_normal(rng);
    } while (v.norm() == 0.0);
    return Eigen::VectorXd(v / v.norm());
  };
  auto label_of = [](double s) { return s >= 0.0 ? 1 : -1; };

  switch (kind) {
    case DatasetKind::LinearlySeparable: {
      if (p.margin < 0.0 || p.margin >= 1.0) throw ConfigError("linearly_separable: margin must be in [0,1)");
      const Eigen::VectorXd w = Eigen::VectorXd::Constant(p.d, 1.0 / std::sqrt(static_cast<double>(p.d)));
      ds.X.resize(n, p.d);
      for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd x(p.d);
        double s;
        do {
          for (int j = 0; j < p.d; ++j) x[j] = uniform_real(rng, -1.0, 1.0);
          s = w.dot(x);
        } while (std::abs(s) < p.margin);
        ds.X.row(i) = x.transpose();
        ds.y.push_back(label_of(s));
      }
      break;
    }
    case DatasetKind::HyperplaneParity: {
      if (p.hyperplanes < 1) throw ConfigError("hyperplane_parity: need at least one hyperplane");
      std::vector<Eigen::VectorXd> planes;
      for (int j = 0; j < p.hyperplanes; ++j) planes.push_back(random_unit(p.d));
      ds.X.resize(n, p.d);
      for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd x(p.d);
        for (int j = 0; j < p.d; ++j) x[j] = uniform_real(rng, -1.0, 1.0);
        int label = 1;
        for (const auto& w : planes) label *= label_of(w.dot(x));
        ds.X.row(i) = x.transpose();
        ds.y.push_back(label);
      }
      break;
    }
    case DatasetKind::TwoCurves: {
      std::vector<double> omega(p.d), phi(p.d);
      for (int j = 0; j < p.d; ++j) {
        omega[j] = 1.0 + static_cast<double>(uniform_index(rng, 4));
        phi[j] = uniform_real(rng, 0.0, 2.0 * kPi);
      }
      const Eigen::VectorXd u = random_unit(p.d);
      ds.X.resize(n, p.d);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double t = uniform_real(rng, 0.0, 2.0 * kPi);
        const int label = bernoulli(rng, 0.5) ? 1 : -1;
        for (int j = 0; j < p.d; ++j) {
          ds.X(i, j) = std::cos(omega[j] * t + phi[j]) + (label > 0 ? p.delta * u[j] : 0.0);
        }
        ds.y.push_back(label);
      }
      break;
    }
    case DatasetKind::HiddenManifold: {
      if (p.latent_dim < 1) throw ConfigError("hidden_manifold: latent_dim must be >= 1");
      Eigen::MatrixXd a(p.d, p.latent_dim);
      for (int r = 0; r < p.d; ++r) {
        for (int c = 0; c < p.latent_dim; ++c) a(r, c) = standard_normal(rng) / std::sqrt(double(p.latent_dim));
      }
      const Eigen::VectorXd w = random_unit(p.latent_dim);
      ds.X.resize(n, p.d);
      for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd z(p.latent_dim);
        for (int j = 0; j < p.latent_dim; ++j) z[j] = standard_normal(rng);
        ds.X.row(i) = (a * z).array().tanh().matrix().transpose();
        ds.y.push_back(label_of(w.dot(z)));
      }
      break;
    }
    case DatasetKind::BarsAndStripes: {
      // 16 bar patterns (rows constant) and 16 stripe patterns (columns
      // constant) share the two uniform patterns, leaving 30 distinct ones.
      // The uniform patterns are kept once, labelled as bars.
      std::vector<std::pair<std::array<double, 16>, int>> patterns;
      for (int mask = 0; mask < 16; ++mask) {
        std::array<double, 16> bars{}, stripes{};
        for (int r = 0; r < 4; ++r) {
          for (int c = 0; c < 4; ++c) {
            bars[4 * r + c] = (mask >> r) & 1 ? 1.0 : -1.0;
            stripes[4 * r + c] = (mask >> c) & 1 ? 1.0 : -1.0;
          }
        }
        patterns.emplace_back(bars, 1);
        if (mask != 0 && mask != 15) patterns.emplace_back(stripes, -1);
      }
      std::vector<std::size_t> order(patterns.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      detail::shuffle(order, rng);
      while (order.size() < static_cast<std::size_t>(p.n)) order.push_back(uniform_index(rng, patterns.size()));
      order.resize(static_cast<std::size_t>(p.n));
      ds.X.resize(n, 16);
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto& [pix, label] = patterns[order[static_cast<std::size_t>(i)]];
        for (int j = 0; j < 16; ++j) ds.X(i, j) = pix[j];
        ds.y.push_back(label);
      }
      break;
    }
  }
  ds.d_original = static_cast<int>(ds.X.cols());
  return ds;
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      out.push_back(cell);
      cell.clear();
    } else if (ch != '\r') {
      cell.push_back(ch);
    }
  }
  out.push_back(cell);
  for (auto& c : out) {
    const auto b = c.find_first_not_of(" \t"), e = c.find_last_not_of(" \t");
    c = b == std::string::npos ? std::string() : c.substr(b, e - b + 1);
  }
  return out;
}

}  // namespace detail

/// Reads a headed CSV. Every column except `label_column` must be numeric.
/// The label column must hold exactly two distinct values (one is accepted
/// and yields a single-class dataset); the lexicographically smaller maps
/// to -1.
inline Dataset load_csv(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": empty file, header row required");
  const auto header = detail::split_csv_line(line);
  const auto it = std::find(header.begin(), header.end(), label_column);
  if (it == header.end()) throw ConfigError(path + ": no column named '" + label_column + "'");
  const auto label_at = static_cast<std::size_t>(it - header.begin());

  std::vector<std::vector<double>> rows;
  std::vector<std::string> raw_labels;
  for (std::size_t line_no = 2; std::getline(in, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                        " columns, found " + std::to_string(cells.size()));
    }
    std::vector<double> row;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == label_at) continue;
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cells[c], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != cells[c].size() || !std::isfinite(v)) {
        throw ConfigError(path + ":" + std::to_string(line_no) + ": column '" + header[c] + "' is not a number: '" +
                          cells[c] + "'");
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
    raw_labels.push_back(cells[label_at]);
  }
  const std::set<std::string> classes(raw_labels.begin(), raw_labels.end());
  if (classes.size() > 2) throw ConfigError(path + ": label column has more than two classes");

  Dataset ds;
  ds.name = path;
  const auto d = static_cast<Eigen::Index>(header.size() - 1);
  ds.X.resize(static_cast<Eigen::Index>(rows.size()), d);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (Eigen::Index c = 0; c < d; ++c) ds.X(static_cast<Eigen::Index>(r), c) = rows[r][c];
  }
  const std::string negative = classes.empty() ? std::string() : *classes.begin();
  for (const auto& l : raw_labels) ds.y.push_back(classes.size() == 2 && l == negative ? -1 : 1);
  if (classes.size() == 1) {
    // a lone class keeps its natural sign if it reads like one
    const std::string& only = *classes.begin();
    if (only == "-1" || only == "-1.0") std::fill(ds.y.begin(), ds.y.end(), -1);
  }
  ds.d_original = static_cast<int>(d);
  return ds;
}

/// Writes columns x0..x{d-1},label.
inline void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  for (Eigen::Index c = 0; c < ds.X.cols(); ++c) out << 'x' << c << ',';
  out << "label\n";
  out.precision(17);
  for (Eigen::Index r = 0; r < ds.X.rows(); ++r) {
    for (Eigen::Index c = 0; c < ds.X.cols(); ++c) out << ds.X(r, c) << ',';
    out << ds.y[static_cast<std::size_t>(r)] << '\n';
  }
}

// ---------------------------------------------------------------------------
// Preprocessing

struct Standardization {
  Dataset train;
  Dataset test;
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;  // population std; 0 for constant columns
};

/// Fits per-column mean/std on `train` and applies them to both sets.
/// Constant columns are centered and left unscaled.
inline Standardization standardize(const Dataset& train, const Dataset& test) {
  if (train.size() == 0) throw DegenerateError("standardize: empty training set");
  Standardization s{train, test, train.X.colwise().mean().transpose(), Eigen::VectorXd(train.X.cols())};
  for (Eigen::Index c = 0; c < train.X.cols(); ++c) {
    const double var = (train.X.col(c).array() - s.mean[c]).square().mean();
    s.stddev[c] = std::sqrt(var);
  }
  auto apply = [&](FeatureMatrix& X) {
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
      X.col(c).array() -= s.mean[c];
      if (s.stddev[c] > 1e-12) X.col(c).array() /= s.stddev[c];
    }
  };
  apply(s.train.X);
  apply(s.test.X);
  return s;
}

struct PcaResult {
  Dataset train;
  Dataset test;
  Eigen::MatrixXd components;  // d x target_d, orthonormal columns
  Eigen::VectorXd explained_variance;
  Eigen::VectorXd mean;
};

/// Projects both sets onto the leading principal components of the train
/// covariance. Components are ordered by descending eigenvalue; each one's
/// largest-magnitude entry is made positive.
inline PcaResult pca_reduce(const Dataset& train, const Dataset& test, int target_d) {
  const auto d = train.X.cols();
  if (target_d < 1 || target_d > d) {
    throw ConfigError("pca_reduce: target dimension " + std::to_string(target_d) + " not in [1, " +
                      std::to_string(d) + "]");
  }
  if (train.size() == 0) throw DegenerateError("pca_reduce: empty training set");
  PcaResult r{train, test, {}, {}, train.X.colwise().mean().transpose()};
  const Eigen::MatrixXd centered = train.X.rowwise() - r.mean.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(train.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  r.components.resize(d, target_d);
  r.explained_variance.resize(target_d);
  for (int k = 0; k < target_d; ++k) {
    const Eigen::Index src = d - 1 - k;  // eigenvalues come ascending
    Eigen::VectorXd v = eig.eigenvectors().col(src);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0) v = -v;
    r.components.col(k) = v;
    r.explained_variance[k] = eig.eigenvalues()[src];
  }
  auto project = [&](const Dataset& in, Dataset& out) {
    const Eigen::MatrixXd proj = (in.X.rowwise() - r.mean.transpose()) * r.components;
    out.X = proj;
  };
  project(train, r.train);
  project(test, r.test);
  return r;
}

struct Split {
  Dataset train;
  Dataset test;
};

/// Stratified split: ceil(fraction * n) rows go to train.
inline Split split(const Dataset& data, double train_fraction, Rng& rng) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("split: fraction must be in (0,1)");
  auto by_class = detail::group_by_label(data.y);
  for (const auto& [label, idx] : by_class) {
    if (idx.size() < 2) {
      throw ConfigError("split: class " + std::to_string(label) + " has fewer than 2 members");
    }
  }
  const std::size_t n = data.size();
  const auto n_train = static_cast<std::size_t>(std::ceil(train_fraction * static_cast<double>(n) - 1e-9));
  const auto take = detail::allocate(by_class, n, n_train);
  std::vector<std::size_t> tr, te;
  for (auto& [label, idx] : by_class) {
    detail::shuffle(idx, rng);
    const auto k = static_cast<std::ptrdiff_t>(take.at(label));
    tr.insert(tr.end(), idx.begin(), idx.begin() + k);
    te.insert(te.end(), idx.begin() + k, idx.end());
  }
  std::sort(tr.begin(), tr.end());
  std::sort(te.begin(), te.end());
  return {select_rows(data, tr), select_rows(data, te)};
}

}  // namespace quprofs
