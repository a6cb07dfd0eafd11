// Copyright 2026 The TTLR Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ttlr/error.hpp"

namespace ttlr {

/// Sparse feature vector with 0-based, strictly increasing indices.
struct SparseVector {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  std::size_t nnz() const noexcept { return indices.size(); }

  void push_back(std::uint32_t index, double value) {
    indices.push_back(index);
    values.push_back(value);
  }

  static SparseVector dense(std::span<const double> x) {
    SparseVector v;
    v.indices.reserve(x.size());
    v.values.reserve(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
      v.push_back(static_cast<std::uint32_t>(j), x[j]);
    }
    return v;
  }

  double squared_norm() const noexcept {
    double s = 0.0;
    for (double v : values) s += v * v;
    return s;
  }

  friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

/// One training example. `label` is the 0-based class index; files and the
/// CLI speak 1-based labels.
struct Example {
  SparseVector x;
  std::size_t label = 0;

  friend bool operator==(const Example&, const Example&) = default;
};

/// d x C parameter matrix stored row-major: W(j, c) = data[j * C + c], so the
/// C weights of one feature are contiguous.
class WeightMatrix {
 public:
  WeightMatrix() = default;
  WeightMatrix(std::size_t dim, std::size_t classes)
      : dim_(dim), classes_(classes), data_(dim * classes, 0.0) {}
  WeightMatrix(std::size_t dim, std::size_t classes, std::vector<double> data)
      : dim_(dim), classes_(classes), data_(std::move(data)) {
    detail::require(data_.size() == dim_ * classes_,
                    "WeightMatrix: data size does not match shape");
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t num_classes() const noexcept { return classes_; }

  double& operator()(std::size_t j, std::size_t c) { return data_[j * classes_ + c]; }
  double operator()(std::size_t j, std::size_t c) const {
    return data_[j * classes_ + c];
  }

  std::span<double> flat() noexcept { return data_; }
  std::span<const double> flat() const noexcept { return data_; }

  /// out_c = <x, w_c>.
  void activations(const SparseVector& x, std::span<double> out) const {
    for (double& v : out) v = 0.0;
    for (std::size_t k = 0; k < x.nnz(); ++k) {
      const double* row = data_.data() + std::size_t{x.indices[k]} * classes_;
      const double xv = x.values[k];
      for (std::size_t c = 0; c < classes_; ++c) out[c] += xv * row[c];
    }
  }

  std::vector<double> activations(const SparseVector& x) const {
    std::vector<double> a(classes_);
    activations(x, a);
    return a;
  }

  double squared_frobenius() const noexcept {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return s;
  }

  bool all_finite() const noexcept {
    for (double v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  friend bool operator==(const WeightMatrix&, const WeightMatrix&) = default;

 private:
  std::size_t dim_ = 0;
  std::size_t classes_ = 0;
  std::vector<double> data_;
};

/// Labelled sparse examples. label_values[k] is the original (file) label of
/// class index k.
struct Dataset {
  std::vector<Example> examples;
  std::size_t dim = 0;
  std::size_t num_classes = 0;
  std::vector<double> label_values;

  std::size_t size() const noexcept { return examples.size(); }
  bool empty() const noexcept { return examples.empty(); }

  /// Checks every structural invariant; throws ContractViolation.
  void validate() const {
    detail::require(label_values.empty() || label_values.size() == num_classes,
                    "Dataset: label table size does not match class count");
    for (const auto& e : examples) {
      detail::require(e.label < num_classes, "Dataset: label out of range");
      detail::require(e.x.indices.size() == e.x.values.size(),
                      "Dataset: ragged sparse vector");
      for (std::size_t k = 0; k < e.x.nnz(); ++k) {
        detail::require(e.x.indices[k] < dim, "Dataset: feature index >= dim");
        detail::require(k == 0 || e.x.indices[k - 1] < e.x.indices[k],
                        "Dataset: feature indices must be strictly increasing");
      }
    }
  }

  /// Same metadata, no examples.
  Dataset empty_like() const {
    Dataset d;
    d.dim = dim;
    d.num_classes = num_classes;
    d.label_values = label_values;
    return d;
  }

  Dataset subset(std::span<const std::size_t> rows) const {
    Dataset d = empty_like();
    d.examples.reserve(rows.size());
    for (std::size_t r : rows) d.examples.push_back(examples[r]);
    return d;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Appends a constant feature with value 1 at index `dim` (a bias column).
inline Dataset with_bias_feature(const Dataset& data) {
  Dataset out = data;
  const auto bias = static_cast<std::uint32_t>(data.dim);
  for (auto& e : out.examples) e.x.push_back(bias, 1.0);
  out.dim = data.dim + 1;
  return out;
}

}  // namespace ttlr
