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

/**
 * @file libsvm.hpp
 * @brief LIBSVM text format: `label idx:val idx:val ...`.
 *
 * Indices are 1-based and strictly increasing within a line. Blank lines and
 * text after '#' are ignored. Labels are arbitrary numbers, remapped to class
 * indices through a label table:
 *   - exactly two distinct labels: the larger one is class 1 (so +1/-1 and
 *     1/0 put the positive class first),
 *   - otherwise ascending numeric order.
 * A table can also be supplied (e.g. the training file's) so that a test file
 * maps consistently.
 */

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "ttlr/error.hpp"
#include "ttlr/format.hpp"
#include "ttlr/types.hpp"

namespace ttlr {

struct LibsvmOptions {
  /// Feature dimension; defaults to the largest index seen.
  std::optional<std::size_t> dim;
  /// Fixed label table; labels outside it are a parse error.
  std::optional<std::vector<double>> label_values;
};

inline std::vector<double> default_label_table(std::vector<double> distinct) {
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() == 2) std::swap(distinct[0], distinct[1]);
  return distinct;
}

inline Dataset parse_libsvm(std::istream& in, const LibsvmOptions& options = {}) {
  struct RawRow {
    double label;
    std::size_t line;
    SparseVector x;
  };
  std::vector<RawRow> rows;
  std::size_t max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view body(line);
    if (const auto hash = body.find('#'); hash != std::string_view::npos) {
      body = body.substr(0, hash);
    }
    std::size_t pos = 0;
    auto next_token = [&](std::size_t& column) -> std::string_view {
      pos = body.find_first_not_of(" \t\r", pos);
      if (pos == std::string_view::npos) {
        pos = body.size();
        return {};
      }
      const auto end = std::min(body.find_first_of(" \t\r", pos), body.size());
      column = pos + 1;
      const auto tok = body.substr(pos, end - pos);
      pos = end;
      return tok;
    };

    std::size_t column = 0;
    const auto label_tok = next_token(column);
    if (label_tok.empty()) continue;
    const auto label = parse_double(label_tok);
    if (!label || !std::isfinite(*label)) {
      throw ParseError(line_no, column, "bad label '" + std::string(label_tok) + "'");
    }
    RawRow row{*label, line_no, {}};
    while (true) {
      const auto tok = next_token(column);
      if (tok.empty()) break;
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError(line_no, column,
                         "expected idx:val, got '" + std::string(tok) + "'");
      }
      const auto idx = parse_integer<std::uint64_t>(tok.substr(0, colon));
      const auto val = parse_double(tok.substr(colon + 1));
      if (!idx || *idx == 0 || *idx > std::numeric_limits<std::uint32_t>::max()) {
        throw ParseError(line_no, column, "bad feature index in '" + std::string(tok) + "'");
      }
      if (!val || !std::isfinite(*val)) {
        throw ParseError(line_no, column, "bad feature value in '" + std::string(tok) + "'");
      }
      const auto zero_based = static_cast<std::uint32_t>(*idx - 1);
      if (!row.x.indices.empty() && row.x.indices.back() >= zero_based) {
        throw ParseError(line_no, column, "feature indices must be strictly increasing");
      }
      row.x.push_back(zero_based, *val);
      max_index = std::max<std::size_t>(max_index, *idx);
    }
    rows.push_back(std::move(row));
  }
  detail::require(!rows.empty(), "parse_libsvm: no examples in input");

  Dataset data;
  if (options.label_values) {
    data.label_values = *options.label_values;
  } else {
    std::vector<double> labels;
    labels.reserve(rows.size());
    for (const auto& r : rows) labels.push_back(r.label);
    data.label_values = default_label_table(std::move(labels));
  }
  data.num_classes = data.label_values.size();
  data.dim = options.dim.value_or(max_index);
  data.examples.reserve(rows.size());
  for (auto& r : rows) {
    const auto it = std::find(data.label_values.begin(), data.label_values.end(), r.label);
    if (it == data.label_values.end()) {
      throw ParseError(r.line, 1, "label " + format_double(r.label) + " not in label table");
    }
    if (!r.x.indices.empty() && r.x.indices.back() >= data.dim) {
      throw ParseError(r.line, 0, "feature index exceeds dimension " +
                                      std::to_string(data.dim));
    }
    data.examples.push_back(
        {std::move(r.x), static_cast<std::size_t>(it - data.label_values.begin())});
  }
  return data;
}

/// Writes `data` in LIBSVM format using its label table (or 1-based class
/// indices when it has none).
inline void write_libsvm(std::ostream& out, const Dataset& data) {
  for (const auto& e : data.examples) {
    out << (data.label_values.empty() ? format_double(static_cast<double>(e.label + 1))
                                      : format_double(data.label_values[e.label]));
    for (std::size_t k = 0; k < e.x.nnz(); ++k) {
      out << ' ' << (e.x.indices[k] + 1) << ':' << format_double(e.x.values[k]);
    }
    out << '\n';
  }
}

}  // namespace ttlr
