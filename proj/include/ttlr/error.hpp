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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ttlr {

/// A caller broke a documented precondition (bad shape, unnormalized input,
/// temperature out of range, ...).
class ContractViolation : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The log-partition root finder failed to bracket or converge. Should be
/// unreachable for finite input; treat as a bug.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gradient requested at an exactly saturated example (p = 0) where the
/// analytic limit does not exist.
class SaturationError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed LIBSVM / model / config text. Carries a 1-based line number and,
/// when known, a 1-based column.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : std::runtime_error(format(line, column, what)),
        line_(line),
        column_(column),
        message_(what) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  /// The message without the position prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  static std::string format(std::size_t line, std::size_t column,
                            const std::string& what) {
    std::string msg = "line " + std::to_string(line);
    if (column > 0) msg += ", column " + std::to_string(column);
    return msg + ": " + what;
  }

  std::size_t line_;
  std::size_t column_;
  std::string message_;
};

namespace detail {

inline void require(bool cond, const char* msg) {
  if (!cond) throw ContractViolation(msg);
}

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractViolation(msg);
}

}  // namespace detail
}  // namespace ttlr
