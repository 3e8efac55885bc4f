// Copyright 2026 The WLRA Authors.
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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wlra {

// Base error. `code()` is a stable machine-readable identifier that the CLI
// forwards in its JSON error records.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& message) : Error("input-error", message) {}
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& message) : Error("shape-error", message) {}
};

class RankError : public Error {
 public:
  explicit RankError(const std::string& message) : Error("rank-error", message) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& message) : Error("format-error", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io-error", message) {}
};

class BudgetError : public Error {
 public:
  BudgetError(const std::string& message, std::size_t min_achievable)
      : Error("budget-error", message), min_achievable_(min_achievable) {}

  std::size_t min_achievable() const { return min_achievable_; }

 private:
  std::size_t min_achievable_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& message, std::size_t step)
      : Error("divergence-error", message), step_(step) {}

  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

class EmptyFilterError : public Error {
 public:
  explicit EmptyFilterError(const std::string& message)
      : Error("empty-filter-error", message) {}
};

}  // namespace wlra
