// Copyright 2026 The flipsense Authors
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

#ifndef FLIPSENSE_ERROR_HPP
#define FLIPSENSE_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace flipsense {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A history line could not be parsed. Carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_{line} {}

  [[nodiscard]] std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Input parsed but violates a structural rule (duplicate build id, empty history, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A caller passed an argument outside an operation's domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent matrix or method configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A metric was requested for a set that makes it undefined (empty denominator).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace flipsense

#endif  // FLIPSENSE_ERROR_HPP
