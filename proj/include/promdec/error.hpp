// promdec/error.hpp

// Copyright 2026 The promdec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace promdec {

/// Base of every error thrown by the library. The CLI maps these to exit
/// status 2 (data error).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A value outside an operation's domain (e.g. a raw prominence level of 4).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what),
        message_(what),
        line_(line) {}
  std::size_t line() const { return line_; }

  /// The same error with a location prefix such as a file name.
  ParseError in(const std::string& where) const { return ParseError(where + ": " + message_, line_); }

 private:
  std::string message_;
  std::size_t line_;
};

/// Binary file or matrix content that violates the emission format.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// An utterance cannot be rendered under the requested tagging mode.
class ModeError : public Error {
 public:
  using Error::Error;
};

/// Reference generation needs a level on every prosodic word.
class IncompleteAnnotationError : public Error {
 public:
  using Error::Error;
};

/// Count-of-counts make the modified Kneser-Ney discounts undefined.
/// Retry estimation with MknOptions::degenerate_fallback set.
class DegenerateCountsError : public Error {
 public:
  using Error::Error;
};

}  // namespace promdec
