// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLOUDGAUGE_ERROR_HPP
#define CLOUDGAUGE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace cloudgauge {

/// Base class for every error raised by the library. The category decides the
/// process exit code used by the command-line front end.
class Error : public std::runtime_error {
 public:
  enum class Category { kUsage = 2, kData = 3, kNumeric = 4 };

  Error(Category category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  Category category() const noexcept { return category_; }
  int exit_code() const noexcept { return static_cast<int>(category_); }

 private:
  Category category_;
};

/// Invalid argument or precondition violated by the caller.
class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(Category::kUsage, what) {}
};

/// Malformed or inconsistent input data (files, streams, clouds).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(Category::kData, what) {}
};

/// A numerical procedure failed (degenerate statistics, non-convergence).
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(Category::kNumeric, what) {}
};

}  // namespace cloudgauge

#endif  // CLOUDGAUGE_ERROR_HPP
