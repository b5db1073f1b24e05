#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace topolow {

using Rng = std::mt19937_64;

// Error hierarchy. The CLI maps each class onto its exit code.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text. Line and column are 1-based; 0 means "unknown".
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column);
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Input that parses but violates a hard data contract (negative
/// dissimilarity, disconnected observation graph, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Internal numerical invariant breach (non-finite coordinates, solver
/// failed to converge).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// splitmix64 finalizer; used to derive independent RNG streams from a base
// seed so that parallel work items never share state.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) noexcept;

// Warnings go through a replaceable sink (stderr by default).
using WarningSink = std::function<void(std::string_view)>;
void set_warning_sink(WarningSink sink);
void warn(std::string_view message);

const char* version() noexcept;

}  // namespace topolow
