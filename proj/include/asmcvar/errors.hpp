#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace asmcvar {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, long iteration)
      : Error(what), iteration_(iteration) {}
  long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

class BacktestError : public Error {
 public:
  BacktestError(const std::string& what, std::size_t period)
      : Error(what), period_(period) {}
  std::size_t period() const noexcept { return period_; }

 private:
  std::size_t period_;
};

class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

class DegenerateSolutionError : public Error {
 public:
  using Error::Error;
};

class CombinatorialLimitError : public Error {
 public:
  using Error::Error;
};

// Non-fatal diagnostics (power-iteration cap, excluded overlap periods, ...).
// Defaults to stderr; tests and bindings may install their own sink.
using WarningSink = std::function<void(std::string_view)>;
void set_warning_sink(WarningSink sink);
void warn(std::string_view message);

}  // namespace asmcvar
