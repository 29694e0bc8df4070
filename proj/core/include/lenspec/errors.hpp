#pragma once

#include <stdexcept>
#include <string>

namespace lenspec {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A point lies outside the chart domain of a model.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A trajectory left the chart atlas during integration.
class ChartError : public Error {
 public:
  using Error::Error;
};

// Invalid model or run configuration (bad generators, bump out of range, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class ContractibleClassError : public Error {
 public:
  using Error::Error;
};

class NonHyperbolicError : public Error {
 public:
  using Error::Error;
};

class DegenerateOrbitError : public Error {
 public:
  using Error::Error;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// Two points are too far apart for a local (injectivity-radius) computation.
class RangeError : public Error {
 public:
  using Error::Error;
};

// Query beyond the completeness horizon of a spectrum.
class IncompleteHorizonError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

// Missing or inconsistent data in a spectrum or orbit list.
class DataError : public Error {
 public:
  using Error::Error;
};

class DegenerateEstimateError : public Error {
 public:
  using Error::Error;
};

class BinningError : public Error {
 public:
  BinningError(const std::string& what, double suggested_width)
      : Error(what), suggested_width_(suggested_width) {}
  double suggested_width() const noexcept { return suggested_width_; }

 private:
  double suggested_width_;
};

}  // namespace lenspec
