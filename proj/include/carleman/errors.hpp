// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace carleman {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A dimension or element count exceeds the index range or the configured ceiling.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Caller-supplied arguments violate a precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Matrix/vector shapes disagree.
class DimensionError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Malformed input file.
class ParseError : public InvalidArgument {
 public:
  ParseError(const std::string& what, std::size_t line)
      : InvalidArgument(line == 0 ? what : what + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Re(lambda_1) >= 0 where the analysis requires a dissipative linear part.
class DissipationError : public Error {
 public:
  using Error::Error;
};

/// Non-finite state, singular system, failed residual check and similar.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double last_finite_time = 0.0)
      : Error(what), last_finite_time_(last_finite_time) {}
  double last_finite_time() const noexcept { return last_finite_time_; }

 private:
  double last_finite_time_;
};

/// Iterative method hit its iteration cap.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double last_estimate)
      : NumericalError(what), last_estimate_(last_estimate) {}
  double last_estimate() const noexcept { return last_estimate_; }

 private:
  double last_estimate_;
};

}  // namespace carleman
