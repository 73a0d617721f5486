#pragma once

#include <stdexcept>
#include <string>

namespace crossmatch {

/// Precondition violated by the caller (bad index, out-of-range parameter, ...).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The requested computation is not available for these inputs
/// (e.g. the closed-form null law for an odd total sample size).
class UnsupportedError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical routine failed to meet its tolerance or produced a non-finite value.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or model specification.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure inside one simulation replicate; the message carries the
/// (t, replicate, seed) that reproduces it.
class ExperimentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace crossmatch
