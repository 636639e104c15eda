#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tkgr {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text; carries the offending file and 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class EmptyDatasetError : public Error {
 public:
  using Error::Error;
};

/// Raw timestamp not divisible by the declared interval.
class GranularityError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Binary container (dataset cache, checkpoint) is malformed or truncated.
class ContainerError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public ContainerError {
 public:
  using ContainerError::ContainerError;
};

/// Negative sampling could not satisfy the request; carries how many
/// candidates were produced before giving up.
class SamplingError : public Error {
 public:
  explicit SamplingError(const std::string& what, std::size_t achieved = 0)
      : Error(what), achieved_(achieved) {}
  std::size_t achieved() const noexcept { return achieved_; }

 private:
  std::size_t achieved_;
};

/// Non-finite value produced where the math requires finiteness.
class NumericError : public Error {
 public:
  using Error::Error;
};

class StatError : public Error {
 public:
  using Error::Error;
};

class EvalError : public Error {
 public:
  using Error::Error;
};

/// LSTM window length does not match the configured input sequence length.
class SequenceLengthError : public Error {
 public:
  using Error::Error;
};

}  // namespace tkgr
