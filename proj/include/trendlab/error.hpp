#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace trendlab {

// Base class for every error raised by the library. Subclasses name the
// failure category so callers (and the CLI) can report it precisely.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public Error { using Error::Error; };
class IntegrityError : public Error { using Error::Error; };
class RangeError : public Error { using Error::Error; };
class AlignmentError : public Error { using Error::Error; };
class InsufficientDataError : public Error { using Error::Error; };
class DegenerateError : public Error { using Error::Error; };
class InputError : public Error { using Error::Error; };
class ShapeError : public Error { using Error::Error; };
class NumericError : public Error { using Error::Error; };
class ConditioningError : public Error { using Error::Error; };
class ParameterError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class AggregationError : public Error { using Error::Error; };
class FormatError : public Error { using Error::Error; };

class RowError : public Error {
 public:
  RowError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class TrainingError : public Error {
 public:
  TrainingError(std::size_t epoch, const std::string& what)
      : Error("epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}
  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_;
};

class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& cause)
      : Error("stage '" + stage + "' failed: " + cause), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace trendlab
