#pragma once

#include <stdexcept>
#include <string>

namespace botmine {

// Configuration problems (bad flag values, out-of-range parameters).
// The CLI maps these to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Data problems (unreadable files, malformed manifests, bad model files).
// The CLI maps these and the more specific errors below to exit code 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class InvalidRegionError : public DataError {
 public:
  explicit InvalidRegionError(const std::string& msg) : DataError(msg) {}
};

class TooSmallError : public DataError {
 public:
  explicit TooSmallError(const std::string& msg) : DataError(msg) {}
};

class DegenerateTriangleError : public DataError {
 public:
  explicit DegenerateTriangleError(const std::string& msg) : DataError(msg) {}
};

class InsufficientDataError : public DataError {
 public:
  explicit InsufficientDataError(const std::string& msg) : DataError(msg) {}
};

class SingularCovarianceError : public DataError {
 public:
  explicit SingularCovarianceError(const std::string& msg) : DataError(msg) {}
};

class ShapeMismatchError : public DataError {
 public:
  explicit ShapeMismatchError(const std::string& msg) : DataError(msg) {}
};

class DegenerateTrainingError : public DataError {
 public:
  explicit DegenerateTrainingError(const std::string& msg) : DataError(msg) {}
};

}  // namespace botmine
