#pragma once

#include <stdexcept>
#include <string>

namespace gsr {

/// Base of every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDimensions : public Error {
 public:
  using Error::Error;
};

/// The design matrix of a linear estimate is rank deficient.
class DegenerateConfiguration : public Error {
 public:
  using Error::Error;
};

/// Homography decomposition produced f^2 <= 0 or left the focal undetermined.
class NoValidFocal : public Error {
 public:
  using Error::Error;
};

/// No sign choice puts the camera above the ground plane.
class BehindGround : public Error {
 public:
  using Error::Error;
};

class InsufficientData : public Error {
 public:
  using Error::Error;
};

class EmptyDataset : public Error {
 public:
  using Error::Error;
};

/// Annotation JSON does not match the expected layout. `path()` is a JSON
/// pointer to the offending field.
class SchemaViolation : public Error {
 public:
  SchemaViolation(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace gsr
