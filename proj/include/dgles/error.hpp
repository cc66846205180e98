#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dgles {

// Root of every error the library throws. Each subclass maps to a stable
// CLI exit code (see app.hpp).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Nodal state with non-positive density/pressure or non-finite entries.
class StateError : public Error {
 public:
  StateError(const std::string& what, double rho, double p)
      : Error(what), rho_(rho), p_(p) {}
  double density() const { return rho_; }
  double pressure() const { return p_; }

 private:
  double rho_;
  double p_;
};

class MeshValidityError : public Error {
 public:
  MeshValidityError(const std::string& what, std::size_t element)
      : Error(what), element_(element) {}
  std::size_t element() const { return element_; }

 private:
  std::size_t element_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int stage, long step)
      : Error(what), stage_(stage), step_(step) {}
  int stage() const { return stage_; }
  long step() const { return step_; }

 private:
  int stage_;
  long step_;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class SamplingError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

class MissingInputError : public Error {
 public:
  MissingInputError(const std::string& what, std::string path)
      : Error(what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class ComparisonError : public Error {
 public:
  using Error::Error;
};

}  // namespace dgles
