#pragma once

#include <stdexcept>
#include <string>

namespace meanfield {

/// Base class for every error raised by the library. The CLI maps these to
/// exit status 1; ConfigError maps to exit status 2.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class MeshError : public Error {
 public:
  explicit MeshError(const std::string& what) : Error("mesh", what) {}
};

class ExprError : public Error {
 public:
  ExprError(const std::string& what, std::size_t offset)
      : Error("expr", what), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class FieldError : public Error {
 public:
  explicit FieldError(const std::string& what) : Error("field", what) {}
};

class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what) : Error("solver", what) {}
};

class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& what) : Error("argument", what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error("io", what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

}  // namespace meanfield
