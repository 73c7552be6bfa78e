#pragma once

#include <stdexcept>
#include <string>

namespace csopt {

enum class ErrorKind {
  Config,
  Domain,
  IllConditioned,
  Numerical,
  OptimizationFailed,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& what) : Error(ErrorKind::Domain, what) {}
};

struct IllConditionedError : Error {
  explicit IllConditionedError(const std::string& what)
      : Error(ErrorKind::IllConditioned, what) {}
};

struct NumericalError : Error {
  explicit NumericalError(const std::string& what) : Error(ErrorKind::Numerical, what) {}
};

struct OptimizationFailed : Error {
  explicit OptimizationFailed(const std::string& what)
      : Error(ErrorKind::OptimizationFailed, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace csopt
