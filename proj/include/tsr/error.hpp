#pragma once

#include <stdexcept>
#include <string>

namespace tsr {

// Error categories, mapped onto CLI exit codes:
//   usage/config -> 2, data/schema/io -> 3, fit/numeric -> 4
enum class ErrorKind {
  usage,
  config,
  data,
  schema,
  io,
  fit,
  numeric,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message)
      : std::runtime_error(std::move(message)), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  int exit_code() const noexcept {
    switch (kind_) {
      case ErrorKind::usage:
      case ErrorKind::config:
        return 2;
      case ErrorKind::data:
      case ErrorKind::schema:
      case ErrorKind::io:
        return 3;
      case ErrorKind::fit:
      case ErrorKind::numeric:
        return 4;
    }
    return 1;
  }

 private:
  ErrorKind kind_;
};

struct UsageError : Error {
  explicit UsageError(std::string m) : Error(ErrorKind::usage, std::move(m)) {}
};
struct ConfigError : Error {
  explicit ConfigError(std::string m) : Error(ErrorKind::config, std::move(m)) {}
};
struct DataError : Error {
  explicit DataError(std::string m) : Error(ErrorKind::data, std::move(m)) {}
};
struct SchemaError : Error {
  explicit SchemaError(std::string m) : Error(ErrorKind::schema, std::move(m)) {}
};
struct IoError : Error {
  explicit IoError(std::string m) : Error(ErrorKind::io, std::move(m)) {}
};
struct FitError : Error {
  explicit FitError(std::string m) : Error(ErrorKind::fit, std::move(m)) {}
};

}  // namespace tsr
