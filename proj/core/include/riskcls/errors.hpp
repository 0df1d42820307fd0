#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace riskcls {

// Base error. `kind()` is a short stable identifier used in the CLI's
// machine-readable error line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error("parse", source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& message) : Error("validation", message) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message) : Error("config", message) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& message) : Error("io", message) {}
};

class EmptyAfterPreprocessing : public Error {
 public:
  explicit EmptyAfterPreprocessing(const std::string& user_id)
      : Error("empty_after_preprocessing", "user '" + user_id + "' is empty after preprocessing"),
        user_id_(user_id) {}

  const std::string& user_id() const noexcept { return user_id_; }

 private:
  std::string user_id_;
};

}  // namespace riskcls
