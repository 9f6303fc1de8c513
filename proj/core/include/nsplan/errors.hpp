#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nsplan {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (dimension mismatch, empty
/// input where one is required, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Malformed input with a position. `line` and `column` are 1-based; 0 means
/// "not applicable".
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string detail_;
};

/// Invalid configuration. `field` names the offending key.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message);

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Network or protocol failure talking to a remote service. `status` is the
/// HTTP status, or 0 when no response arrived.
class TransportError : public Error {
 public:
  TransportError(std::string endpoint, int status, const std::string& message);

  const std::string& endpoint() const noexcept { return endpoint_; }
  int status() const noexcept { return status_; }

 private:
  std::string endpoint_;
  int status_;
};

/// Scripted generator had no response for a prompt fingerprint.
class FixtureMissError : public Error {
 public:
  explicit FixtureMissError(std::string fingerprint);

  const std::string& fingerprint() const noexcept { return fingerprint_; }

 private:
  std::string fingerprint_;
};

/// A knowledge triplet's relation has no verbalization rule.
class UnmappedRelationError : public Error {
 public:
  explicit UnmappedRelationError(const std::string& relation);
};

/// Pearson correlation with a zero-variance side.
class UndefinedCorrelationError : public Error {
 public:
  using Error::Error;
};

/// Conditioning on a zero-probability event in the causal toy.
class ZeroProbabilityError : public Error {
 public:
  explicit ZeroProbabilityError(std::string event);

  const std::string& event() const noexcept { return event_; }

 private:
  std::string event_;
};

}  // namespace nsplan
