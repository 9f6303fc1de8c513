#include "nsplan/text.hpp"

#include <cctype>
#include <cstdio>

#include "nsplan/errors.hpp"

namespace nsplan {

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column)
    : Error([&] {
        std::string where;
        if (line > 0) where += "line " + std::to_string(line);
        if (column > 0) where += (where.empty() ? "" : ", ") + std::string("column ") + std::to_string(column);
        return where.empty() ? message : where + ": " + message;
      }()),
      line_(line),
      column_(column),
      detail_(message) {}

ConfigError::ConfigError(std::string field, const std::string& message)
    : Error(field + ": " + message), field_(std::move(field)) {}

TransportError::TransportError(std::string endpoint, int status, const std::string& message)
    : Error(endpoint + " (status " + std::to_string(status) + "): " + message),
      endpoint_(std::move(endpoint)),
      status_(status) {}

FixtureMissError::FixtureMissError(std::string fingerprint)
    : Error("no scripted response for prompt fingerprint " + fingerprint),
      fingerprint_(std::move(fingerprint)) {}

UnmappedRelationError::UnmappedRelationError(const std::string& relation)
    : Error("no symbolic rule for relation " + relation) {}

ZeroProbabilityError::ZeroProbabilityError(std::string event)
    : Error("conditioning event has zero probability: " + event), event_(std::move(event)) {}

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) {
      current.push_back(static_cast<char>(std::tolower(uc)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string trim(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
  return std::string(text.substr(begin, end - begin));
}

std::string key_to_surface(std::string_view key) {
  std::string out(key);
  for (char& c : out) {
    if (c == '_') c = ' ';
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string fingerprint_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string join_steps(const std::vector<std::string>& steps) {
  std::string out;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (i > 0) out += ". ";
    out += steps[i];
  }
  return out;
}

}  // namespace nsplan
