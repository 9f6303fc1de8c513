#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace nsplan {

/// Lowercased alphanumeric word tokens; everything else separates words.
std::vector<std::string> word_tokens(std::string_view text);

std::string to_lower(std::string_view text);

/// Strips leading/trailing ASCII whitespace.
std::string trim(std::string_view text);

/// Node keys use underscores where surface text has spaces.
std::string key_to_surface(std::string_view key);

/// 64-bit FNV-1a over the raw bytes. Stable across platforms and releases;
/// scripted-generator fixtures depend on it.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// Lowercase, zero-padded 16-digit hex of fnv1a64(bytes).
std::string fingerprint_hex(std::string_view bytes);

/// "a. b. c": the plan-level text form used by the metrics.
std::string join_steps(const std::vector<std::string>& steps);

}  // namespace nsplan
