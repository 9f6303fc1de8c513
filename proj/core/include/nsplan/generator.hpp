#pragma once

#include <filesystem>
#include <istream>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "nsplan/http_transport.hpp"

namespace nsplan {

enum class GenerationMode { kAutoregressive, kAutoencoder };

inline constexpr std::string_view kMaskToken = "[MASK]";

struct GenerationRequest {
  std::string prompt;
  GenerationMode mode = GenerationMode::kAutoregressive;
  int max_tokens = 32;
  double temperature = 0.0;
  std::vector<std::string> stop{"\n"};
  /// Accepted steps so far and the translated knowledge lines. Mocks read
  /// them; the remote provider only sees them through the prompt.
  std::vector<std::string> history;
  std::vector<std::string> knowledge;

  /// The prompt actually sent: autoencoder mode appends " [MASK]".
  std::string shaped_prompt() const;
};

struct GenerationResult {
  std::string text;
  double confidence = 0.0;
  /// Set when the service returned no log-probs and confidence defaulted to 1.
  bool confidence_defaulted = false;
  nlohmann::json raw;
};

class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::string_view kind() const noexcept = 0;
  virtual GenerationResult next_step(const GenerationRequest& request) const = 0;
};

/// Replays the request's knowledge lines: the first one not yet in the
/// history, at confidence schedule[history size] (the last entry repeats; an
/// empty schedule means 1.0). Exhausted lists give ("", 0).
class KnowledgeFollower final : public Generator {
 public:
  explicit KnowledgeFollower(std::vector<double> schedule = {});

  std::string_view kind() const noexcept override { return "follower"; }
  GenerationResult next_step(const GenerationRequest& request) const override;

  const std::vector<double>& schedule() const noexcept { return schedule_; }

 private:
  std::vector<double> schedule_;
};

/// Canned responses keyed by fingerprint_hex(shaped prompt). A miss throws
/// FixtureMissError.
class ScriptedGenerator final : public Generator {
 public:
  struct Response {
    std::string text;
    double confidence = 1.0;
  };

  explicit ScriptedGenerator(std::unordered_map<std::string, Response> responses);
  /// Reads {"<fingerprint>": {"text": ..., "confidence": ...}, ...}.
  static ScriptedGenerator parse_json(std::istream& in);
  static ScriptedGenerator load(const std::filesystem::path& path);

  std::string_view kind() const noexcept override { return "scripted"; }
  GenerationResult next_step(const GenerationRequest& request) const override;

 private:
  std::unordered_map<std::string, Response> responses_;
};

struct RemoteGeneratorOptions {
  HttpOptions http;
  std::string model;
  int logprobs = 1;
};

/// Completion-service client. The first line or sentence of the completion
/// becomes the step; confidence is exp(mean token log-prob).
class RemoteGenerator final : public Generator {
 public:
  explicit RemoteGenerator(RemoteGeneratorOptions options);

  std::string_view kind() const noexcept override { return "remote"; }
  GenerationResult next_step(const GenerationRequest& request) const override;

  /// Payload for a request; exposed for tests.
  nlohmann::json request_body(const GenerationRequest& request) const;

 private:
  RemoteGeneratorOptions options_;
  JsonHttpClient client_;
};

/// Cuts a completion down to one step: first line, first sentence, any
/// "Step N:" label removed, surrounding whitespace and trailing periods
/// stripped.
std::string first_step_text(std::string_view completion);

/// exp(mean(logprobs)); nullopt when no finite values are present.
std::optional<double> confidence_from_logprobs(const std::vector<double>& logprobs);

}  // namespace nsplan
