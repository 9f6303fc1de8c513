#include "nsplan/generator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <regex>

#include "nsplan/errors.hpp"
#include "nsplan/text.hpp"

namespace nsplan {

std::string GenerationRequest::shaped_prompt() const {
  if (mode == GenerationMode::kAutoencoder) return prompt + " " + std::string(kMaskToken);
  return prompt;
}

KnowledgeFollower::KnowledgeFollower(std::vector<double> schedule) : schedule_(std::move(schedule)) {}

GenerationResult KnowledgeFollower::next_step(const GenerationRequest& request) const {
  GenerationResult result;
  const auto& history = request.history;
  for (const auto& line : request.knowledge) {
    if (std::find(history.begin(), history.end(), line) != history.end()) continue;
    result.text = line;
    if (schedule_.empty()) {
      result.confidence = 1.0;
    } else {
      result.confidence = schedule_[std::min(history.size(), schedule_.size() - 1)];
    }
    break;
  }
  result.raw = {{"text", result.text}, {"confidence", result.confidence}};
  return result;
}

ScriptedGenerator::ScriptedGenerator(std::unordered_map<std::string, Response> responses)
    : responses_(std::move(responses)) {}

ScriptedGenerator ScriptedGenerator::parse_json(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("generator", std::string("scripted responses: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("generator", "scripted responses must be a JSON object");
  std::unordered_map<std::string, Response> responses;
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_object() || !value.contains("text") || !value["text"].is_string()) {
      throw ConfigError("generator", "scripted response '" + key + "' needs a string \"text\"");
    }
    responses[key] = Response{value["text"].get<std::string>(), value.value("confidence", 1.0)};
  }
  return ScriptedGenerator(std::move(responses));
}

ScriptedGenerator ScriptedGenerator::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("generator", "cannot open scripted responses " + path.string());
  return parse_json(in);
}

GenerationResult ScriptedGenerator::next_step(const GenerationRequest& request) const {
  auto fp = fingerprint_hex(request.shaped_prompt());
  auto it = responses_.find(fp);
  if (it == responses_.end()) throw FixtureMissError(fp);
  GenerationResult result;
  result.text = first_step_text(it->second.text);
  result.confidence = it->second.confidence;
  result.raw = {{"fingerprint", fp}, {"text", it->second.text}, {"confidence", it->second.confidence}};
  return result;
}

RemoteGenerator::RemoteGenerator(RemoteGeneratorOptions options)
    : options_(std::move(options)), client_(options_.http) {}

nlohmann::json RemoteGenerator::request_body(const GenerationRequest& request) const {
  return {
      {"model", options_.model},
      {"prompt", request.shaped_prompt()},
      {"max_tokens", request.max_tokens},
      {"temperature", request.temperature},
      {"logprobs", options_.logprobs},
      {"stop", request.stop},
  };
}

GenerationResult RemoteGenerator::next_step(const GenerationRequest& request) const {
  if (request.prompt.empty()) throw ContractError("next_step: prompt is empty");
  auto response = client_.post(request_body(request));
  auto protocol_error = [&](const std::string& what) {
    return TransportError(client_.url(), 200, "malformed completion response: " + what);
  };
  if (!response.is_object() || !response.contains("choices") || !response["choices"].is_array() ||
      response["choices"].empty()) {
    throw protocol_error("missing \"choices\"");
  }
  const auto& choice = response["choices"][0];
  if (!choice.is_object() || !choice.contains("text") || !choice["text"].is_string()) {
    throw protocol_error("choice without \"text\"");
  }

  GenerationResult result;
  result.text = first_step_text(choice["text"].get<std::string>());
  result.raw = response;

  std::vector<double> logprobs;
  if (choice.contains("logprobs") && choice["logprobs"].is_object() &&
      choice["logprobs"].contains("token_logprobs") && choice["logprobs"]["token_logprobs"].is_array()) {
    for (const auto& lp : choice["logprobs"]["token_logprobs"]) {
      if (lp.is_number()) logprobs.push_back(lp.get<double>());
    }
  }
  if (auto c = confidence_from_logprobs(logprobs)) {
    result.confidence = *c;
  } else {
    result.confidence = 1.0;
    result.confidence_defaulted = true;
  }
  return result;
}

std::string first_step_text(std::string_view completion) {
  std::string text = trim(completion);
  static const std::regex kLabel(R"(^\s*Step\s*\d*\s*[:.]\s*)", std::regex::icase);
  text = std::regex_replace(text, kLabel, "", std::regex_constants::format_first_only);
  if (auto nl = text.find('\n'); nl != std::string::npos) text.resize(nl);
  // Sentence boundary: a period followed by whitespace.
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    if (text[i] == '.' && std::isspace(static_cast<unsigned char>(text[i + 1]))) {
      text.resize(i);
      break;
    }
  }
  // A second "Step" marker inside one line also ends the step.
  if (auto pos = text.find(" Step "); pos != std::string::npos) text.resize(pos);
  text = trim(text);
  while (!text.empty() && text.back() == '.') text.pop_back();
  return trim(text);
}

std::optional<double> confidence_from_logprobs(const std::vector<double>& logprobs) {
  double sum = 0.0;
  std::size_t n = 0;
  for (double lp : logprobs) {
    if (!std::isfinite(lp)) continue;
    sum += lp;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return std::exp(sum / static_cast<double>(n));
}

}  // namespace nsplan
