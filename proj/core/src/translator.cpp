#include "nsplan/translator.hpp"

#include <fstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "nsplan/errors.hpp"

namespace nsplan {

namespace {

std::string render_pattern(const std::string& pattern, const std::string& object) {
  std::string out = pattern;
  const std::string placeholder = "{object}";
  auto pos = out.find(placeholder);
  if (pos == std::string::npos) return out + " " + object;
  out.replace(pos, placeholder.size(), object);
  return out;
}

std::vector<std::string> string_array(const nlohmann::json& doc, const char* field) {
  if (!doc.contains(field) || !doc[field].is_array()) {
    throw ConfigError(field, "expected an array of strings");
  }
  std::vector<std::string> out;
  for (const auto& v : doc[field]) {
    if (!v.is_string()) throw ConfigError(field, "expected an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

AdmissibleSet AdmissibleSet::from_steps(std::vector<AdmissibleStep> steps) {
  AdmissibleSet set;
  std::unordered_set<std::string> seen;
  for (auto& s : steps) {
    if (s.text.empty() || !seen.insert(s.text).second) continue;
    set.steps_.push_back(std::move(s));
  }
  return set;
}

AdmissibleSet AdmissibleSet::from_texts(const std::vector<std::string>& texts) {
  std::vector<AdmissibleStep> steps;
  steps.reserve(texts.size());
  for (const auto& t : texts) steps.push_back({t, std::nullopt});
  return from_steps(std::move(steps));
}

AdmissibleSet AdmissibleSet::parse_json(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("admissible", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("admissible", "expected a JSON object");
  AdmissibleSet set;
  if (doc.contains("steps")) {
    set = from_texts(string_array(doc, "steps"));
  } else {
    std::map<std::string, std::string> templates;
    if (doc.contains("templates")) {
      if (!doc["templates"].is_object()) throw ConfigError("templates", "expected an object");
      for (const auto& [action, pattern] : doc["templates"].items()) {
        if (!pattern.is_string()) throw ConfigError("templates", "pattern for '" + action + "' is not a string");
        templates[action] = pattern.get<std::string>();
      }
    }
    set = build_admissible_set(string_array(doc, "actions"), string_array(doc, "objects"), templates);
  }
  if (set.empty()) throw ConfigError("admissible", "admissible set is empty");
  return set;
}

AdmissibleSet AdmissibleSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("admissible", "cannot open " + path.string());
  return parse_json(in);
}

bool AdmissibleSet::contains(std::string_view text) const {
  for (const auto& s : steps_) {
    if (s.text == text) return true;
  }
  return false;
}

void AdmissibleSet::warm(const EmbeddingProvider& provider) {
  std::vector<std::string> texts;
  texts.reserve(steps_.size());
  for (const auto& s : steps_) texts.push_back(s.text);
  vectors_ = provider.embed_batch(texts);
  warmed_by_ = &provider;
}

AdmissibleSet build_admissible_set(const std::vector<std::string>& actions, const std::vector<std::string>& objects,
                                   const std::map<std::string, std::string>& templates) {
  std::vector<AdmissibleStep> steps;
  for (const auto& action : actions) {
    auto it = templates.find(action);
    const std::string pattern = it != templates.end() ? it->second : action + " {object}";
    for (const auto& object : objects) {
      steps.push_back({render_pattern(pattern, object), StructuredStep{action, object, 1}});
    }
  }
  auto set = AdmissibleSet::from_steps(std::move(steps));
  if (set.empty()) throw ContractError("admissible set is empty (no actions or no objects)");
  return set;
}

Translation translate(std::string_view text, const AdmissibleSet& set, const EmbeddingProvider& provider) {
  if (set.empty()) throw ContractError("translate: admissible set is empty");
  const Vector query = provider.embed(text);
  const bool cached = set.warmed_for(provider);
  const auto& steps = set.steps();
  std::size_t best = 0;
  double best_score = 0.0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    double score = cosine(query, cached ? set.vectors()[i] : provider.embed(steps[i].text));
    if (i == 0 || score > best_score || (score == best_score && steps[i].text < steps[best].text)) {
      best = i;
      best_score = score;
    }
  }
  return {steps[best], best_score};
}

PromptTranslation translate_prompt_traced(const ProceduralPrompt& prompt, const AdmissibleSet& set,
                                          const EmbeddingProvider& provider) {
  PromptTranslation out;
  for (std::size_t i = 0; i < prompt.lines.size(); ++i) {
    auto t = translate(prompt.lines[i], set, provider);
    if (!out.prompt.lines.empty() && out.prompt.lines.back() == t.step.text) continue;
    // Non-adjacent repeats are kept, so bypass ProceduralPrompt::add.
    out.prompt.lines.push_back(std::move(t.step.text));
    out.source_index.push_back(i);
    out.confidence.push_back(t.confidence);
  }
  return out;
}

ProceduralPrompt translate_prompt(const ProceduralPrompt& prompt, const AdmissibleSet& set,
                                  const EmbeddingProvider& provider) {
  return translate_prompt_traced(prompt, set, provider).prompt;
}

}  // namespace nsplan
