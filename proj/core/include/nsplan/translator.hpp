#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nsplan/embedding.hpp"
#include "nsplan/symbolic_executor.hpp"

namespace nsplan {

struct StructuredStep {
  std::string action;
  std::string object;
  int instance = 1;

  friend bool operator==(const StructuredStep&, const StructuredStep&) = default;
};

struct AdmissibleStep {
  std::string text;
  std::optional<StructuredStep> structured;

  friend bool operator==(const AdmissibleStep&, const AdmissibleStep&) = default;
};

class AdmissibleSet {
 public:
  AdmissibleSet() = default;

  /// Free-text steps (duplicates and empty strings are dropped).
  static AdmissibleSet from_texts(const std::vector<std::string>& texts);
  static AdmissibleSet from_steps(std::vector<AdmissibleStep> steps);

  /// Reads {"actions", "objects", "templates"} or {"steps"}.
  static AdmissibleSet parse_json(std::istream& in);
  static AdmissibleSet load(const std::filesystem::path& path);

  const std::vector<AdmissibleStep>& steps() const noexcept { return steps_; }
  std::size_t size() const noexcept { return steps_.size(); }
  bool empty() const noexcept { return steps_.empty(); }
  bool contains(std::string_view text) const;

  /// Embeds every step once. Later translations reuse the cache as long as
  /// they are given the same provider.
  void warm(const EmbeddingProvider& provider);
  bool warmed_for(const EmbeddingProvider& provider) const noexcept { return warmed_by_ == &provider; }
  /// Cached vectors, parallel to steps(); empty until warm().
  const std::vector<Vector>& vectors() const noexcept { return vectors_; }

 private:
  std::vector<AdmissibleStep> steps_;
  std::vector<Vector> vectors_;
  const EmbeddingProvider* warmed_by_ = nullptr;
};

/// Cartesian product of actions and objects rendered through per-action
/// patterns ("{object}" placeholder; default "<action> {object}").
/// Throws ContractError when the product is empty.
AdmissibleSet build_admissible_set(const std::vector<std::string>& actions, const std::vector<std::string>& objects,
                                   const std::map<std::string, std::string>& templates = {});

struct Translation {
  AdmissibleStep step;
  double confidence = 0.0;
};

/// Nearest admissible step by cosine; ties go to the lexicographically
/// smaller text. Throws ContractError on an empty set.
Translation translate(std::string_view text, const AdmissibleSet& set, const EmbeddingProvider& provider);

struct PromptTranslation {
  ProceduralPrompt prompt;
  /// For each output line, the index of the source line it came from.
  std::vector<std::size_t> source_index;
  std::vector<double> confidence;
};

/// Translates line by line, keeping order and collapsing consecutive
/// duplicates.
PromptTranslation translate_prompt_traced(const ProceduralPrompt& prompt, const AdmissibleSet& set,
                                          const EmbeddingProvider& provider);
ProceduralPrompt translate_prompt(const ProceduralPrompt& prompt, const AdmissibleSet& set,
                                  const EmbeddingProvider& provider);

}  // namespace nsplan
