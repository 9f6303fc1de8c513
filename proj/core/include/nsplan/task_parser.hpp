#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nsplan/knowledge_graph.hpp"

namespace nsplan {

enum class PosTag { kNoun, kVerb, kAdj, kDet, kPrep, kPron, kConj, kParticle, kOther };

std::string_view to_string(PosTag tag);

/// Content-word lexicon. Each word may carry several tags; the first listed
/// is its default reading.
class Lexicon {
 public:
  /// Reads `word<TAB>TAG` lines, TAG in {NOUN, VERB, ADJ, DET, PREP, PRON}.
  static Lexicon parse(std::istream& in);
  static Lexicon load(const std::filesystem::path& path);
  /// The lexicon shipped in core/data/lexicon.tsv.
  static const Lexicon& builtin();

  void add(std::string word, PosTag tag);
  /// Empty when the word is unknown.
  const std::vector<PosTag>& tags(std::string_view word) const;
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::unordered_map<std::string, std::vector<PosTag>> entries_;
};

struct TaggedToken {
  std::string surface;
  std::string lower;
  PosTag tag = PosTag::kOther;
};

enum class EntityKind { kNoun, kNounPhrase, kVerbPhrase };

std::string_view to_string(EntityKind kind);

struct Entity {
  std::string surface;
  NodeKey key;
  EntityKind kind = EntityKind::kNoun;

  friend bool operator==(const Entity&, const Entity&) = default;
};

struct EntitySet {
  std::string task_text;
  /// First-occurrence order; keys are unique.
  std::vector<Entity> entities;

  std::vector<NodeKey> keys() const;
  const Entity* find(std::string_view key) const;
};

/// Lowercase, strip punctuation, join words with single underscores. When a
/// graph is given and the key is absent from it but ends in "s", the key with
/// that one "s" removed is returned if the graph has it.
NodeKey normalize_key(std::string_view surface, const KnowledgeGraph* graph = nullptr);

/// Rule-based tagger and chunker over a lexicon.
///
/// Chunk grammar:
///   NP := DET? ADJ* NOUN+
///   VP := VERB PARTICLE? NP?
/// Single-noun NPs are reported as nouns, longer ones as noun phrases.
/// Determiners never reach a key.
class TaskParser {
 public:
  explicit TaskParser(const Lexicon& lexicon = Lexicon::builtin());

  std::vector<TaggedToken> tag(std::string_view text) const;
  EntitySet parse_entities(std::string_view task_text, const KnowledgeGraph* graph = nullptr) const;

 private:
  const Lexicon* lexicon_;
};

}  // namespace nsplan
