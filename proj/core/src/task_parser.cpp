#include "nsplan/task_parser.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "nsplan/embedded_data.hpp"
#include "nsplan/errors.hpp"
#include "nsplan/text.hpp"

namespace nsplan {

namespace {

// Closed-class words are part of the tagger, not the lexicon file.
const std::unordered_map<std::string_view, PosTag>& closed_class() {
  static const std::unordered_map<std::string_view, PosTag> kWords = [] {
    std::unordered_map<std::string_view, PosTag> m;
    for (auto w : {"a", "an", "the", "this", "that", "these", "those", "my", "your", "his", "her", "its", "our",
                   "their", "some", "any", "each", "every", "no", "all", "both", "another", "other"}) {
      m.emplace(w, PosTag::kDet);
    }
    for (auto w : {"in", "on", "at", "to", "from", "into", "onto", "with", "without", "for", "of", "by", "about",
                   "under", "over", "near", "behind", "between", "through", "up", "down", "off", "out", "around",
                   "after", "before", "during", "inside", "outside", "across", "along", "toward", "towards",
                   "beside", "above", "below", "away", "upon", "within"}) {
      m.emplace(w, PosTag::kPrep);
    }
    for (auto w : {"i", "you", "he", "she", "it", "we", "they", "me", "him", "us", "them", "myself", "yourself",
                   "himself", "herself", "itself", "ourselves", "themselves", "someone", "something", "everything",
                   "anything", "nothing", "everyone"}) {
      m.emplace(w, PosTag::kPron);
    }
    for (auto w : {"and", "or", "but", "then", "so", "while", "if", "when"}) m.emplace(w, PosTag::kConj);
    for (auto w : {"not", "please", "how", "what", "where", "why", "who", "very", "too", "also", "just", "is", "are",
                   "be", "was", "were", "do", "does", "did"}) {
      m.emplace(w, PosTag::kOther);
    }
    return m;
  }();
  return kWords;
}

// Prepositions that bind to a preceding verb ("turn off", "take out").
bool is_particle_word(std::string_view w) {
  return w == "on" || w == "off" || w == "out" || w == "up" || w == "down" || w == "away";
}

bool ends_with(std::string_view word, std::string_view suffix) {
  return word.size() > suffix.size() && word.substr(word.size() - suffix.size()) == suffix;
}

PosTag parse_tag(std::string_view name, std::size_t line_no) {
  if (name == "NOUN") return PosTag::kNoun;
  if (name == "VERB") return PosTag::kVerb;
  if (name == "ADJ") return PosTag::kAdj;
  if (name == "DET") return PosTag::kDet;
  if (name == "PREP") return PosTag::kPrep;
  if (name == "PRON") return PosTag::kPron;
  throw ParseError("unknown tag '" + std::string(name) + "'", line_no, 0);
}

std::vector<std::string> surface_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      current.push_back(c);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

bool contains(const std::vector<PosTag>& tags, PosTag tag) {
  return std::find(tags.begin(), tags.end(), tag) != tags.end();
}

}  // namespace

std::string_view to_string(PosTag tag) {
  switch (tag) {
    case PosTag::kNoun: return "NOUN";
    case PosTag::kVerb: return "VERB";
    case PosTag::kAdj: return "ADJ";
    case PosTag::kDet: return "DET";
    case PosTag::kPrep: return "PREP";
    case PosTag::kPron: return "PRON";
    case PosTag::kConj: return "CONJ";
    case PosTag::kParticle: return "PRT";
    case PosTag::kOther: return "OTHER";
  }
  return "OTHER";
}

std::string_view to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::kNoun: return "Noun";
    case EntityKind::kNounPhrase: return "NounPhrase";
    case EntityKind::kVerbPhrase: return "VerbPhrase";
  }
  return "Noun";
}

Lexicon Lexicon::parse(std::istream& in) {
  Lexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError("expected word<TAB>TAG", line_no, 0);
    auto word = to_lower(trim(std::string_view(line).substr(0, tab)));
    if (word.empty()) throw ParseError("empty word", line_no, 1);
    lex.add(std::move(word), parse_tag(trim(std::string_view(line).substr(tab + 1)), line_no));
  }
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lexicon file " + path.string());
  return parse(in);
}

const Lexicon& Lexicon::builtin() {
  static const Lexicon kLexicon = [] {
    std::istringstream in{std::string(embedded::lexicon_tsv())};
    return parse(in);
  }();
  return kLexicon;
}

void Lexicon::add(std::string word, PosTag tag) {
  auto& tags = entries_[std::move(word)];
  if (!contains(tags, tag)) tags.push_back(tag);
}

const std::vector<PosTag>& Lexicon::tags(std::string_view word) const {
  static const std::vector<PosTag> kNone;
  auto it = entries_.find(std::string(word));
  return it == entries_.end() ? kNone : it->second;
}

std::vector<NodeKey> EntitySet::keys() const {
  std::vector<NodeKey> out;
  out.reserve(entities.size());
  for (const auto& e : entities) out.push_back(e.key);
  return out;
}

const Entity* EntitySet::find(std::string_view key) const {
  for (const auto& e : entities) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

NodeKey normalize_key(std::string_view surface, const KnowledgeGraph* graph) {
  std::string key;
  bool pending_sep = false;
  for (char c : surface) {
    auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc)) {
      if (pending_sep && !key.empty()) key.push_back('_');
      pending_sep = false;
      key.push_back(static_cast<char>(std::tolower(uc)));
    } else if (std::isspace(uc) || c == '_') {
      pending_sep = true;
    }
    // Other punctuation is dropped without splitting the word.
  }
  if (graph != nullptr && !key.empty() && key.back() == 's' && !graph->contains_node(key)) {
    auto singular = key.substr(0, key.size() - 1);
    if (!singular.empty() && graph->contains_node(singular)) return singular;
  }
  return key;
}

TaskParser::TaskParser(const Lexicon& lexicon) : lexicon_(&lexicon) {}

std::vector<TaggedToken> TaskParser::tag(std::string_view text) const {
  std::vector<TaggedToken> out;
  for (auto& surface : surface_tokens(text)) {
    TaggedToken token;
    token.lower = to_lower(surface);
    token.surface = std::move(surface);
    out.push_back(std::move(token));
  }

  const auto& closed = closed_class();
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& token = out[i];
    const std::string& w = token.lower;
    const PosTag* prev = i > 0 ? &out[i - 1].tag : nullptr;

    if (auto it = closed.find(w); it != closed.end()) {
      token.tag = it->second;
      if (token.tag == PosTag::kPrep && prev && (*prev == PosTag::kVerb) && is_particle_word(w)) {
        token.tag = PosTag::kParticle;
      }
      continue;
    }
    if (std::all_of(w.begin(), w.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      token.tag = PosTag::kOther;
      continue;
    }

    const auto& candidates = lexicon_->tags(w);
    if (candidates.empty()) {
      if (ends_with(w, "ing") || ends_with(w, "ed")) {
        token.tag = PosTag::kVerb;
      } else {
        token.tag = PosTag::kNoun;  // -tion, -ness and unknown words
      }
      continue;
    }
    if (candidates.size() == 1) {
      token.tag = candidates.front();
      continue;
    }

    // Ambiguous reading: pick by left context.
    bool clause_start = !prev || *prev == PosTag::kConj || *prev == PosTag::kOther;
    if (clause_start && contains(candidates, PosTag::kVerb)) {
      token.tag = PosTag::kVerb;
      continue;
    }
    PosTag chosen = candidates.front();
    if (prev && (*prev == PosTag::kVerb || *prev == PosTag::kParticle || *prev == PosTag::kDet ||
                 *prev == PosTag::kAdj || *prev == PosTag::kPrep || *prev == PosTag::kNoun)) {
      for (PosTag t : candidates) {
        if (t != PosTag::kVerb) {
          chosen = t;
          break;
        }
      }
    }
    token.tag = chosen;
  }
  return out;
}

EntitySet TaskParser::parse_entities(std::string_view task_text, const KnowledgeGraph* graph) const {
  EntitySet set;
  set.task_text = std::string(task_text);
  auto tokens = tag(task_text);

  struct Span {
    std::size_t begin;
    std::size_t end;  // exclusive; content tokens only (no determiner)
  };

  // Maximal NP starting at i: DET? ADJ* NOUN+. Returns content span or nullopt.
  auto match_np = [&](std::size_t i) -> std::optional<Span> {
    std::size_t j = i;
    if (j < tokens.size() && tokens[j].tag == PosTag::kDet) ++j;
    std::size_t content = j;
    while (j < tokens.size() && tokens[j].tag == PosTag::kAdj) ++j;
    std::size_t nouns = j;
    while (j < tokens.size() && tokens[j].tag == PosTag::kNoun) ++j;
    if (j == nouns) return std::nullopt;
    return Span{content, j};
  };

  auto join = [&](std::size_t begin, std::size_t end) {
    std::string s;
    for (std::size_t k = begin; k < end; ++k) {
      if (!s.empty()) s += ' ';
      s += tokens[k].surface;
    }
    return s;
  };

  struct Candidate {
    std::size_t start;
    Entity entity;
  };
  std::vector<Candidate> found;

  auto add = [&](std::size_t start, std::string surface, EntityKind kind) {
    auto key = normalize_key(surface, graph);
    if (key.empty()) return;
    found.push_back({start, Entity{std::move(surface), std::move(key), kind}});
  };

  std::size_t i = 0;
  while (i < tokens.size()) {
    if (tokens[i].tag == PosTag::kVerb) {
      std::size_t j = i + 1;
      if (j < tokens.size() && tokens[j].tag == PosTag::kParticle) ++j;
      std::size_t verb_end = j;
      auto np = match_np(j);
      std::string surface = join(i, verb_end);
      if (np) {
        surface += ' ' + join(np->begin, np->end);
      }
      add(i, std::move(surface), EntityKind::kVerbPhrase);
      i = verb_end;  // the NP itself is picked up on the next iteration
      continue;
    }
    if (auto np = match_np(i)) {
      bool single = np->end - np->begin == 1;
      add(np->begin, join(np->begin, np->end), single ? EntityKind::kNoun : EntityKind::kNounPhrase);
      i = np->end;
      continue;
    }
    ++i;
  }

  std::stable_sort(found.begin(), found.end(),
                   [](const Candidate& a, const Candidate& b) { return a.start < b.start; });
  std::unordered_set<std::string> seen;
  for (auto& c : found) {
    if (seen.insert(c.entity.key).second) set.entities.push_back(std::move(c.entity));
  }
  return set;
}

}  // namespace nsplan
