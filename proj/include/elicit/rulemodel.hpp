#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "elicit/common.hpp"
#include "elicit/knowledge.hpp"
#include "elicit/textvec.hpp"

namespace elicit::rules {

// ---------------------------------------------------------------------------
// Closed-class word list
// ---------------------------------------------------------------------------

enum WordClass : std::uint32_t {
  kCopula = 1u << 0,
  kNegator = 1u << 1,
  kConjunction = 1u << 2,
  kArticle = 1u << 3,
  kDeterminer = 1u << 4,
  kPronoun = 1u << 5,
  kPreposition = 1u << 6,
  kAuxiliary = 1u << 7,
  kIntensifier = 1u << 8,
  kAdverb = 1u << 9,
};

/// Function words the pattern engine treats as grammar rather than content.
/// Parsed from the `category: tok tok ...` format of data/closed_class.txt.
class ClosedClassList {
 public:
  static ClosedClassList parse(std::string_view data);
  /// The list compiled into the library.
  static const ClosedClassList& builtin();

  const std::string& version() const { return version_; }
  std::uint32_t classes(std::string_view token) const;

  bool is_closed(std::string_view token) const { return classes(token) != 0; }
  bool is_content(std::string_view token) const { return !is_closed(token); }
  bool has(std::string_view token, WordClass c) const { return (classes(token) & c) != 0; }

  /// Copula or auxiliary contracted with "n't" (wasn't, don't).
  bool is_negated_contraction(std::string_view token) const;
  /// Pronoun fused with a copula (it's, they're): the subject is not a noun.
  bool is_pronoun_copula(std::string_view token) const;

 private:
  std::string version_;
  std::map<std::string, std::uint32_t, std::less<>> classes_;
};

// ---------------------------------------------------------------------------
// Pattern engine
// ---------------------------------------------------------------------------

enum class PatternKind : std::uint8_t { Copula, Adjacency };

std::string_view to_string(PatternKind k);

/// A "noun is adjective" occurrence found in text, before any label is applied.
struct PatternMatch {
  std::optional<std::string> noun;
  std::string adjective;
  bool negated = false;
  bool stacked_negation = false;
  PatternKind kind = PatternKind::Copula;
  std::size_t first_token = 0;  // inclusive token range covered by the match
  std::size_t last_token = 0;

  bool operator==(const PatternMatch&) const = default;
};

/// Copula: NOUN (is|was|are|were) [not|never|n't] [intensifiers] ADJ {and ADJ}.
/// Adjacency: ADJ NOUN, negated when a negator precedes it. A copula
/// complement directly followed by another content token is read as an
/// attributive phrase and left to the adjacency rule.
std::vector<PatternMatch> find_patterns(const textvec::TokenStream& tokens,
                                        const ClosedClassList& words = ClosedClassList::builtin());

struct PatternSignal {
  std::optional<std::string> noun;
  std::string adjective;
  bool negated = false;
  Polarity polarity = Polarity::Positive;  // label XOR negated
  PatternKind kind = PatternKind::Copula;
  std::size_t first_token = 0;
  std::size_t last_token = 0;

  bool operator==(const PatternSignal&) const = default;
};

PatternSignal to_signal(const PatternMatch& m, Polarity label);

/// Signals in `text`, with polarity relative to `label`. Stacked negators
/// produce a single flip and a message in `warnings`.
std::vector<PatternSignal> extract_signals(std::string_view text, Polarity label,
                                           std::vector<std::string>* warnings = nullptr);

// ---------------------------------------------------------------------------
// Rule models
// ---------------------------------------------------------------------------

/// Where a lexicon entry came from. `source` names a justification
/// ("justification:<condition>:<author>:<instance>") or a taxonomy
/// ("taxonomy:<author>"); `evidence` is the exact text the term was read from.
struct Provenance {
  std::string source;
  std::string evidence;
  bool low_confidence = false;

  auto operator<=>(const Provenance&) const = default;
};

struct LexiconEntry {
  Polarity polarity = Polarity::Positive;
  std::vector<Provenance> sources;

  bool operator==(const LexiconEntry&) const = default;
};

struct CompileStats {
  std::size_t justifications = 0;
  std::size_t uncovered = 0;       // justifications that produced no signal
  std::size_t low_confidence = 0;  // perturbations handled as full rewrites
  std::vector<std::string> conflicts;
  std::vector<std::string> skipped_pairs;

  bool operator==(const CompileStats&) const = default;
};

struct RuleModel {
  Condition condition = Condition::Bow;
  std::map<std::string, std::vector<Provenance>> nouns;
  std::map<std::string, LexiconEntry> adjectives;
  std::map<std::string, LexiconEntry> keywords;  // space-joined token phrases
  std::string source_hash;
  std::string closed_class_version;
  /// Count adjective hits whose noun is absent or unknown.
  bool adjective_only_matches = false;
  CompileStats stats;

  bool operator==(const RuleModel&) const = default;
};

using InstanceMap = std::map<std::string, knowledge::InstanceRecord>;

RuleModel compile_bow(std::span<const knowledge::Justification> justs, const InstanceMap& instances);
RuleModel compile_perturbation(std::span<const knowledge::Justification> justs,
                               const InstanceMap& instances);
RuleModel compile_simplification(std::span<const knowledge::Justification> justs,
                                 const InstanceMap& instances);
RuleModel compile_concept_bow(std::span<const knowledge::Taxonomy> taxonomies,
                              std::span<const knowledge::Justification> justs,
                              const InstanceMap& instances);
RuleModel compile_concept_annotation(std::span<const knowledge::Taxonomy> taxonomies,
                                     std::span<const knowledge::Justification> justs,
                                     const InstanceMap& instances);

/// Compiles every justification of `condition` in `repo`. Throws
/// InsufficientData when there are none.
RuleModel compile(const knowledge::KnowledgeRepository& repo, Condition condition);

struct Evidence {
  std::string term;  // keyword phrase, or the adjective for pattern matches
  std::optional<std::string> noun;
  bool negated = false;
  Polarity polarity = Polarity::Positive;

  bool operator==(const Evidence&) const = default;
};

struct Prediction {
  std::optional<Polarity> label;  // nullopt = abstain
  std::vector<Evidence> evidence;
  std::size_t positive_votes = 0;
  std::size_t negative_votes = 0;
};

/// Votes one per matched keyword occurrence or pattern match; the side with
/// strictly more votes wins, otherwise abstains.
Prediction classify(const RuleModel& model, std::string_view text);

/// Every lexicon entry must carry provenance that resolves to a justification
/// or taxonomy in `repo` and whose evidence text contains the entry's tokens.
/// Returns one message per failure; empty means the audit passed.
std::vector<std::string> audit_provenance(const RuleModel& model,
                                          const knowledge::KnowledgeRepository& repo);

nlohmann::json to_json(const RuleModel& model);
RuleModel model_from_json(const nlohmann::json& doc);
std::string serialize_model(const RuleModel& model);

}  // namespace elicit::rules
