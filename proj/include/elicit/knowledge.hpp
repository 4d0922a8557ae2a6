#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "elicit/common.hpp"
#include "elicit/corpus.hpp"

namespace elicit::knowledge {

inline constexpr int kRepositorySchemaVersion = 1;

// ---------------------------------------------------------------------------
// Taxonomy
// ---------------------------------------------------------------------------

struct Topic {
  std::string name;
  std::vector<std::string> descriptions;

  bool operator==(const Topic&) const = default;
};

/// One expert's topic -> descriptions hierarchy.
struct Taxonomy {
  std::string author;
  std::vector<Topic> topics;
  std::string created_at;  // supplied by the client; may be empty

  const Topic* find_topic(std::string_view name) const;  // case-insensitive
  bool has_pair(std::string_view topic, std::string_view description) const;

  bool operator==(const Taxonomy&) const = default;
};

/// Topic names unique (case-insensitive), descriptions unique within a topic,
/// at least one topic, no blank names.
std::vector<Violation> validate_taxonomy(const Taxonomy& t);

// ---------------------------------------------------------------------------
// Justifications
// ---------------------------------------------------------------------------

/// Byte range [start, end) into an instance's UTF-8 text.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  auto operator<=>(const Span&) const = default;
};

struct BagOfWords {
  std::vector<Span> spans;
  bool operator==(const BagOfWords&) const = default;
};

struct Perturbation {
  std::string perturbed_text;
  bool operator==(const Perturbation&) const = default;
};

struct Simplification {
  std::string simplified_text;
  bool operator==(const Simplification&) const = default;
};

struct ConceptHighlight {
  std::string topic;
  std::string description;
  std::vector<Span> spans;
  bool operator==(const ConceptHighlight&) const = default;
};

struct ConceptBagOfWords {
  std::vector<ConceptHighlight> items;
  bool operator==(const ConceptBagOfWords&) const = default;
};

struct ConceptRoleHighlight {
  std::string topic;
  std::string description;
  std::vector<Span> topic_spans;
  std::vector<Span> description_spans;
  bool operator==(const ConceptRoleHighlight&) const = default;
};

struct ConceptAnnotation {
  std::vector<ConceptRoleHighlight> items;
  bool operator==(const ConceptAnnotation&) const = default;
};

// Alternative order matches Condition.
using JustificationBody =
    std::variant<BagOfWords, Perturbation, Simplification, ConceptBagOfWords, ConceptAnnotation>;

struct Justification {
  std::string instance_id;
  Polarity label = Polarity::Positive;
  std::string author;
  JustificationBody body;

  Condition condition() const { return static_cast<Condition>(body.index()); }
  bool operator==(const Justification&) const = default;
};

/// Outcome of validation: every violation found, plus non-fatal warnings.
struct ValidationResult {
  std::vector<Violation> violations;
  std::vector<std::string> warnings;

  bool ok() const { return violations.empty(); }
};

// ---------------------------------------------------------------------------
// Repository
// ---------------------------------------------------------------------------

/// The text a justification is checked against.
struct InstanceRecord {
  std::string id;
  std::string text;
  Polarity label = Polarity::Positive;

  std::string content_hash() const;
  bool operator==(const InstanceRecord&) const = default;
};

struct StoredJustification {
  Justification justification;
  std::uint64_t revision = 0;  // repository revision that accepted it
  bool operator==(const StoredJustification&) const = default;
};

struct StoredTaxonomy {
  Taxonomy taxonomy;
  std::uint64_t revision = 0;
  bool operator==(const StoredTaxonomy&) const = default;
};

/// Knowledge repository: the instances shown to experts, their taxonomies and
/// justifications. Mutations validate first, bump the revision and keep
/// superseded records in history.
class KnowledgeRepository {
 public:
  KnowledgeRepository() = default;
  explicit KnowledgeRepository(std::string corpus_hash) : corpus_hash_(std::move(corpus_hash)) {}

  /// Repository over the given corpus instances (typically the sample).
  static KnowledgeRepository for_instances(const corpus::Corpus& corpus,
                                           std::span<const std::string> ids);

  void add_instance(InstanceRecord record);
  const InstanceRecord* find_instance(std::string_view id) const;
  const std::map<std::string, InstanceRecord>& instances() const { return instances_; }

  /// Taxonomy that concept justifications by `author` are checked against:
  /// the author's own if present, otherwise the first one set.
  const Taxonomy* taxonomy_for(std::string_view author) const;
  const std::vector<StoredTaxonomy>& taxonomies() const { return taxonomies_; }
  std::vector<Taxonomy> taxonomy_list() const;

  /// Throws MissingInstance when the instance is unknown.
  ValidationResult validate(const Justification& j) const;

  /// Throws ValidationFailed (with violations) when `j` is invalid. A record
  /// with the same (author, instance, condition) replaces the current one.
  ValidationResult add_justification(Justification j);

  /// Throws ValidationFailed when the taxonomy breaks its invariants. One
  /// taxonomy per author; a resubmission replaces it.
  void set_taxonomy(Taxonomy t);

  const std::vector<StoredJustification>& justifications() const { return justifications_; }
  std::vector<Justification> by_condition(Condition c) const;
  std::size_t size() const { return justifications_.size(); }

  const std::vector<StoredJustification>& justification_history() const { return history_; }
  const std::vector<StoredTaxonomy>& taxonomy_history() const { return taxonomy_history_; }

  std::uint64_t revision() const { return revision_; }
  const std::string& corpus_hash() const { return corpus_hash_; }

  bool operator==(const KnowledgeRepository&) const = default;

 private:
  friend KnowledgeRepository repository_from_json(const nlohmann::json& doc);

  std::string corpus_hash_;
  std::uint64_t revision_ = 0;
  std::map<std::string, InstanceRecord> instances_;
  std::vector<StoredTaxonomy> taxonomies_;
  std::vector<StoredTaxonomy> taxonomy_history_;
  std::vector<StoredJustification> justifications_;
  std::vector<StoredJustification> history_;
};

/// Standalone form of KnowledgeRepository::validate.
ValidationResult validate_justification(const KnowledgeRepository& repo, const Justification& j);

// ---------------------------------------------------------------------------
// Agreement and coverage
// ---------------------------------------------------------------------------

/// items x raters; each cell is a category name.
struct RatingMatrix {
  std::vector<std::vector<std::string>> ratings;
};

/// Fleiss' kappa, (P - Pe) / (1 - Pe). When Pe == 1 (a single category
/// everywhere) the result is 1.0.
double fleiss_kappa(const RatingMatrix& m);

/// Fraction of instances a judge could place in one of t's topics.
/// Throws InvalidAssignment for a topic t does not contain or an empty list.
double taxonomy_coverage(const Taxonomy& t,
                         std::span<const std::optional<std::string>> assignments);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

nlohmann::json to_json(const Span& s);
nlohmann::json to_json(const Taxonomy& t);
nlohmann::json to_json(const Justification& j);
Span span_from_json(const nlohmann::json& j);
Taxonomy taxonomy_from_json(const nlohmann::json& j);
Justification justification_from_json(const nlohmann::json& j);

nlohmann::json to_json(const KnowledgeRepository& repo);
/// Verifies schema version and integrity hashes.
KnowledgeRepository repository_from_json(const nlohmann::json& doc);

std::string export_repository(const KnowledgeRepository& repo);
/// Throws VersionedFormat for a schema version this build does not read and
/// CorruptFile when an instance hash or the document hash does not match.
KnowledgeRepository import_repository(std::string_view text);

/// Hash identifying repository content; used as model provenance.
std::string content_hash(const KnowledgeRepository& repo);

}  // namespace elicit::knowledge
