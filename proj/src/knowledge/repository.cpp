#include <algorithm>

#include "elicit/knowledge.hpp"

namespace elicit::knowledge {

namespace {

bool is_continuation_byte(unsigned char c) { return (c & 0xC0) == 0x80; }

bool on_char_boundary(std::string_view text, std::size_t offset) {
  return offset == text.size() ||
         (offset < text.size() && !is_continuation_byte(static_cast<unsigned char>(text[offset])));
}

void check_span(const Span& s, std::string_view text, const std::string& field,
                std::vector<Violation>& out) {
  if (s.start >= s.end) {
    out.push_back({"span_empty",
                   "span [" + std::to_string(s.start) + "," + std::to_string(s.end) + ") is empty",
                   field});
    return;
  }
  if (s.end > text.size()) {
    out.push_back({"span_out_of_bounds",
                   "span [" + std::to_string(s.start) + "," + std::to_string(s.end) +
                       ") exceeds text length " + std::to_string(text.size()),
                   field});
    return;
  }
  if (!on_char_boundary(text, s.start) || !on_char_boundary(text, s.end)) {
    out.push_back({"span_not_char_boundary",
                   "span [" + std::to_string(s.start) + "," + std::to_string(s.end) +
                       ") splits a UTF-8 character",
                   field});
  }
}

void check_spans(const std::vector<Span>& spans, std::string_view text, const std::string& field,
                 bool require_nonempty, std::vector<Violation>& out) {
  if (require_nonempty && spans.empty()) {
    out.push_back({"empty_spans", "no text was highlighted", field});
  }
  for (std::size_t i = 0; i < spans.size(); ++i) {
    check_span(spans[i], text, field + "[" + std::to_string(i) + "]", out);
  }
}

void check_concept(const Taxonomy* taxonomy, const std::string& topic,
                   const std::string& description, const std::string& field,
                   std::vector<Violation>& out) {
  if (!taxonomy) {
    out.push_back({"no_taxonomy", "no taxonomy is available for concept justifications", field});
  } else if (!taxonomy->has_pair(topic, description)) {
    out.push_back({"unknown_concept",
                   "unknown concept (" + topic + ", " + description + ")", field});
  }
}

}  // namespace

std::string InstanceRecord::content_hash() const {
  return sha256_hex(id + '\n' + std::string(to_string(label)) + '\n' + text);
}

KnowledgeRepository KnowledgeRepository::for_instances(const corpus::Corpus& corpus,
                                                       std::span<const std::string> ids) {
  KnowledgeRepository repo(sha256_hex(corpus::serialize(corpus)));
  for (const auto& id : ids) {
    const auto& inst = corpus.at(id);
    repo.add_instance({inst.id, inst.text, inst.label});
  }
  return repo;
}

void KnowledgeRepository::add_instance(InstanceRecord record) {
  std::string id = record.id;
  instances_.insert_or_assign(std::move(id), std::move(record));
}

const InstanceRecord* KnowledgeRepository::find_instance(std::string_view id) const {
  auto it = instances_.find(std::string(id));
  return it == instances_.end() ? nullptr : &it->second;
}

const Taxonomy* KnowledgeRepository::taxonomy_for(std::string_view author) const {
  for (const auto& st : taxonomies_) {
    if (st.taxonomy.author == author) return &st.taxonomy;
  }
  return taxonomies_.empty() ? nullptr : &taxonomies_.front().taxonomy;
}

std::vector<Taxonomy> KnowledgeRepository::taxonomy_list() const {
  std::vector<Taxonomy> out;
  for (const auto& st : taxonomies_) out.push_back(st.taxonomy);
  return out;
}

ValidationResult KnowledgeRepository::validate(const Justification& j) const {
  const InstanceRecord* inst = find_instance(j.instance_id);
  if (!inst) {
    throw Error(ErrorCode::MissingInstance, "no instance with id '" + j.instance_id + "'");
  }
  ValidationResult result;
  auto& out = result.violations;
  if (trim(j.author).empty()) out.push_back({"missing_author", "justification has no author", "author"});
  if (j.label != inst->label) {
    out.push_back({"label_mismatch",
                   "asserted label " + std::string(to_string(j.label)) + " differs from instance label " +
                       std::string(to_string(inst->label)),
                   "label"});
  }
  const std::string_view text = inst->text;

  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, BagOfWords>) {
          check_spans(body.spans, text, "spans", true, out);
        } else if constexpr (std::is_same_v<T, Perturbation>) {
          if (trim(body.perturbed_text).empty()) {
            out.push_back({"empty_text", "perturbed text is empty", "perturbed_text"});
          } else if (body.perturbed_text == text) {
            out.push_back({"perturbation_unchanged", "perturbation unchanged: text equals the original",
                           "perturbed_text"});
          }
        } else if constexpr (std::is_same_v<T, Simplification>) {
          if (trim(body.simplified_text).empty()) {
            out.push_back({"empty_text", "simplified text is empty", "simplified_text"});
          } else if (body.simplified_text.size() > text.size()) {
            result.warnings.push_back("simplification is longer than the original (" +
                                      std::to_string(body.simplified_text.size()) + " > " +
                                      std::to_string(text.size()) + " bytes)");
          }
        } else if constexpr (std::is_same_v<T, ConceptBagOfWords>) {
          if (body.items.empty()) out.push_back({"empty_items", "no concepts were highlighted", "items"});
          const Taxonomy* tax = taxonomy_for(j.author);
          for (std::size_t i = 0; i < body.items.size(); ++i) {
            const auto& item = body.items[i];
            const std::string field = "items[" + std::to_string(i) + "]";
            check_concept(tax, item.topic, item.description, field, out);
            check_spans(item.spans, text, field + ".spans", true, out);
          }
        } else if constexpr (std::is_same_v<T, ConceptAnnotation>) {
          if (body.items.empty()) out.push_back({"empty_items", "no concepts were annotated", "items"});
          const Taxonomy* tax = taxonomy_for(j.author);
          for (std::size_t i = 0; i < body.items.size(); ++i) {
            const auto& item = body.items[i];
            const std::string field = "items[" + std::to_string(i) + "]";
            check_concept(tax, item.topic, item.description, field, out);
            if (item.topic_spans.empty() && item.description_spans.empty()) {
              out.push_back({"empty_spans", "neither topic nor description text was highlighted", field});
            }
            check_spans(item.topic_spans, text, field + ".topic_spans", false, out);
            check_spans(item.description_spans, text, field + ".description_spans", false, out);
          }
        }
      },
      j.body);
  return result;
}

ValidationResult validate_justification(const KnowledgeRepository& repo, const Justification& j) {
  return repo.validate(j);
}

ValidationResult KnowledgeRepository::add_justification(Justification j) {
  ValidationResult result = validate(j);
  if (!result.ok()) {
    throw Error(ErrorCode::ValidationFailed,
                "justification for " + j.instance_id + " rejected with " +
                    std::to_string(result.violations.size()) + " violation(s)",
                result.violations);
  }
  ++revision_;
  StoredJustification stored{std::move(j), revision_};
  auto same_key = [&](const StoredJustification& s) {
    return s.justification.author == stored.justification.author &&
           s.justification.instance_id == stored.justification.instance_id &&
           s.justification.condition() == stored.justification.condition();
  };
  auto it = std::find_if(justifications_.begin(), justifications_.end(), same_key);
  if (it != justifications_.end()) {
    history_.push_back(std::move(*it));
    *it = std::move(stored);
  } else {
    justifications_.push_back(std::move(stored));
  }
  return result;
}

void KnowledgeRepository::set_taxonomy(Taxonomy t) {
  auto violations = validate_taxonomy(t);
  if (!violations.empty()) {
    throw Error(ErrorCode::ValidationFailed, "taxonomy rejected", std::move(violations));
  }
  ++revision_;
  StoredTaxonomy stored{std::move(t), revision_};
  auto it = std::find_if(taxonomies_.begin(), taxonomies_.end(), [&](const StoredTaxonomy& s) {
    return s.taxonomy.author == stored.taxonomy.author;
  });
  if (it != taxonomies_.end()) {
    taxonomy_history_.push_back(std::move(*it));
    *it = std::move(stored);
  } else {
    taxonomies_.push_back(std::move(stored));
  }
}

std::vector<Justification> KnowledgeRepository::by_condition(Condition c) const {
  std::vector<Justification> out;
  for (const auto& s : justifications_) {
    if (s.justification.condition() == c) out.push_back(s.justification);
  }
  return out;
}

}  // namespace elicit::knowledge
