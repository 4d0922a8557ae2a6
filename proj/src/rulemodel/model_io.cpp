#include <algorithm>

#include "elicit/rulemodel.hpp"

namespace elicit::rules {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Provenance audit
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> material(const knowledge::Justification& j,
                                  const knowledge::InstanceRecord& inst) {
  std::vector<std::string> out;
  auto add_spans = [&](const std::vector<knowledge::Span>& spans) {
    for (const auto& s : spans) {
      if (s.end <= inst.text.size() && s.start < s.end) out.push_back(inst.text.substr(s.start, s.end - s.start));
    }
  };
  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, knowledge::BagOfWords>) {
          add_spans(body.spans);
        } else if constexpr (std::is_same_v<T, knowledge::Perturbation>) {
          out.push_back(inst.text);
          out.push_back(body.perturbed_text);
        } else if constexpr (std::is_same_v<T, knowledge::Simplification>) {
          out.push_back(body.simplified_text);
        } else if constexpr (std::is_same_v<T, knowledge::ConceptBagOfWords>) {
          for (const auto& item : body.items) add_spans(item.spans);
        } else {
          for (const auto& item : body.items) {
            add_spans(item.topic_spans);
            add_spans(item.description_spans);
          }
        }
      },
      j.body);
  return out;
}

bool contains_phrase(const std::vector<std::string>& haystack, const std::vector<std::string>& needle) {
  if (needle.empty()) return false;
  return std::search(haystack.begin(), haystack.end(), needle.begin(), needle.end()) != haystack.end();
}

std::vector<std::string> split_words(const std::string& phrase) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= phrase.size()) {
    const auto space = phrase.find(' ', start);
    const auto end = space == std::string::npos ? phrase.size() : space;
    if (end > start) out.push_back(phrase.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

class Auditor {
 public:
  explicit Auditor(const knowledge::KnowledgeRepository& repo) : repo_(repo) {}

  void check(std::string_view lexicon, const std::string& term,
             const std::vector<Provenance>& sources) {
    const std::string label = std::string(lexicon) + " '" + term + "'";
    if (sources.empty()) {
      failures_.push_back(label + ": no provenance");
      return;
    }
    for (const auto& p : sources) {
      if (auto why = resolve(p)) {
        failures_.push_back(label + ": " + *why);
        continue;
      }
      if (!contains_phrase(textvec::token_strings(p.evidence), split_words(term))) {
        failures_.push_back(label + ": evidence '" + p.evidence + "' does not contain the term");
      }
    }
  }

  std::vector<std::string> failures() && { return std::move(failures_); }

 private:
  // nullopt when the provenance resolves to repository content.
  std::optional<std::string> resolve(const Provenance& p) const {
    constexpr std::string_view kTaxonomy = "taxonomy:";
    constexpr std::string_view kJustification = "justification:";
    const std::string_view src = p.source;
    if (src.starts_with(kTaxonomy)) {
      const std::string author(src.substr(kTaxonomy.size()));
      for (const auto& st : repo_.taxonomies()) {
        if (st.taxonomy.author != author) continue;
        for (const auto& topic : st.taxonomy.topics) {
          if (topic.name == p.evidence) return std::nullopt;
          if (std::find(topic.descriptions.begin(), topic.descriptions.end(), p.evidence) !=
              topic.descriptions.end()) {
            return std::nullopt;
          }
        }
        return "taxonomy of " + author + " has no term '" + p.evidence + "'";
      }
      return "no taxonomy by " + author;
    }
    if (src.starts_with(kJustification)) {
      const std::string_view rest = src.substr(kJustification.size());
      const auto first = rest.find(':');
      const auto last = rest.rfind(':');
      if (first == std::string_view::npos || first == last) return "malformed source '" + p.source + "'";
      const std::string_view condition = rest.substr(0, first);
      const std::string_view author = rest.substr(first + 1, last - first - 1);
      const std::string_view instance = rest.substr(last + 1);
      for (const auto& stored : repo_.justifications()) {
        const auto& j = stored.justification;
        if (to_string(j.condition()) != condition || j.author != author || j.instance_id != instance) {
          continue;
        }
        const auto* inst = repo_.find_instance(j.instance_id);
        if (!inst) return "justification references a missing instance";
        const auto texts = material(j, *inst);
        if (std::find(texts.begin(), texts.end(), p.evidence) != texts.end()) return std::nullopt;
        return "evidence '" + p.evidence + "' is not part of " + p.source;
      }
      return "no justification " + p.source;
    }
    return "unknown source kind '" + p.source + "'";
  }

  const knowledge::KnowledgeRepository& repo_;
  std::vector<std::string> failures_;
};

}  // namespace

std::vector<std::string> audit_provenance(const RuleModel& model,
                                          const knowledge::KnowledgeRepository& repo) {
  Auditor audit(repo);
  for (const auto& [term, sources] : model.nouns) audit.check("noun", term, sources);
  for (const auto& [term, entry] : model.adjectives) audit.check("adjective", term, entry.sources);
  for (const auto& [term, entry] : model.keywords) audit.check("keyword", term, entry.sources);
  return std::move(audit).failures();
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

json provenance_json(const std::vector<Provenance>& sources) {
  json arr = json::array();
  for (const auto& p : sources) {
    json e{{"source", p.source}, {"evidence", p.evidence}};
    if (p.low_confidence) e["low_confidence"] = true;
    arr.push_back(std::move(e));
  }
  return arr;
}

std::vector<Provenance> provenance_from(const json& arr) {
  std::vector<Provenance> out;
  for (const auto& e : arr) {
    out.push_back({e.at("source").get<std::string>(), e.at("evidence").get<std::string>(),
                   e.value("low_confidence", false)});
  }
  return out;
}

}  // namespace

json to_json(const RuleModel& model) {
  json nouns = json::array();
  json adjectives = json::object();
  json keywords = json::object();
  json entries = json::object();
  for (const auto& [term, sources] : model.nouns) {
    nouns.push_back(term);
    entries["noun:" + term] = provenance_json(sources);
  }
  for (const auto& [term, entry] : model.adjectives) {
    adjectives[term] = to_string(entry.polarity);
    entries["adjective:" + term] = provenance_json(entry.sources);
  }
  for (const auto& [term, entry] : model.keywords) {
    keywords[term] = to_string(entry.polarity);
    entries["keyword:" + term] = provenance_json(entry.sources);
  }
  return json{
      {"condition", to_string(model.condition)},
      {"noun_lexicon", std::move(nouns)},
      {"adjective_lexicon", std::move(adjectives)},
      {"keyword_lexicon", std::move(keywords)},
      {"provenance", {{"source_hash", model.source_hash}, {"entries", std::move(entries)}}},
      {"closed_class_list_version", model.closed_class_version},
      {"options", {{"adjective_only_matches", model.adjective_only_matches}}},
      {"stats",
       {{"justifications", model.stats.justifications},
        {"uncovered", model.stats.uncovered},
        {"low_confidence", model.stats.low_confidence},
        {"conflicts", model.stats.conflicts},
        {"skipped_pairs", model.stats.skipped_pairs}}},
  };
}

RuleModel model_from_json(const json& doc) {
  try {
    RuleModel model;
    model.condition = parse_condition(doc.at("condition").get<std::string>());
    const json& entries = doc.at("provenance").at("entries");
    auto sources_for = [&](const std::string& key) {
      auto it = entries.find(key);
      return it == entries.end() ? std::vector<Provenance>{} : provenance_from(*it);
    };
    for (const auto& term : doc.at("noun_lexicon")) {
      const auto t = term.get<std::string>();
      model.nouns.emplace(t, sources_for("noun:" + t));
    }
    for (const auto& [term, pol] : doc.at("adjective_lexicon").items()) {
      model.adjectives.emplace(term, LexiconEntry{parse_polarity(pol.get<std::string>()),
                                                  sources_for("adjective:" + term)});
    }
    for (const auto& [term, pol] : doc.at("keyword_lexicon").items()) {
      model.keywords.emplace(term, LexiconEntry{parse_polarity(pol.get<std::string>()),
                                                sources_for("keyword:" + term)});
    }
    model.source_hash = doc.at("provenance").at("source_hash").get<std::string>();
    model.closed_class_version = doc.at("closed_class_list_version").get<std::string>();
    if (doc.contains("options")) {
      model.adjective_only_matches = doc["options"].value("adjective_only_matches", false);
    }
    if (doc.contains("stats")) {
      const json& s = doc["stats"];
      model.stats.justifications = s.value("justifications", std::size_t{0});
      model.stats.uncovered = s.value("uncovered", std::size_t{0});
      model.stats.low_confidence = s.value("low_confidence", std::size_t{0});
      model.stats.conflicts = s.value("conflicts", std::vector<std::string>{});
      model.stats.skipped_pairs = s.value("skipped_pairs", std::vector<std::string>{});
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("malformed model document: ") + e.what());
  }
}

std::string serialize_model(const RuleModel& model) { return to_json(model).dump(2) + "\n"; }

}  // namespace elicit::rules
