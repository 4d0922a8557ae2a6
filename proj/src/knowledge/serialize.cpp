#include "elicit/knowledge.hpp"

namespace elicit::knowledge {

using nlohmann::json;

namespace {

json spans_json(const std::vector<Span>& spans) {
  json arr = json::array();
  for (const auto& s : spans) arr.push_back(to_json(s));
  return arr;
}

std::vector<Span> spans_from(const json& arr) {
  std::vector<Span> out;
  for (const auto& s : arr) out.push_back(span_from_json(s));
  return out;
}

json stored_json(const StoredJustification& s) {
  json j = to_json(s.justification);
  j["revision"] = s.revision;
  return j;
}

json stored_json(const StoredTaxonomy& s) {
  json j = to_json(s.taxonomy);
  j["revision"] = s.revision;
  return j;
}

json unsigned_document(const KnowledgeRepository& repo) {
  json instances = json::array();
  for (const auto& [id, rec] : repo.instances()) {
    instances.push_back({{"id", rec.id},
                         {"text", rec.text},
                         {"label", to_string(rec.label)},
                         {"hash", rec.content_hash()}});
  }
  json taxonomies = json::array();
  for (const auto& t : repo.taxonomies()) taxonomies.push_back(stored_json(t));
  json justifications = json::array();
  for (const auto& j : repo.justifications()) justifications.push_back(stored_json(j));
  json old_justifications = json::array();
  for (const auto& j : repo.justification_history()) old_justifications.push_back(stored_json(j));
  json old_taxonomies = json::array();
  for (const auto& t : repo.taxonomy_history()) old_taxonomies.push_back(stored_json(t));

  return json{{"version", kRepositorySchemaVersion},
              {"revision", repo.revision()},
              {"corpus_hash", repo.corpus_hash()},
              {"instances", std::move(instances)},
              {"taxonomies", std::move(taxonomies)},
              {"justifications", std::move(justifications)},
              {"history", {{"justifications", std::move(old_justifications)},
                           {"taxonomies", std::move(old_taxonomies)}}}};
}

}  // namespace

json to_json(const Span& s) { return json{{"start", s.start}, {"end", s.end}}; }

Span span_from_json(const json& j) {
  return Span{j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>()};
}

json to_json(const Taxonomy& t) {
  json topics = json::array();
  for (const auto& topic : t.topics) {
    topics.push_back({{"name", topic.name}, {"descriptions", topic.descriptions}});
  }
  return json{{"author", t.author}, {"created_at", t.created_at}, {"topics", std::move(topics)}};
}

Taxonomy taxonomy_from_json(const json& j) {
  Taxonomy t;
  t.author = j.value("author", "");
  t.created_at = j.value("created_at", "");
  for (const auto& topic : j.at("topics")) {
    Topic tp;
    tp.name = topic.at("name").get<std::string>();
    tp.descriptions = topic.value("descriptions", std::vector<std::string>{});
    t.topics.push_back(std::move(tp));
  }
  return t;
}

json to_json(const Justification& j) {
  json out{{"instance_id", j.instance_id},
           {"label", to_string(j.label)},
           {"author", j.author},
           {"condition", to_string(j.condition())}};
  std::visit(
      [&](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, BagOfWords>) {
          out["spans"] = spans_json(body.spans);
        } else if constexpr (std::is_same_v<T, Perturbation>) {
          out["perturbed_text"] = body.perturbed_text;
        } else if constexpr (std::is_same_v<T, Simplification>) {
          out["simplified_text"] = body.simplified_text;
        } else if constexpr (std::is_same_v<T, ConceptBagOfWords>) {
          json items = json::array();
          for (const auto& item : body.items) {
            items.push_back({{"topic", item.topic},
                             {"description", item.description},
                             {"spans", spans_json(item.spans)}});
          }
          out["items"] = std::move(items);
        } else if constexpr (std::is_same_v<T, ConceptAnnotation>) {
          json items = json::array();
          for (const auto& item : body.items) {
            items.push_back({{"topic", item.topic},
                             {"description", item.description},
                             {"topic_spans", spans_json(item.topic_spans)},
                             {"description_spans", spans_json(item.description_spans)}});
          }
          out["items"] = std::move(items);
        }
      },
      j.body);
  return out;
}

Justification justification_from_json(const json& j) {
  try {
    Justification out;
    out.instance_id = j.at("instance_id").get<std::string>();
    out.label = parse_polarity(j.at("label").get<std::string>());
    out.author = j.value("author", "");
    switch (parse_condition(j.at("condition").get<std::string>())) {
      case Condition::Bow:
        out.body = BagOfWords{spans_from(j.at("spans"))};
        break;
      case Condition::Perturbation:
        out.body = Perturbation{j.at("perturbed_text").get<std::string>()};
        break;
      case Condition::Simplification:
        out.body = Simplification{j.at("simplified_text").get<std::string>()};
        break;
      case Condition::ConceptBow: {
        ConceptBagOfWords body;
        for (const auto& item : j.at("items")) {
          body.items.push_back({item.at("topic").get<std::string>(),
                                item.at("description").get<std::string>(),
                                spans_from(item.at("spans"))});
        }
        out.body = std::move(body);
        break;
      }
      case Condition::ConceptAnnotation: {
        ConceptAnnotation body;
        for (const auto& item : j.at("items")) {
          body.items.push_back({item.at("topic").get<std::string>(),
                                item.at("description").get<std::string>(),
                                spans_from(item.value("topic_spans", json::array())),
                                spans_from(item.value("description_spans", json::array()))});
        }
        out.body = std::move(body);
        break;
      }
    }
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("malformed justification: ") + e.what());
  }
}

json to_json(const KnowledgeRepository& repo) {
  json doc = unsigned_document(repo);
  doc["integrity"] = sha256_hex(doc.dump());
  return doc;
}

std::string content_hash(const KnowledgeRepository& repo) {
  return sha256_hex(unsigned_document(repo).dump());
}

KnowledgeRepository repository_from_json(const json& input) {
  if (!input.is_object() || !input.contains("version") || !input["version"].is_number_integer()) {
    throw Error(ErrorCode::Parse, "repository document has no schema version");
  }
  const int version = input["version"].get<int>();
  if (version != kRepositorySchemaVersion) {
    throw Error(ErrorCode::VersionedFormat,
                "repository file has schema version " + std::to_string(version) +
                    ", this build reads version " + std::to_string(kRepositorySchemaVersion));
  }
  json doc = input;
  const std::string integrity = doc.value("integrity", "");
  doc.erase("integrity");
  if (integrity != sha256_hex(doc.dump())) {
    throw Error(ErrorCode::CorruptFile, "repository integrity hash mismatch");
  }

  try {
    KnowledgeRepository repo(doc.at("corpus_hash").get<std::string>());
    repo.revision_ = doc.at("revision").get<std::uint64_t>();
    for (const auto& j : doc.at("instances")) {
      InstanceRecord rec{j.at("id").get<std::string>(), j.at("text").get<std::string>(),
                         parse_polarity(j.at("label").get<std::string>())};
      if (rec.content_hash() != j.at("hash").get<std::string>()) {
        throw Error(ErrorCode::CorruptFile, "instance " + rec.id + " hash mismatch");
      }
      repo.add_instance(std::move(rec));
    }
    auto read_taxonomies = [](const json& arr, std::vector<StoredTaxonomy>& out) {
      for (const auto& t : arr) out.push_back({taxonomy_from_json(t), t.at("revision").get<std::uint64_t>()});
    };
    auto read_justifications = [&](const json& arr, std::vector<StoredJustification>& out) {
      for (const auto& j : arr) {
        Justification just = justification_from_json(j);
        if (!repo.find_instance(just.instance_id)) {
          throw Error(ErrorCode::CorruptFile,
                      "justification references unknown instance " + just.instance_id);
        }
        out.push_back({std::move(just), j.at("revision").get<std::uint64_t>()});
      }
    };
    read_taxonomies(doc.at("taxonomies"), repo.taxonomies_);
    read_justifications(doc.at("justifications"), repo.justifications_);
    read_taxonomies(doc.at("history").at("taxonomies"), repo.taxonomy_history_);
    read_justifications(doc.at("history").at("justifications"), repo.history_);
    return repo;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("malformed repository document: ") + e.what());
  }
}

std::string export_repository(const KnowledgeRepository& repo) { return to_json(repo).dump(2) + "\n"; }

KnowledgeRepository import_repository(std::string_view text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::Parse, "repository file is not valid JSON");
  return repository_from_json(doc);
}

}  // namespace elicit::knowledge
