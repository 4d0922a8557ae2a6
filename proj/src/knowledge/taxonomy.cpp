#include <set>

#include "elicit/knowledge.hpp"

namespace elicit::knowledge {

const Topic* Taxonomy::find_topic(std::string_view name) const {
  const std::string key = fold_case(name);
  for (const auto& topic : topics) {
    if (fold_case(topic.name) == key) return &topic;
  }
  return nullptr;
}

bool Taxonomy::has_pair(std::string_view topic, std::string_view description) const {
  const Topic* t = find_topic(topic);
  if (!t) return false;
  const std::string key = fold_case(description);
  for (const auto& d : t->descriptions) {
    if (fold_case(d) == key) return true;
  }
  return false;
}

std::vector<Violation> validate_taxonomy(const Taxonomy& t) {
  std::vector<Violation> out;
  if (trim(t.author).empty()) out.push_back({"missing_author", "taxonomy has no author", "author"});
  if (t.topics.empty()) out.push_back({"empty_taxonomy", "taxonomy has no topics", "topics"});

  std::set<std::string> names;
  for (std::size_t i = 0; i < t.topics.size(); ++i) {
    const Topic& topic = t.topics[i];
    const std::string field = "topics[" + std::to_string(i) + "]";
    const std::string key = fold_case(topic.name);
    if (key.empty()) {
      out.push_back({"blank_name", "topic name is blank", field + ".name"});
    } else if (!names.insert(key).second) {
      out.push_back({"duplicate_topic", "duplicate topic name '" + topic.name + "'", field + ".name"});
    }
    std::set<std::string> descs;
    for (std::size_t j = 0; j < topic.descriptions.size(); ++j) {
      const std::string dfield = field + ".descriptions[" + std::to_string(j) + "]";
      const std::string dkey = fold_case(topic.descriptions[j]);
      if (dkey.empty()) {
        out.push_back({"blank_name", "description is blank", dfield});
      } else if (!descs.insert(dkey).second) {
        out.push_back({"duplicate_description",
                       "duplicate description '" + topic.descriptions[j] + "' under topic '" +
                           topic.name + "'",
                       dfield});
      }
    }
  }
  return out;
}

double taxonomy_coverage(const Taxonomy& t,
                         std::span<const std::optional<std::string>> assignments) {
  if (assignments.empty()) {
    throw Error(ErrorCode::InvalidAssignment, "no instances were judged");
  }
  std::size_t covered = 0;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (!assignments[i]) continue;
    if (!t.find_topic(*assignments[i])) {
      throw Error(ErrorCode::InvalidAssignment, "assignment " + std::to_string(i) +
                                                    " names unknown topic '" + *assignments[i] +
                                                    "'");
    }
    ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(assignments.size());
}

}  // namespace elicit::knowledge
