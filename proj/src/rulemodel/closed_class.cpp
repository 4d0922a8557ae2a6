#include <sstream>

#include "elicit/rulemodel.hpp"

namespace elicit::rules {

namespace detail {
extern const std::string_view kClosedClassData;
}

namespace {

std::optional<WordClass> category(std::string_view name) {
  static const std::map<std::string_view, WordClass> kNames = {
      {"copula", kCopula},           {"negator", kNegator},
      {"conjunction", kConjunction}, {"article", kArticle},
      {"determiner", kDeterminer},   {"pronoun", kPronoun},
      {"preposition", kPreposition}, {"auxiliary", kAuxiliary},
      {"intensifier", kIntensifier}, {"adverb", kAdverb},
  };
  auto it = kNames.find(name);
  if (it == kNames.end()) return std::nullopt;
  return it->second;
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

ClosedClassList ClosedClassList::parse(std::string_view data) {
  ClosedClassList list;
  std::istringstream in{std::string(data)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto colon = body.find(':');
    if (colon == std::string::npos) {
      throw Error(ErrorCode::Parse, "closed-class list line " + std::to_string(lineno) + ": missing ':'");
    }
    const std::string key = trim(std::string_view(body).substr(0, colon));
    const std::string rest = trim(std::string_view(body).substr(colon + 1));
    if (key == "version") {
      list.version_ = rest;
      continue;
    }
    auto cls = category(key);
    if (!cls) {
      throw Error(ErrorCode::Parse, "closed-class list line " + std::to_string(lineno) +
                                        ": unknown category '" + key + "'");
    }
    std::istringstream words(rest);
    std::string w;
    while (words >> w) list.classes_[w] |= *cls;
  }
  if (list.version_.empty()) throw Error(ErrorCode::Parse, "closed-class list has no version");
  return list;
}

const ClosedClassList& ClosedClassList::builtin() {
  static const ClosedClassList list = parse(detail::kClosedClassData);
  return list;
}

std::uint32_t ClosedClassList::classes(std::string_view token) const {
  auto it = classes_.find(token);
  return it == classes_.end() ? 0u : it->second;
}

bool ClosedClassList::is_negated_contraction(std::string_view token) const {
  return ends_with(token, "n't") && (classes(token) & (kCopula | kAuxiliary)) != 0;
}

bool ClosedClassList::is_pronoun_copula(std::string_view token) const {
  return has(token, kCopula) && token.find('\'') != std::string_view::npos &&
         !ends_with(token, "n't");
}

}  // namespace elicit::rules
