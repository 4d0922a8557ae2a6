#include <algorithm>

#include "elicit/rulemodel.hpp"

namespace elicit::rules {

namespace {

void vote(Prediction& p, Evidence e) {
  (e.polarity == Polarity::Positive ? p.positive_votes : p.negative_votes)++;
  p.evidence.push_back(std::move(e));
}

void keyword_votes(const RuleModel& model, const textvec::TokenStream& tokens, Prediction& p) {
  std::size_t longest = 0;
  for (const auto& [phrase, entry] : model.keywords) {
    longest = std::max<std::size_t>(longest, std::count(phrase.begin(), phrase.end(), ' ') + 1);
  }
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    std::string phrase;
    for (std::size_t len = 1; len <= longest && i + len <= tokens.size(); ++len) {
      if (len > 1) phrase.push_back(' ');
      phrase += tokens[i + len - 1].text;
      auto it = model.keywords.find(phrase);
      if (it != model.keywords.end()) vote(p, {phrase, std::nullopt, false, it->second.polarity});
    }
  }
}

void pattern_votes(const RuleModel& model, const textvec::TokenStream& tokens, Prediction& p) {
  for (const auto& m : find_patterns(tokens)) {
    auto adj = model.adjectives.find(m.adjective);
    if (adj == model.adjectives.end()) continue;
    const bool known_noun = m.noun && model.nouns.contains(*m.noun);
    if (!known_noun && !model.adjective_only_matches) continue;
    vote(p, {m.adjective, m.noun, m.negated, flip_if(adj->second.polarity, m.negated)});
  }
}

}  // namespace

Prediction classify(const RuleModel& model, std::string_view text) {
  Prediction p;
  const auto tokens = textvec::tokenize(text);
  if (tokens.empty()) return p;
  if (!model.keywords.empty()) keyword_votes(model, tokens, p);
  if (!model.adjectives.empty()) pattern_votes(model, tokens, p);
  if (p.positive_votes > p.negative_votes) {
    p.label = Polarity::Positive;
  } else if (p.negative_votes > p.positive_votes) {
    p.label = Polarity::Negative;
  }
  return p;
}

}  // namespace elicit::rules
