#include <spdlog/spdlog.h>

#include <algorithm>
#include <array>
#include <set>

#include "elicit/rulemodel.hpp"

namespace elicit::rules {

using knowledge::Justification;

namespace {

std::string source_of(const Justification& j) {
  return "justification:" + std::string(to_string(j.condition())) + ":" + j.author + ":" +
         j.instance_id;
}

std::string join(const std::vector<std::string>& tokens, std::size_t first, std::size_t last) {
  std::string out;
  for (std::size_t i = first; i < last; ++i) {
    if (i > first) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::string slice(std::string_view text, const knowledge::Span& s) {
  return std::string(text.substr(s.start, s.end - s.start));
}

const knowledge::InstanceRecord& instance_of(const InstanceMap& instances, const Justification& j) {
  auto it = instances.find(j.instance_id);
  if (it == instances.end()) {
    throw Error(ErrorCode::MissingInstance, "no instance with id '" + j.instance_id + "'");
  }
  return it->second;
}

// Collects votes per term and resolves them into lexicons. A term voted into
// both polarities is dropped and reported as a conflict.
class LexiconBuilder {
 public:
  void noun(const std::string& term, Provenance p) { nouns_[term].insert(std::move(p)); }

  void adjective(const std::string& term, Polarity pol, Provenance p) {
    adjectives_[term][static_cast<int>(pol)].insert(std::move(p));
  }

  void keyword(const std::string& term, Polarity pol, Provenance p) {
    keywords_[term][static_cast<int>(pol)].insert(std::move(p));
  }

  void finish_into(RuleModel& model) && {
    for (auto& [term, sources] : nouns_) {
      model.nouns.emplace(term, std::vector<Provenance>(sources.begin(), sources.end()));
    }
    resolve(adjectives_, "adjective", model.adjectives, model.stats);
    resolve(keywords_, "keyword", model.keywords, model.stats);
  }

 private:
  using Votes = std::map<std::string, std::array<std::set<Provenance>, 2>>;

  static void resolve(Votes& votes, std::string_view lexicon,
                      std::map<std::string, LexiconEntry>& out, CompileStats& stats) {
    for (auto& [term, by_polarity] : votes) {
      auto& pos = by_polarity[static_cast<int>(Polarity::Positive)];
      auto& neg = by_polarity[static_cast<int>(Polarity::Negative)];
      if (!pos.empty() && !neg.empty()) {
        std::string msg = std::string(lexicon) + " '" + term + "' has conflicting polarity (" +
                          std::to_string(pos.size()) + " positive, " + std::to_string(neg.size()) +
                          " negative); dropped";
        spdlog::warn("{}", msg);
        stats.conflicts.push_back(std::move(msg));
        continue;
      }
      const bool positive = !pos.empty();
      auto& sources = positive ? pos : neg;
      out.emplace(term, LexiconEntry{positive ? Polarity::Positive : Polarity::Negative,
                                     std::vector<Provenance>(sources.begin(), sources.end())});
    }
  }

  std::map<std::string, std::set<Provenance>> nouns_;
  Votes adjectives_;
  Votes keywords_;
};

RuleModel blank_model(Condition c, std::size_t n) {
  RuleModel model;
  model.condition = c;
  model.closed_class_version = ClosedClassList::builtin().version();
  model.stats.justifications = n;
  return model;
}

void add_signal(LexiconBuilder& lex, const PatternSignal& s, const Provenance& p) {
  if (s.noun) lex.noun(*s.noun, p);
  lex.adjective(s.adjective, s.polarity, p);
}

// ---------------------------------------------------------------------------
// Token diff
// ---------------------------------------------------------------------------

// A changed region: tokens [a_first, a_last) of the original were replaced by
// tokens [b_first, b_last) of the edit. Either side may be empty.
struct Hunk {
  std::size_t a_first, a_last, b_first, b_last;
};

struct Diff {
  std::vector<Hunk> hunks;
  std::size_t common = 0;
};

Diff token_diff(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  // lcs[i][j] = LCS length of a[i:] and b[j:]
  std::vector<std::vector<std::size_t>> lcs(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      lcs[i][j] = a[i] == b[j] ? lcs[i + 1][j + 1] + 1 : std::max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }
  Diff diff;
  diff.common = lcs[0][0];
  std::size_t i = 0;
  std::size_t j = 0;
  std::optional<Hunk> open;
  auto close = [&] {
    if (open) {
      open->a_last = i;
      open->b_last = j;
      diff.hunks.push_back(*open);
      open.reset();
    }
  };
  while (i < n || j < m) {
    if (i < n && j < m && a[i] == b[j]) {
      close();
      ++i;
      ++j;
      continue;
    }
    if (!open) open = Hunk{i, i, j, j};
    if (j < m && (i == n || lcs[i][j + 1] >= lcs[i + 1][j])) {
      ++j;
    } else {
      ++i;
    }
  }
  close();
  return diff;
}

// Whether a match covering tokens [first, last] is affected by a change at
// [region_first, region_last). An empty region is an insertion point and
// touches matches it falls strictly inside of.
bool touches(const PatternMatch& m, std::size_t region_first, std::size_t region_last) {
  if (region_first == region_last) {
    return m.first_token < region_first && region_first <= m.last_token;
  }
  return m.first_token < region_last && region_first <= m.last_token;
}

std::vector<std::string> strings_of(const textvec::TokenStream& ts) {
  std::vector<std::string> out;
  for (const auto& t : ts) out.push_back(t.text);
  return out;
}

// ---------------------------------------------------------------------------
// Concept pair polarity
// ---------------------------------------------------------------------------

using PairKey = std::pair<std::string, std::string>;

PairKey pair_key(std::string_view topic, std::string_view description) {
  return {fold_case(topic), fold_case(description)};
}

template <typename Body>
std::map<PairKey, Polarity> pair_polarities(std::span<const Justification> justs,
                                            CompileStats& stats) {
  std::map<PairKey, std::array<std::size_t, 2>> votes;
  for (const auto& j : justs) {
    std::set<PairKey> used;
    for (const auto& item : std::get<Body>(j.body).items) used.insert(pair_key(item.topic, item.description));
    for (const auto& key : used) ++votes[key][static_cast<int>(j.label)];
  }
  std::map<PairKey, Polarity> out;
  for (const auto& [key, v] : votes) {
    const std::size_t pos = v[static_cast<int>(Polarity::Positive)];
    const std::size_t neg = v[static_cast<int>(Polarity::Negative)];
    if (pos == neg) {
      std::string msg = "concept (" + key.first + ", " + key.second + ") has no majority label (" +
                        std::to_string(pos) + " positive, " + std::to_string(neg) +
                        " negative); its annotations are skipped";
      spdlog::warn("{}", msg);
      stats.skipped_pairs.push_back(std::move(msg));
      continue;
    }
    out.emplace(key, pos > neg ? Polarity::Positive : Polarity::Negative);
  }
  return out;
}

// Topic names seed the noun lexicon; descriptions of pairs with a known
// polarity seed the adjective lexicon.
void seed_from_taxonomies(std::span<const knowledge::Taxonomy> taxonomies,
                          const std::map<PairKey, Polarity>& polarity, LexiconBuilder& lex) {
  const auto& words = ClosedClassList::builtin();
  for (const auto& t : taxonomies) {
    const std::string source = "taxonomy:" + t.author;
    for (const auto& topic : t.topics) {
      for (const auto& tok : textvec::token_strings(topic.name)) {
        if (words.is_content(tok)) lex.noun(tok, {source, topic.name, false});
      }
      for (const auto& desc : topic.descriptions) {
        auto it = polarity.find(pair_key(topic.name, desc));
        if (it == polarity.end()) continue;
        for (const auto& tok : textvec::token_strings(desc)) {
          if (words.is_content(tok)) lex.adjective(tok, it->second, {source, desc, false});
        }
      }
    }
  }
}

template <typename Fn>
void for_content_tokens(std::string_view text, Fn&& fn) {
  const auto& words = ClosedClassList::builtin();
  for (const auto& tok : textvec::token_strings(text)) {
    if (words.is_content(tok)) fn(tok);
  }
}

}  // namespace

RuleModel compile_bow(std::span<const Justification> justs, const InstanceMap& instances) {
  RuleModel model = blank_model(Condition::Bow, justs.size());
  LexiconBuilder lex;
  for (const auto& j : justs) {
    const auto& inst = instance_of(instances, j);
    bool any = false;
    for (const auto& span : std::get<knowledge::BagOfWords>(j.body).spans) {
      const std::string text = slice(inst.text, span);
      const auto tokens = textvec::token_strings(text);
      if (tokens.empty()) continue;
      lex.keyword(join(tokens, 0, tokens.size()), j.label, {source_of(j), text, false});
      any = true;
    }
    if (!any) ++model.stats.uncovered;
  }
  std::move(lex).finish_into(model);
  return model;
}

RuleModel compile_perturbation(std::span<const Justification> justs, const InstanceMap& instances) {
  RuleModel model = blank_model(Condition::Perturbation, justs.size());
  LexiconBuilder lex;
  for (const auto& j : justs) {
    const auto& inst = instance_of(instances, j);
    const std::string& edited = std::get<knowledge::Perturbation>(j.body).perturbed_text;
    const Polarity flipped = opposite(j.label);
    const std::string source = source_of(j);

    const auto original_tokens = textvec::tokenize(inst.text);
    const auto edited_tokens = textvec::tokenize(edited);
    const auto original_matches = find_patterns(original_tokens);
    const auto edited_matches = find_patterns(edited_tokens);
    const Diff diff = token_diff(strings_of(original_tokens), strings_of(edited_tokens));

    std::size_t signals = 0;
    if (diff.common == 0) {
      // Full rewrite: no alignment, so both texts count as whole examples.
      ++model.stats.low_confidence;
      spdlog::info("perturbation of {} by {} rewrites the whole text; low confidence",
                   j.instance_id, j.author);
      for (const auto& m : original_matches) add_signal(lex, to_signal(m, j.label), {source, inst.text, true});
      for (const auto& m : edited_matches) add_signal(lex, to_signal(m, flipped), {source, edited, true});
      signals = original_matches.size() + edited_matches.size();
    } else {
      for (const auto& m : original_matches) {
        const bool hit = std::any_of(diff.hunks.begin(), diff.hunks.end(),
                                     [&](const Hunk& h) { return touches(m, h.a_first, h.a_last); });
        if (!hit) continue;
        add_signal(lex, to_signal(m, j.label), {source, inst.text, false});
        ++signals;
      }
      for (const auto& m : edited_matches) {
        const bool hit = std::any_of(diff.hunks.begin(), diff.hunks.end(),
                                     [&](const Hunk& h) { return touches(m, h.b_first, h.b_last); });
        if (!hit) continue;
        add_signal(lex, to_signal(m, flipped), {source, edited, false});
        ++signals;
      }
    }
    if (signals == 0) ++model.stats.uncovered;
  }
  std::move(lex).finish_into(model);
  return model;
}

RuleModel compile_simplification(std::span<const Justification> justs,
                                 const InstanceMap& instances) {
  RuleModel model = blank_model(Condition::Simplification, justs.size());
  LexiconBuilder lex;
  for (const auto& j : justs) {
    instance_of(instances, j);
    const std::string& text = std::get<knowledge::Simplification>(j.body).simplified_text;
    std::vector<std::string> warnings;
    const auto signals = extract_signals(text, j.label, &warnings);
    for (const auto& w : warnings) spdlog::warn("{} ({})", w, j.instance_id);
    if (signals.empty()) {
      ++model.stats.uncovered;
      continue;
    }
    for (const auto& s : signals) add_signal(lex, s, {source_of(j), text, false});
  }
  std::move(lex).finish_into(model);
  return model;
}

RuleModel compile_concept_bow(std::span<const knowledge::Taxonomy> taxonomies,
                              std::span<const Justification> justs, const InstanceMap& instances) {
  RuleModel model = blank_model(Condition::ConceptBow, justs.size());
  const auto polarity = pair_polarities<knowledge::ConceptBagOfWords>(justs, model.stats);
  LexiconBuilder lex;
  seed_from_taxonomies(taxonomies, polarity, lex);
  for (const auto& j : justs) {
    const auto& inst = instance_of(instances, j);
    bool any = false;
    for (const auto& item : std::get<knowledge::ConceptBagOfWords>(j.body).items) {
      auto it = polarity.find(pair_key(item.topic, item.description));
      if (it == polarity.end()) continue;
      for (const auto& span : item.spans) {
        const std::string text = slice(inst.text, span);
        for_content_tokens(text, [&](const std::string& tok) {
          lex.noun(tok, {source_of(j), text, false});
          lex.adjective(tok, it->second, {source_of(j), text, false});
          any = true;
        });
      }
    }
    if (!any) ++model.stats.uncovered;
  }
  std::move(lex).finish_into(model);
  return model;
}

RuleModel compile_concept_annotation(std::span<const knowledge::Taxonomy> taxonomies,
                                     std::span<const Justification> justs,
                                     const InstanceMap& instances) {
  RuleModel model = blank_model(Condition::ConceptAnnotation, justs.size());
  const auto polarity = pair_polarities<knowledge::ConceptAnnotation>(justs, model.stats);
  LexiconBuilder lex;
  seed_from_taxonomies(taxonomies, polarity, lex);
  for (const auto& j : justs) {
    const auto& inst = instance_of(instances, j);
    bool any = false;
    for (const auto& item : std::get<knowledge::ConceptAnnotation>(j.body).items) {
      auto it = polarity.find(pair_key(item.topic, item.description));
      if (it == polarity.end()) continue;
      for (const auto& span : item.topic_spans) {
        const std::string text = slice(inst.text, span);
        for_content_tokens(text, [&](const std::string& tok) {
          lex.noun(tok, {source_of(j), text, false});
          any = true;
        });
      }
      for (const auto& span : item.description_spans) {
        const std::string text = slice(inst.text, span);
        for_content_tokens(text, [&](const std::string& tok) {
          lex.adjective(tok, it->second, {source_of(j), text, false});
          any = true;
        });
      }
    }
    if (!any) ++model.stats.uncovered;
  }
  std::move(lex).finish_into(model);
  return model;
}

RuleModel compile(const knowledge::KnowledgeRepository& repo, Condition condition) {
  const auto justs = repo.by_condition(condition);
  if (justs.empty()) {
    throw Error(ErrorCode::InsufficientData,
                "repository has no " + std::string(to_string(condition)) + " justifications");
  }
  const auto taxonomies = repo.taxonomy_list();
  RuleModel model;
  switch (condition) {
    case Condition::Bow: model = compile_bow(justs, repo.instances()); break;
    case Condition::Perturbation: model = compile_perturbation(justs, repo.instances()); break;
    case Condition::Simplification: model = compile_simplification(justs, repo.instances()); break;
    case Condition::ConceptBow:
      model = compile_concept_bow(taxonomies, justs, repo.instances());
      break;
    case Condition::ConceptAnnotation:
      model = compile_concept_annotation(taxonomies, justs, repo.instances());
      break;
  }
  model.source_hash = knowledge::content_hash(repo);
  return model;
}

}  // namespace elicit::rules
