#include "elicit/rulemodel.hpp"

namespace elicit::rules {

std::string_view to_string(PatternKind k) {
  return k == PatternKind::Copula ? "copula" : "adjacency";
}

namespace {

class Scanner {
 public:
  Scanner(const textvec::TokenStream& tokens, const ClosedClassList& words)
      : tokens_(tokens), words_(words) {}

  std::vector<PatternMatch> run() {
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (words_.has(text(i), kCopula)) copula_at(i);
    }
    for (std::size_t i = 0; i + 1 < tokens_.size(); ++i) {
      if (content(i) && content(i + 1)) adjacency_at(i);
    }
    return std::move(out_);
  }

 private:
  const std::string& text(std::size_t i) const { return tokens_[i].text; }
  bool content(std::size_t i) const { return words_.is_content(text(i)); }
  bool negator(std::size_t i) const { return words_.has(text(i), kNegator); }
  bool intensifier(std::size_t i) const { return words_.has(text(i), kIntensifier); }

  // Consumes negators and intensifiers starting at j; returns the first index
  // past them and adds the negators seen to `negations`.
  std::size_t skip_modifiers(std::size_t j, int& negations) const {
    while (j < tokens_.size() && (negator(j) || intensifier(j))) {
      if (negator(j)) ++negations;
      ++j;
    }
    return j;
  }

  void copula_at(std::size_t c) {
    std::optional<std::string> noun;
    std::size_t first = c;
    if (!words_.is_pronoun_copula(text(c)) && c > 0 && content(c - 1)) {
      noun = text(c - 1);
      first = c - 1;
    }
    int base_negations = words_.is_negated_contraction(text(c)) ? 1 : 0;
    std::size_t j = skip_modifiers(c + 1, base_negations);
    int negations = base_negations;
    while (j < tokens_.size() && content(j)) {
      if (j + 1 < tokens_.size() && content(j + 1)) break;  // attributive: "were delicious burgers"
      emit(noun, text(j), negations, PatternKind::Copula, first, j);
      if (j + 1 < tokens_.size() && text(j + 1) == "and") {
        negations = base_negations;
        j = skip_modifiers(j + 2, negations);
      } else {
        break;
      }
    }
  }

  void adjacency_at(std::size_t a) {
    int negations = 0;
    std::size_t k = a;
    while (k > 0 && (words_.has(text(k - 1), kArticle) || intensifier(k - 1))) --k;
    while (k > 0 && (negator(k - 1) || words_.is_negated_contraction(text(k - 1)))) {
      ++negations;
      --k;
    }
    emit(text(a + 1), text(a), negations, PatternKind::Adjacency, a, a + 1);
  }

  void emit(std::optional<std::string> noun, const std::string& adjective, int negations,
            PatternKind kind, std::size_t first, std::size_t last) {
    PatternMatch m;
    m.noun = std::move(noun);
    m.adjective = adjective;
    m.negated = negations > 0;
    m.stacked_negation = negations > 1;
    m.kind = kind;
    m.first_token = first;
    m.last_token = last;
    out_.push_back(std::move(m));
  }

  const textvec::TokenStream& tokens_;
  const ClosedClassList& words_;
  std::vector<PatternMatch> out_;
};

}  // namespace

std::vector<PatternMatch> find_patterns(const textvec::TokenStream& tokens,
                                        const ClosedClassList& words) {
  return Scanner(tokens, words).run();
}

PatternSignal to_signal(const PatternMatch& m, Polarity label) {
  return PatternSignal{m.noun,        m.adjective,  m.negated, flip_if(label, m.negated),
                       m.kind,        m.first_token, m.last_token};
}

std::vector<PatternSignal> extract_signals(std::string_view text, Polarity label,
                                           std::vector<std::string>* warnings) {
  std::vector<PatternSignal> out;
  for (const auto& m : find_patterns(textvec::tokenize(text))) {
    if (m.stacked_negation && warnings) {
      warnings->push_back("stacked negation before '" + m.adjective +
                          "' treated as a single negation");
    }
    out.push_back(to_signal(m, label));
  }
  return out;
}

}  // namespace elicit::rules
