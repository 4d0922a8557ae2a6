#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "elicit/textvec.hpp"

namespace elicit::textvec {

namespace {

struct CodePoint {
  UChar32 value;
  std::size_t start;
  std::size_t end;
};

std::vector<CodePoint> decode(std::string_view text) {
  std::vector<CodePoint> out;
  out.reserve(text.size());
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t start = i;
    UChar32 c;
    U8_NEXT(s, i, length, c);  // c < 0 on ill-formed input
    out.push_back({c, static_cast<std::size_t>(start), static_cast<std::size_t>(i)});
  }
  return out;
}

bool is_word_char(UChar32 c) {
  if (c < 0) return false;
  if (u_isalnum(c)) return true;
  const int8_t type = u_charType(c);
  return type == U_NON_SPACING_MARK || type == U_COMBINING_SPACING_MARK;
}

bool is_apostrophe(UChar32 c) { return c == 0x27 || c == 0x2019; }

void append_utf8(std::string& out, UChar32 c) {
  char buf[U8_MAX_LENGTH];
  int32_t len = 0;
  UBool error = false;
  U8_APPEND(reinterpret_cast<uint8_t*>(buf), len, U8_MAX_LENGTH, c, error);
  if (!error) out.append(buf, static_cast<std::size_t>(len));
}

}  // namespace

TokenStream tokenize(std::string_view text) {
  const std::vector<CodePoint> cps = decode(text);
  TokenStream tokens;
  std::size_t i = 0;
  while (i < cps.size()) {
    // A token cannot start with a combining mark.
    if (!is_word_char(cps[i].value) || !u_isalnum(cps[i].value)) {
      ++i;
      continue;
    }
    Token tok;
    tok.start = cps[i].start;
    while (i < cps.size()) {
      const UChar32 c = cps[i].value;
      if (is_word_char(c)) {
        append_utf8(tok.text, u_tolower(c));
        ++i;
      } else if (is_apostrophe(c) && i + 1 < cps.size() && is_word_char(cps[i + 1].value)) {
        tok.text.push_back('\'');
        ++i;
      } else {
        break;
      }
    }
    tok.end = cps[i - 1].end;
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

std::vector<std::string> token_strings(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize(text)) out.push_back(std::move(t.text));
  return out;
}

}  // namespace elicit::textvec
