#include "elicit/common.hpp"

#include <openssl/evp.h>
#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <memory>

namespace elicit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::InvalidRating: return "invalid_rating";
    case ErrorCode::EmptyCorpus: return "empty_corpus";
    case ErrorCode::InsufficientData: return "insufficient_data";
    case ErrorCode::InvalidK: return "invalid_k";
    case ErrorCode::InvalidM: return "invalid_m";
    case ErrorCode::MissingInstance: return "missing_instance";
    case ErrorCode::ValidationFailed: return "validation_failed";
    case ErrorCode::VersionedFormat: return "versioned_format";
    case ErrorCode::CorruptFile: return "corrupt_file";
    case ErrorCode::InvalidAssignment: return "invalid_assignment";
    case ErrorCode::Lifecycle: return "lifecycle";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::SessionLocked: return "session_locked";
    case ErrorCode::OutOfQueue: return "out_of_queue";
    case ErrorCode::ConditionMismatch: return "condition_mismatch";
    case ErrorCode::UnknownCondition: return "unknown_condition";
    case ErrorCode::Parse: return "parse_error";
    case ErrorCode::Io: return "io_error";
    case ErrorCode::Storage: return "storage_error";
  }
  return "unknown";
}

std::string_view to_string(Polarity p) {
  return p == Polarity::Positive ? "positive" : "negative";
}

Polarity parse_polarity(std::string_view s) {
  const std::string lower = to_lower_ascii(s);
  if (lower == "positive" || lower == "pos") return Polarity::Positive;
  if (lower == "negative" || lower == "neg") return Polarity::Negative;
  throw Error(ErrorCode::Parse, "unknown label '" + std::string(s) + "'");
}

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::Bow: return "bow";
    case Condition::Perturbation: return "perturbation";
    case Condition::Simplification: return "simplification";
    case Condition::ConceptBow: return "concept_bow";
    case Condition::ConceptAnnotation: return "concept_annotation";
  }
  return "";
}

std::optional<Condition> try_parse_condition(std::string_view tag) {
  for (Condition c : kAllConditions) {
    if (to_string(c) == tag) return c;
  }
  return std::nullopt;
}

Condition parse_condition(std::string_view tag) {
  if (auto c = try_parse_condition(tag)) return *c;
  throw Error(ErrorCode::UnknownCondition, "unknown condition '" + std::string(tag) + "'");
}

std::string sha256_hex(std::string_view data) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw Error(ErrorCode::Io, "sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string fold_case(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  const auto* p = reinterpret_cast<const uint8_t*>(s.data());
  const auto length = static_cast<int32_t>(s.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(p, i, length, c);
    if (c < 0) continue;
    c = u_foldCase(c, U_FOLD_CASE_DEFAULT);
    uint8_t buf[U8_MAX_LENGTH];
    int32_t n = 0;
    U8_APPEND_UNSAFE(buf, n, c);
    out.append(reinterpret_cast<const char*>(buf), static_cast<std::size_t>(n));
  }
  return trim(out);
}

}  // namespace elicit
