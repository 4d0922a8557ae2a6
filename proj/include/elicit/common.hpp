#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace elicit {

enum class ErrorCode {
  InvalidArgument,
  InvalidRating,
  EmptyCorpus,
  InsufficientData,
  InvalidK,
  InvalidM,
  MissingInstance,
  ValidationFailed,
  VersionedFormat,
  CorruptFile,
  InvalidAssignment,
  Lifecycle,
  NotFound,
  SessionLocked,
  OutOfQueue,
  ConditionMismatch,
  UnknownCondition,
  Parse,
  Io,
  Storage,
};

std::string_view to_string(ErrorCode code);

/// One broken rule in a submitted record. `code` is stable and machine-readable;
/// `message` is for humans; `field` points at the offending part of the record.
struct Violation {
  std::string code;
  std::string message;
  std::string field;

  bool operator==(const Violation&) const = default;
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::vector<Violation> violations = {})
      : std::runtime_error(message), code_(code), violations_(std::move(violations)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  ErrorCode code_;
  std::vector<Violation> violations_;
};

enum class Polarity : std::uint8_t { Positive, Negative };

constexpr Polarity opposite(Polarity p) noexcept {
  return p == Polarity::Positive ? Polarity::Negative : Polarity::Positive;
}

// label XOR negated
constexpr Polarity flip_if(Polarity p, bool negated) noexcept {
  return negated ? opposite(p) : p;
}

std::string_view to_string(Polarity p);
Polarity parse_polarity(std::string_view s);

/// The five justification elicitation methods, in canonical order.
enum class Condition : std::uint8_t {
  Bow,
  Perturbation,
  Simplification,
  ConceptBow,
  ConceptAnnotation,
};

inline constexpr Condition kAllConditions[] = {
    Condition::Bow, Condition::Perturbation, Condition::Simplification,
    Condition::ConceptBow, Condition::ConceptAnnotation};

std::string_view to_string(Condition c);
std::optional<Condition> try_parse_condition(std::string_view tag);
// Throws UnknownCondition.
Condition parse_condition(std::string_view tag);

std::string sha256_hex(std::string_view data);

std::string to_lower_ascii(std::string_view s);
std::string trim(std::string_view s);
// Unicode case folding plus ASCII whitespace trim; key for case-insensitive names.
std::string fold_case(std::string_view s);

}  // namespace elicit
