#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "elicit/common.hpp"

namespace elicit::corpus {

inline constexpr int kCorpusSchemaVersion = 1;

struct RawReview {
  std::string text;
  int stars = 0;
};

enum class Split : std::uint8_t { Train, Test, Unassigned };

std::string_view to_string(Split s);
Split parse_split(std::string_view s);

struct Instance {
  std::string id;
  std::string text;
  Polarity label = Polarity::Positive;
  int stars = 0;
  Split split = Split::Unassigned;

  bool operator==(const Instance&) const = default;
};

struct ClassCounts {
  std::size_t positive = 0;
  std::size_t negative = 0;

  std::size_t total() const { return positive + negative; }
  bool operator==(const ClassCounts&) const = default;
};

class Corpus {
 public:
  std::vector<Instance> instances;
  std::uint64_t seed = 0;
  bool balanced = false;
  std::size_t train_n = 0;
  std::size_t test_n = 0;
  // Records dropped at ingest: neutral ratings and malformed lines.
  std::size_t skipped_neutral = 0;
  std::size_t skipped_malformed = 0;

  std::size_t size() const { return instances.size(); }
  bool empty() const { return instances.empty(); }

  ClassCounts counts(Split split) const;
  ClassCounts counts() const;

  const Instance* find(std::string_view id) const;
  const Instance& at(std::string_view id) const;  // throws MissingInstance

  std::vector<const Instance*> in_split(Split split) const;

  bool operator==(const Corpus&) const = default;
};

/// 1,2 -> Negative; 4,5 -> Positive; 3 -> nullopt. Anything else throws
/// InvalidRating.
std::optional<Polarity> star_to_label(int stars);

std::string make_instance_id(std::size_t ordinal);

/// Labels every record and assigns ids by input ordinal. Neutral records are
/// counted in `skipped_neutral`; records breaking RawReview's invariants are
/// logged and counted in `skipped_malformed`. Throws EmptyCorpus when no
/// record is usable at all.
Corpus ingest(std::span<const RawReview> records, std::uint64_t seed);

/// Newline-delimited JSON {"text": string, "stars": integer}. Blank lines are
/// ignored; unparsable lines are treated as malformed records.
Corpus ingest_jsonl(std::istream& in, std::uint64_t seed);

/// Reassigns splits: exactly train_n/2 + train_n/2 Train and test_n/2 + test_n/2
/// Test instances, everything else Unassigned. Each class is shuffled with the
/// seed and truncated.
Corpus balanced_split(const Corpus& corpus, std::size_t train_n, std::size_t test_n,
                      std::uint64_t seed);

/// 80/20 split over the largest balanced subset.
struct SplitSizes {
  std::size_t train_n = 0;
  std::size_t test_n = 0;
};
SplitSizes default_split_sizes(const Corpus& corpus);

nlohmann::json to_json(const Corpus& corpus);
Corpus corpus_from_json(const nlohmann::json& doc);

// Stable serialization used for hashing and files.
std::string serialize(const Corpus& corpus);
Corpus deserialize(std::string_view text);

}  // namespace elicit::corpus
