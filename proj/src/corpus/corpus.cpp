#include "elicit/corpus.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <istream>

#include "elicit/rng.hpp"

namespace elicit::corpus {

using nlohmann::json;

std::string_view to_string(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Test: return "test";
    case Split::Unassigned: return "unassigned";
  }
  return "";
}

Split parse_split(std::string_view s) {
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  if (s == "unassigned") return Split::Unassigned;
  throw Error(ErrorCode::Parse, "unknown split '" + std::string(s) + "'");
}

ClassCounts Corpus::counts(Split split) const {
  ClassCounts c;
  for (const auto& inst : instances) {
    if (inst.split != split) continue;
    (inst.label == Polarity::Positive ? c.positive : c.negative)++;
  }
  return c;
}

ClassCounts Corpus::counts() const {
  ClassCounts c;
  for (const auto& inst : instances) (inst.label == Polarity::Positive ? c.positive : c.negative)++;
  return c;
}

const Instance* Corpus::find(std::string_view id) const {
  // Ids are assigned in increasing order, so a binary search is valid for
  // ingested corpora; fall back to a scan for hand-built ones.
  auto it = std::lower_bound(instances.begin(), instances.end(), id,
                             [](const Instance& a, std::string_view b) { return a.id < b; });
  if (it != instances.end() && it->id == id) return &*it;
  for (const auto& inst : instances) {
    if (inst.id == id) return &inst;
  }
  return nullptr;
}

const Instance& Corpus::at(std::string_view id) const {
  if (const Instance* inst = find(id)) return *inst;
  throw Error(ErrorCode::MissingInstance, "no instance with id '" + std::string(id) + "'");
}

std::vector<const Instance*> Corpus::in_split(Split split) const {
  std::vector<const Instance*> out;
  for (const auto& inst : instances) {
    if (inst.split == split) out.push_back(&inst);
  }
  return out;
}

std::optional<Polarity> star_to_label(int stars) {
  switch (stars) {
    case 1:
    case 2: return Polarity::Negative;
    case 3: return std::nullopt;
    case 4:
    case 5: return Polarity::Positive;
    default:
      throw Error(ErrorCode::InvalidRating,
                  "star rating " + std::to_string(stars) + " outside [1,5]");
  }
}

std::string make_instance_id(std::size_t ordinal) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "inst-%06zu", ordinal);
  return buf;
}

namespace {

class CorpusBuilder {
 public:
  explicit CorpusBuilder(std::uint64_t seed) { corpus_.seed = seed; }

  void add(std::size_t ordinal, const RawReview& r) {
    ++seen_;
    if (trim(r.text).empty()) {
      malformed(ordinal, "empty text");
      return;
    }
    std::optional<Polarity> label;
    try {
      label = star_to_label(r.stars);
    } catch (const Error& e) {
      malformed(ordinal, e.what());
      return;
    }
    ++usable_;
    if (!label) {
      ++corpus_.skipped_neutral;
      return;
    }
    corpus_.instances.push_back(
        Instance{make_instance_id(ordinal), r.text, *label, r.stars, Split::Unassigned});
  }

  // A line that never became a RawReview.
  void reject(std::size_t ordinal, const std::string& why) {
    ++seen_;
    malformed(ordinal, why);
  }

  Corpus finish() && {
    if (usable_ == 0) {
      throw Error(ErrorCode::EmptyCorpus,
                  seen_ == 0 ? "input contains no records" : "input contains no valid records");
    }
    if (corpus_.skipped_neutral > 0) {
      spdlog::info("skipped {} neutral (3-star) records", corpus_.skipped_neutral);
    }
    return std::move(corpus_);
  }

 private:
  void malformed(std::size_t ordinal, const std::string& why) {
    spdlog::warn("record {}: {}; skipped", ordinal, why);
    ++corpus_.skipped_malformed;
  }

  Corpus corpus_;
  std::size_t seen_ = 0;
  std::size_t usable_ = 0;
};

}  // namespace

Corpus ingest(std::span<const RawReview> records, std::uint64_t seed) {
  CorpusBuilder builder(seed);
  for (std::size_t i = 0; i < records.size(); ++i) builder.add(i, records[i]);
  return std::move(builder).finish();
}

Corpus ingest_jsonl(std::istream& in, std::uint64_t seed) {
  CorpusBuilder builder(seed);
  std::string line;
  std::size_t ordinal = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const std::size_t this_ordinal = ordinal++;
    json doc = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded() || !doc.is_object()) {
      builder.reject(this_ordinal, "not a JSON object");
      continue;
    }
    auto text = doc.find("text");
    auto stars = doc.find("stars");
    if (text == doc.end() || !text->is_string() || stars == doc.end() ||
        !stars->is_number_integer()) {
      builder.reject(this_ordinal, "expected {\"text\": string, \"stars\": integer}");
      continue;
    }
    builder.add(this_ordinal, RawReview{text->get<std::string>(), stars->get<int>()});
  }
  return std::move(builder).finish();
}

Corpus balanced_split(const Corpus& corpus, std::size_t train_n, std::size_t test_n,
                      std::uint64_t seed) {
  if (train_n % 2 != 0 || test_n % 2 != 0) {
    throw Error(ErrorCode::InvalidArgument, "train_n and test_n must be even");
  }
  const std::size_t need_train = train_n / 2;
  const std::size_t need_test = test_n / 2;

  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  for (std::size_t i = 0; i < corpus.instances.size(); ++i) {
    (corpus.instances[i].label == Polarity::Positive ? pos : neg).push_back(i);
  }
  for (auto [label, idx] : {std::pair{Polarity::Positive, &pos}, std::pair{Polarity::Negative, &neg}}) {
    if (idx->size() < need_train + need_test) {
      throw Error(ErrorCode::InsufficientData,
                  "not enough " + std::string(to_string(label)) + " instances: need " +
                      std::to_string(need_train + need_test) + ", have " +
                      std::to_string(idx->size()));
    }
  }

  Corpus out = corpus;
  for (auto& inst : out.instances) inst.split = Split::Unassigned;

  Rng rng(seed);
  for (auto* idx : {&pos, &neg}) {
    rng.shuffle(std::span(*idx));
    for (std::size_t k = 0; k < need_train; ++k) out.instances[(*idx)[k]].split = Split::Train;
    for (std::size_t k = need_train; k < need_train + need_test; ++k) {
      out.instances[(*idx)[k]].split = Split::Test;
    }
  }
  out.seed = seed;
  out.train_n = train_n;
  out.test_n = test_n;
  out.balanced = true;
  return out;
}

SplitSizes default_split_sizes(const Corpus& corpus) {
  const ClassCounts c = corpus.counts();
  const std::size_t per_class = std::min(c.positive, c.negative);
  const std::size_t test_per_class = per_class / 5;
  return SplitSizes{2 * (per_class - test_per_class), 2 * test_per_class};
}

json to_json(const Corpus& corpus) {
  json instances = json::array();
  for (const auto& inst : corpus.instances) {
    instances.push_back({{"id", inst.id},
                         {"text", inst.text},
                         {"label", to_string(inst.label)},
                         {"stars", inst.stars},
                         {"split", to_string(inst.split)}});
  }
  auto counts = [&](Split s) {
    ClassCounts c = corpus.counts(s);
    return json{{"positive", c.positive}, {"negative", c.negative}};
  };
  return json{{"schema_version", kCorpusSchemaVersion},
              {"seed", corpus.seed},
              {"balanced", corpus.balanced},
              {"split", {{"train_n", corpus.train_n},
                         {"test_n", corpus.test_n},
                         {"train", counts(Split::Train)},
                         {"test", counts(Split::Test)},
                         {"unassigned", counts(Split::Unassigned)}}},
              {"skipped", {{"neutral", corpus.skipped_neutral},
                           {"malformed", corpus.skipped_malformed}}},
              {"instances", std::move(instances)}};
}

Corpus corpus_from_json(const json& doc) {
  try {
    const int version = doc.at("schema_version").get<int>();
    if (version != kCorpusSchemaVersion) {
      throw Error(ErrorCode::VersionedFormat,
                  "corpus file has schema version " + std::to_string(version) +
                      ", this build reads version " + std::to_string(kCorpusSchemaVersion));
    }
    Corpus c;
    c.seed = doc.at("seed").get<std::uint64_t>();
    c.balanced = doc.at("balanced").get<bool>();
    c.train_n = doc.at("split").at("train_n").get<std::size_t>();
    c.test_n = doc.at("split").at("test_n").get<std::size_t>();
    c.skipped_neutral = doc.at("skipped").at("neutral").get<std::size_t>();
    c.skipped_malformed = doc.at("skipped").at("malformed").get<std::size_t>();
    for (const auto& j : doc.at("instances")) {
      Instance inst;
      inst.id = j.at("id").get<std::string>();
      inst.text = j.at("text").get<std::string>();
      inst.label = parse_polarity(j.at("label").get<std::string>());
      inst.stars = j.at("stars").get<int>();
      inst.split = parse_split(j.at("split").get<std::string>());
      auto expected = star_to_label(inst.stars);
      if (!expected || *expected != inst.label) {
        throw Error(ErrorCode::CorruptFile, "instance " + inst.id + " label disagrees with stars");
      }
      c.instances.push_back(std::move(inst));
    }
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("malformed corpus document: ") + e.what());
  }
}

std::string serialize(const Corpus& corpus) { return to_json(corpus).dump(2) + "\n"; }

Corpus deserialize(std::string_view text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::Parse, "corpus file is not valid JSON");
  return corpus_from_json(doc);
}

}  // namespace elicit::corpus
