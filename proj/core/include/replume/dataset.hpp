#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace replume {

enum class Language { EN = 0, ES = 1 };
enum class Label { POSITIVE = 0, NEUTRAL = 1, NEGATIVE = 2, UNRELATED = 3 };
enum class Domain { Automotive = 0, Banking = 1, Universities = 2, Celebrities = 3 };

inline constexpr std::size_t kNumPolarityClasses = 3;

std::string_view language_str(Language value);
std::string_view label_str(Label value);
std::string_view domain_str(Domain value);
Language parse_language(std::string_view text);  // throws LanguageError
Label parse_label(std::string_view text);        // throws LabelError
Domain parse_domain(std::string_view text);      // throws ParseError

// One labeled sample in the corpus file format. `language` is empty when the
// source row carried no tag; routing then falls back to the stopword
// heuristic.
struct TweetRecord {
  std::string tweet_id;
  std::string entity_id;
  Domain domain = Domain::Automotive;
  std::optional<Language> language;
  std::string text;
  Label label = Label::NEUTRAL;

  bool operator==(const TweetRecord&) const = default;
};

// Tab-separated file with a fixed header; the free-text column comes last so
// an embedded tab shows up as a column-count mismatch instead of silently
// splitting the text. Throws ParseError with the offending line number.
std::vector<TweetRecord> load_tsv(const std::filesystem::path& path);

// Inverse of load_tsv. Rejects text containing tabs or line breaks.
void write_tsv(const std::filesystem::path& path, std::span<const TweetRecord> records);

// Drops UNRELATED records, preserving order.
std::vector<TweetRecord> filter_unrelated(std::vector<TweetRecord> records);

struct DistributionReport {
  std::uint64_t total = 0;
  std::map<std::string, std::uint64_t> by_label;
  std::map<std::string, std::uint64_t> by_language;  // "EN", "ES" or "untagged"
  std::map<std::string, std::uint64_t> by_domain;
  // label -> language -> domain -> count
  std::map<std::string, std::map<std::string, std::map<std::string, std::uint64_t>>> cells;
};

DistributionReport distribution_report(std::span<const TweetRecord> records);  // throws DataError on empty input
std::string distribution_json(const DistributionReport& report);  // counts plus fractions

// ---------------------------------------------------------------------------
// Synthetic corpus generation. The real corpus is not redistributable, so
// desk-scale runs train on generated bilingual text with planted per-class
// signal words, plus URLs / emoji / punctuation noise to exercise cleaning.

struct SynthLexicon {
  // signal[language][class]: words that determine a record's label.
  std::array<std::array<std::vector<std::string>, kNumPolarityClasses>, 2> signal;
  // noise[language]: class-neutral filler, disjoint from every signal list.
  std::array<std::vector<std::string>, 2> noise;

  static SynthLexicon builtin();
  static SynthLexicon from_json_file(const std::filesystem::path& path);
  void validate() const;  // throws DataError on empty or overlapping lists
};

struct SynthCell {
  Label label = Label::POSITIVE;
  Language language = Language::EN;
  std::size_t count = 0;
};

struct SynthSpec {
  std::vector<SynthCell> cells;
  // Probability that a record's text contains its class signal word; records
  // without one carry an irreducibly noisy label.
  double signal_strength = 1.0;
  double url_rate = 0.15;
  double emoji_rate = 0.2;
  double mention_rate = 0.3;
  // Fraction of records emitted with a blank language column.
  double untagged_rate = 0.0;
  std::size_t min_noise_words = 4;
  std::size_t max_noise_words = 9;

  std::size_t total() const;
  // Label fractions applied per language (70% EN / 30% ES), largest-remainder
  // rounded so the counts sum exactly to `total`.
  static SynthSpec proportions(std::size_t total,
                               const std::map<Label, double>& label_fractions,
                               double en_fraction = 0.7);
};

struct DatasetSplit {
  std::vector<TweetRecord> train;
  std::vector<TweetRecord> test;
};

// Deterministic for a fixed seed. Splits one third train / two thirds test,
// stratified per (label, language) cell with largest-remainder rounding so the
// train size is exactly round(total / 3).
DatasetSplit synth_generate(const SynthSpec& spec, std::uint64_t seed, const SynthLexicon& lexicon);

}  // namespace replume
