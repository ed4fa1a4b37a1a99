#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>

#include "replume/dataset.hpp"

namespace replume {

// Lowercase, whitespace-normalized text containing only letters, digits and
// single spaces.
struct CleanText {
  std::string text;
  std::string source_id;

  bool operator==(const CleanText&) const = default;
};

enum class LangOrigin { Dataset, Heuristic, Default };

struct LanguageTag {
  Language value = Language::EN;
  LangOrigin origin = LangOrigin::Default;

  bool operator==(const LanguageTag&) const = default;
};

// Cleaning rules, applied in this order:
//   1. whitespace-delimited tokens containing a URL marker (http://, https://,
//      www. or t.co/, case-insensitive) are dropped whole;
//   2. emoji and symbol codepoints are dropped;
//   3. punctuation is dropped (joining the fragments: "don't" -> "dont");
//   4. remaining letters are case-folded (ASCII plus Latin-1/Extended-A, so
//      accented Spanish letters survive);
//   5. whitespace is collapsed to single spaces and trimmed.
// Steps 2-4 are one codepoint pass keeping letters and digits only. Empty
// output is legal.
CleanText clean_text(std::string_view raw);
CleanText clean_text(const TweetRecord& record);

struct StopwordLists {
  std::unordered_set<std::string> english;
  std::unordered_set<std::string> spanish;

  static const StopwordLists& builtin();
  // Plain-text files, one word per line, UTF-8.
  static StopwordLists from_files(const std::filesystem::path& english_path,
                                  const std::filesystem::path& spanish_path);
};

// Dataset tag wins when present (text is never consulted). Otherwise counts
// stopword hits per language on the cleaned text and takes the argmax; ties or
// zero hits fall back to EN.
LanguageTag identify_language(const TweetRecord& record, const StopwordLists& stopwords);

}  // namespace replume
