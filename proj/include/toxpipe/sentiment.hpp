#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "toxpipe/corpus.hpp"
#include "toxpipe/preprocess.hpp"

namespace toxpipe {

struct Sentiment {
  double polarity = 0.0;      // [-1, 1]
  double subjectivity = 0.0;  // [0, 1]
};

class Lexicon {
 public:
  Lexicon() = default;

  // Throws std::invalid_argument when either score is out of range.
  void add(std::string word, double polarity, double subjectivity);
  const Sentiment* find(std::string_view word) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, Sentiment> entries_;
};

// One `word polarity subjectivity` triple per line, whitespace-delimited.
// Blank lines and '#' comments are skipped.
Lexicon load_lexicon(const std::filesystem::path& path);

// Mean of the matched tokens' scores; (0, 0) when nothing matches.
Sentiment score(std::string_view cleaned_text, const Lexicon& lexicon);

struct ClassSentiment {
  std::size_t examples = 0;
  Sentiment mean;
};

using ClassSentimentReport = std::array<std::optional<ClassSentiment>, kNumClasses>;

ClassSentimentReport class_sentiment_report(const Corpus& corpus, const Lexicon& lexicon,
                                            const CleanConfig& config);

void to_json(nlohmann::json& j, const ClassSentimentReport& report);

}  // namespace toxpipe
