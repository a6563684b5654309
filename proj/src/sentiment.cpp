#include "toxpipe/sentiment.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace toxpipe {

void Lexicon::add(std::string word, double polarity, double subjectivity) {
  if (!(polarity >= -1.0 && polarity <= 1.0))
    throw std::invalid_argument("lexicon: polarity out of [-1,1] for '" + word + "'");
  if (!(subjectivity >= 0.0 && subjectivity <= 1.0))
    throw std::invalid_argument("lexicon: subjectivity out of [0,1] for '" + word + "'");
  entries_.insert_or_assign(std::move(word), Sentiment{polarity, subjectivity});
}

const Sentiment* Lexicon::find(std::string_view word) const {
  auto it = entries_.find(std::string(word));
  return it == entries_.end() ? nullptr : &it->second;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open lexicon " + path.string());
  Lexicon lex;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::string word;
    if (!(fields >> word) || word[0] == '#') continue;
    double polarity = 0, subjectivity = 0;
    std::string extra;
    if (!(fields >> polarity >> subjectivity) || (fields >> extra))
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected 'word polarity subjectivity'");
    try {
      lex.add(std::move(word), polarity, subjectivity);
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return lex;
}

Sentiment score(std::string_view cleaned_text, const Lexicon& lexicon) {
  double polarity = 0, subjectivity = 0;
  std::size_t matched = 0;
  for (const auto& tok : split_tokens(cleaned_text)) {
    if (const Sentiment* s = lexicon.find(tok)) {
      polarity += s->polarity;
      subjectivity += s->subjectivity;
      ++matched;
    }
  }
  if (matched == 0) return {};
  return {polarity / static_cast<double>(matched), subjectivity / static_cast<double>(matched)};
}

ClassSentimentReport class_sentiment_report(const Corpus& corpus, const Lexicon& lexicon,
                                            const CleanConfig& config) {
  if (corpus.empty()) throw DataError("class_sentiment_report: empty corpus");
  std::array<double, kNumClasses> pol{}, subj{};
  std::array<std::size_t, kNumClasses> n{};
  for (const auto& ex : corpus) {
    const Sentiment s = score(clean(ex.text, config), lexicon);
    pol[ex.label] += s.polarity;
    subj[ex.label] += s.subjectivity;
    ++n[ex.label];
  }
  ClassSentimentReport report;
  for (int k = 0; k < kNumClasses; ++k) {
    if (n[k] == 0) continue;
    const double d = static_cast<double>(n[k]);
    report[k] = ClassSentiment{n[k], {pol[k] / d, subj[k] / d}};
  }
  return report;
}

void to_json(nlohmann::json& j, const ClassSentimentReport& report) {
  j = nlohmann::json::object();
  for (int k = 0; k < kNumClasses; ++k) {
    if (!report[k]) continue;
    j[std::to_string(k)] = {{"class", kClassNames[k]},
                            {"examples", report[k]->examples},
                            {"polarity", report[k]->mean.polarity},
                            {"subjectivity", report[k]->mean.subjectivity}};
  }
}

}  // namespace toxpipe
