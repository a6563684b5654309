#pragma once

// Fixtures shared by the unit tests and the acceptance binary.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "toxpipe/corpus.hpp"
#include "toxpipe/model/trainer.hpp"

namespace toxpipe::support {

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "toxpipe-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::filesystem::path write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Three classes with disjoint keyword ids. Ids 1..3*keywords are keywords
// (class k owns the k-th block); the rest up to vocab are shared filler.
// Every example carries one or two keywords of its class at random positions.
struct KeywordTask {
  std::size_t vocab = 60;
  std::size_t keywords = 5;
  std::size_t min_len = 3;
  std::size_t max_tokens = 20;
  std::size_t max_len = 32;
};

inline model::EncodedDataset keyword_dataset(const KeywordTask& task, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int first_filler = static_cast<int>(3 * task.keywords + 1);
  std::uniform_int_distribution<int> filler(first_filler, static_cast<int>(task.vocab));
  std::uniform_int_distribution<int> keyword(0, static_cast<int>(task.keywords) - 1);
  std::uniform_int_distribution<std::size_t> length(task.min_len, task.max_tokens);
  model::EncodedDataset data;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 3);
    const std::size_t len = length(rng);
    Sequence seq(task.max_len, 0);
    for (std::size_t t = 0; t < len; ++t) seq[t] = filler(rng);
    std::uniform_int_distribution<std::size_t> pos(0, len - 1);
    const int hits = 1 + static_cast<int>(rng() % 2);
    for (int h = 0; h < hits; ++h)
      seq[pos(rng)] = 1 + label * static_cast<int>(task.keywords) + keyword(rng);
    data.inputs.push_back(std::move(seq));
    data.labels.push_back(label);
  }
  return data;
}

// A small labelled corpus whose class is signalled by class-specific words.
inline Corpus keyword_corpus(std::size_t n, std::uint64_t seed) {
  static const std::vector<std::vector<std::string>> words = {
      {"vile", "scum", "vermin", "filth", "subhuman"},
      {"trash", "idiot", "stupid", "loser", "clown"},
      {"sunny", "coffee", "garden", "music", "weekend"}};
  static const std::vector<std::string> filler = {"the", "today", "this", "people", "really", "just",
                                                  "about", "going", "see", "time", "know", "new"};
  std::mt19937_64 rng(seed);
  Corpus corpus;
  for (std::size_t i = 0; i < n; ++i) {
    LabeledExample ex;
    ex.id = i;
    ex.label = static_cast<int>(i % 3);
    ex.count = 3;
    ex.votes = {0, 0, 0};
    ex.votes[ex.label] = 3;
    std::string text = "RT @user" + std::to_string(rng() % 100) + ":";
    const std::size_t len = 3 + rng() % 6;
    for (std::size_t t = 0; t < len; ++t) {
      text += ' ';
      text += (rng() % 3 == 0) ? words[ex.label][rng() % 5] : filler[rng() % filler.size()];
    }
    text += ' ' + words[ex.label][rng() % 5] + " #tag" + std::to_string(i);
    ex.text = text;
    corpus.push_back(ex);
  }
  return corpus;
}

}  // namespace toxpipe::support
