#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace toxpipe {

inline constexpr int kNumClasses = 3;
inline constexpr std::array<const char*, kNumClasses> kClassNames = {"hate", "offensive", "neither"};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LabeledExample {
  std::size_t id = 0;
  int count = 0;
  std::array<int, kNumClasses> votes{};
  int label = 0;
  std::string text;
  bool synthetic = false;

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

using Corpus = std::vector<LabeledExample>;

struct MissingCell {
  std::size_t row;
  std::string column;
  friend bool operator==(const MissingCell&, const MissingCell&) = default;
};

struct ValidationReport {
  std::vector<MissingCell> missing_cells;
  std::vector<std::vector<std::size_t>> duplicate_texts;
  std::vector<std::size_t> equal_vote_rows;
  std::vector<std::size_t> label_contradictions;

  bool clean() const {
    return missing_cells.empty() && duplicate_texts.empty() && equal_vote_rows.empty() &&
           label_contradictions.empty();
  }
  friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

void to_json(nlohmann::json& j, const ValidationReport& r);

struct SplitSpec {
  std::array<double, 3> ratios{0.8, 0.1, 0.1};
  std::uint64_t seed = 0;
  bool stratified = true;
};

void to_json(nlohmann::json& j, const SplitSpec& s);
void from_json(const nlohmann::json& j, SplitSpec& s);

struct Split {
  Corpus train;
  Corpus validation;
  Corpus test;
};

// Column names of the tweet CSV, in order.
inline constexpr std::array<const char*, 6> kColumns = {
    "count", "hate_speech", "offensive_language", "neither", "class", "tweet"};

// Parses the labeled tweet CSV. A single leading unnamed index column is
// tolerated and ignored. An empty tweet cell is kept (and reported by
// validate); empty or non-integer numeric cells are errors.
Corpus load_csv(const std::filesystem::path& path);
Corpus parse_csv(std::istream& in);

void write_csv(std::ostream& out, const Corpus& corpus);
void write_csv(const std::filesystem::path& path, const Corpus& corpus);

ValidationReport validate(const Corpus& corpus);

std::array<double, kNumClasses> class_distribution(const Corpus& corpus);
std::array<std::size_t, kNumClasses> class_counts(const Corpus& corpus);

Split split(const Corpus& corpus, const SplitSpec& spec);

}  // namespace toxpipe
