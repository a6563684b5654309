#include "toxpipe/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <unordered_map>

#include "toxpipe/csv.hpp"

namespace toxpipe {

namespace {

int parse_int_cell(const std::string& cell, std::size_t line, const char* column) {
  if (cell.empty())
    throw DataError("line " + std::to_string(line) + ": missing value in column '" + column + "'");
  int value = 0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw DataError("line " + std::to_string(line) + ": non-integer value '" + cell +
                    "' in column '" + column + "'");
  return value;
}

bool is_blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

Corpus parse_csv(std::istream& in) {
  csv::Reader reader(in);
  csv::Row header;
  if (!reader.next(header)) throw DataError("csv: missing header row");

  std::size_t offset = 0;
  if (header.size() == kColumns.size() + 1 && (header[0].empty() || header[0] == "Unnamed: 0"))
    offset = 1;
  if (header.size() != kColumns.size() + offset)
    throw DataError("csv: expected columns count,hate_speech,offensive_language,neither,class,tweet");
  for (std::size_t k = 0; k < kColumns.size(); ++k) {
    if (header[k + offset] != kColumns[k])
      throw DataError("csv: expected column '" + std::string(kColumns[k]) + "' but found '" +
                      header[k + offset] + "'");
  }

  Corpus corpus;
  csv::Row row;
  while (reader.next(row)) {
    const std::size_t line = reader.line();
    if (row.size() == 1 && row[0].empty()) continue;
    if (row.size() != header.size())
      throw DataError("line " + std::to_string(line) + ": expected " +
                      std::to_string(header.size()) + " cells, found " + std::to_string(row.size()));
    LabeledExample ex;
    ex.id = corpus.size();
    ex.count = parse_int_cell(row[offset + 0], line, kColumns[0]);
    for (int k = 0; k < kNumClasses; ++k) {
      ex.votes[k] = parse_int_cell(row[offset + 1 + k], line, kColumns[1 + k]);
      if (ex.votes[k] < 0)
        throw DataError("line " + std::to_string(line) + ": negative vote count");
    }
    ex.label = parse_int_cell(row[offset + 4], line, kColumns[4]);
    if (ex.label < 0 || ex.label >= kNumClasses)
      throw DataError("line " + std::to_string(line) + ": class " + std::to_string(ex.label) +
                      " outside {0,1,2}");
    if (ex.count < 1) throw DataError("line " + std::to_string(line) + ": count must be >= 1");
    if (ex.votes[0] + ex.votes[1] + ex.votes[2] != ex.count)
      throw DataError("line " + std::to_string(line) + ": votes do not sum to count");
    ex.text = std::move(row[offset + 5]);
    corpus.push_back(std::move(ex));
  }
  return corpus;
}

Corpus load_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_csv(in);
}

void write_csv(std::ostream& out, const Corpus& corpus) {
  csv::write_row(out, csv::Row(kColumns.begin(), kColumns.end()));
  for (const auto& ex : corpus) {
    csv::write_row(out, {std::to_string(ex.count), std::to_string(ex.votes[0]),
                         std::to_string(ex.votes[1]), std::to_string(ex.votes[2]),
                         std::to_string(ex.label), ex.text});
  }
}

void write_csv(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_csv(out, corpus);
}

ValidationReport validate(const Corpus& corpus) {
  ValidationReport report;
  std::unordered_map<std::string_view, std::size_t> first_group;
  for (const auto& ex : corpus) {
    if (is_blank(ex.text)) {
      report.missing_cells.push_back({ex.id, "tweet"});
    } else {
      auto [it, inserted] = first_group.try_emplace(ex.text, report.duplicate_texts.size());
      if (inserted)
        report.duplicate_texts.push_back({ex.id});
      else
        report.duplicate_texts[it->second].push_back(ex.id);
    }
    const int top = *std::max_element(ex.votes.begin(), ex.votes.end());
    if (std::count(ex.votes.begin(), ex.votes.end(), top) >= 2) report.equal_vote_rows.push_back(ex.id);
    if (ex.votes[ex.label] < top) report.label_contradictions.push_back(ex.id);
  }
  std::erase_if(report.duplicate_texts, [](const auto& g) { return g.size() < 2; });
  return report;
}

std::array<std::size_t, kNumClasses> class_counts(const Corpus& corpus) {
  std::array<std::size_t, kNumClasses> counts{};
  for (const auto& ex : corpus) ++counts.at(static_cast<std::size_t>(ex.label));
  return counts;
}

std::array<double, kNumClasses> class_distribution(const Corpus& corpus) {
  if (corpus.empty()) throw DataError("class_distribution: empty corpus");
  const auto counts = class_counts(corpus);
  std::array<double, kNumClasses> out{};
  for (int k = 0; k < kNumClasses; ++k)
    out[k] = static_cast<double>(counts[k]) / static_cast<double>(corpus.size());
  return out;
}

namespace {

// Splits n items into three parts as close to ratios*n as possible:
// floors first, then the remainder goes to the largest fractional parts.
std::array<std::size_t, 3> allocate(std::size_t n, const std::array<double, 3>& ratios) {
  std::array<std::size_t, 3> parts{};
  std::array<double, 3> frac{};
  std::size_t used = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = ratios[i] * static_cast<double>(n);
    parts[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    frac[i] = exact - static_cast<double>(parts[i]);
    used += parts[i];
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return frac[a] > frac[b]; });
  for (std::size_t r = 0; used < n; ++r, ++used) ++parts[order[r % 3]];
  return parts;
}

}  // namespace

Split split(const Corpus& corpus, const SplitSpec& spec) {
  double sum = 0;
  for (double r : spec.ratios) {
    if (!(r > 0.0)) throw std::invalid_argument("split: every ratio must be > 0");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("split: ratios must sum to 1");

  std::vector<std::vector<std::size_t>> groups;
  if (spec.stratified) {
    groups.resize(kNumClasses);
    for (std::size_t i = 0; i < corpus.size(); ++i)
      groups[static_cast<std::size_t>(corpus[i].label)].push_back(i);
  } else {
    groups.emplace_back(corpus.size());
    std::iota(groups[0].begin(), groups[0].end(), std::size_t{0});
  }

  std::mt19937_64 rng(spec.seed);
  std::array<std::vector<std::size_t>, 3> parts;
  for (auto& group : groups) {
    std::shuffle(group.begin(), group.end(), rng);
    const auto sizes = allocate(group.size(), spec.ratios);
    auto it = group.begin();
    for (int p = 0; p < 3; ++p) {
      parts[p].insert(parts[p].end(), it, it + static_cast<std::ptrdiff_t>(sizes[p]));
      it += static_cast<std::ptrdiff_t>(sizes[p]);
    }
  }

  Split out;
  std::array<Corpus*, 3> dest{&out.train, &out.validation, &out.test};
  for (int p = 0; p < 3; ++p) {
    if (parts[p].empty())
      throw DataError("split: corpus too small, part " + std::to_string(p) + " would be empty");
    std::sort(parts[p].begin(), parts[p].end());
    dest[p]->reserve(parts[p].size());
    for (std::size_t i : parts[p]) dest[p]->push_back(corpus[i]);
  }
  return out;
}

void to_json(nlohmann::json& j, const ValidationReport& r) {
  j = nlohmann::json::object();
  j["missing_cells"] = nlohmann::json::array();
  for (const auto& m : r.missing_cells) j["missing_cells"].push_back({{"row", m.row}, {"column", m.column}});
  j["duplicate_texts"] = r.duplicate_texts;
  j["equal_vote_rows"] = r.equal_vote_rows;
  j["label_contradictions"] = r.label_contradictions;
}

void to_json(nlohmann::json& j, const SplitSpec& s) {
  j = {{"ratios", s.ratios}, {"seed", s.seed}, {"stratified", s.stratified}};
}

void from_json(const nlohmann::json& j, SplitSpec& s) {
  j.at("ratios").get_to(s.ratios);
  j.at("seed").get_to(s.seed);
  j.at("stratified").get_to(s.stratified);
}

}  // namespace toxpipe
