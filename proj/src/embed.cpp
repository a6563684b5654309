#include "toxpipe/embed.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

#include "toxpipe/preprocess.hpp"

namespace toxpipe {

Vocab::Vocab(std::vector<std::string> words) : words_(std::move(words)) {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!index_.emplace(words_[i], static_cast<int>(i + 1)).second)
      throw std::invalid_argument("vocab: duplicate word '" + words_[i] + "'");
  }
}

std::optional<int> Vocab::index(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocab::word(int index) const {
  if (index < 1 || static_cast<std::size_t>(index) > words_.size())
    throw std::out_of_range("vocab: index " + std::to_string(index));
  return words_[static_cast<std::size_t>(index - 1)];
}

std::string Vocab::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (const auto& w : words_) {
    for (unsigned char c : w) feed(c);
    feed('\n');
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Vocab build_vocab(const std::vector<std::vector<std::string>>& corpus, std::size_t num_words) {
  if (num_words == 0) throw std::invalid_argument("build_vocab: num_words must be >= 1");
  if (corpus.empty()) throw std::invalid_argument("build_vocab: empty corpus");

  struct Stat {
    std::size_t count = 0;
    std::size_t first = 0;
  };
  std::unordered_map<std::string, Stat> stats;
  std::vector<std::string> order;
  for (const auto& doc : corpus) {
    for (const auto& w : doc) {
      auto [it, inserted] = stats.try_emplace(w, Stat{0, order.size()});
      if (inserted) order.push_back(w);
      ++it->second.count;
    }
  }
  std::stable_sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
    return stats[a].count > stats[b].count;
  });
  if (order.size() > num_words) order.resize(num_words);
  return Vocab(std::move(order));
}

Sequence encode(const std::vector<std::string>& tokens, const Vocab& vocab) {
  Sequence out;
  out.reserve(tokens.size());
  for (const auto& t : tokens)
    if (auto idx = vocab.index(t)) out.push_back(*idx);
  return out;
}

Sequence pad(const Sequence& seq, std::size_t max_len) {
  if (max_len == 0) throw std::invalid_argument("pad: max_len must be >= 1");
  Sequence out(max_len, 0);
  std::copy_n(seq.begin(), std::min(seq.size(), max_len), out.begin());
  return out;
}

bool EmbeddingTable::add(std::string word, std::span<const float> vector) {
  if (vector.size() != dim_)
    throw std::invalid_argument("embedding: '" + word + "' has " + std::to_string(vector.size()) +
                                " components, expected " + std::to_string(dim_));
  if (!std::all_of(vector.begin(), vector.end(), [](float v) { return std::isfinite(v); }))
    throw std::invalid_argument("embedding: non-finite component for '" + word + "'");
  if (index_.contains(word)) return false;
  index_.emplace(word, words_.size());
  words_.push_back(std::move(word));
  data_.insert(data_.end(), vector.begin(), vector.end());
  double sq = 0;
  for (float v : vector) sq += static_cast<double>(v) * v;
  norms_.push_back(std::sqrt(sq));
  return true;
}

std::optional<std::span<const float>> EmbeddingTable::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return row(it->second);
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, std::size_t dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open embeddings " + path.string());
  EmbeddingTable table(dim);
  std::string line;
  std::vector<float> vec;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto parts = split_tokens(line);
    const auto where = path.string() + ":" + std::to_string(lineno);
    if (parts.size() != dim + 1)
      throw std::runtime_error(where + ": expected word and " + std::to_string(dim) +
                               " components, found " + std::to_string(parts.size() - 1));
    vec.assign(dim, 0.0f);
    for (std::size_t i = 0; i < dim; ++i) {
      const auto& s = parts[i + 1];
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), vec[i]);
      if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::runtime_error(where + ": non-numeric component '" + s + "'");
    }
    table.add(parts[0], vec);
  }
  return table;
}

EmbeddingMatrix build_matrix(const Vocab& vocab, const EmbeddingTable& table, std::size_t dim,
                             std::uint64_t init_seed) {
  if (table.dim() != dim) throw std::invalid_argument("build_matrix: table dimension mismatch");
  const auto rows = static_cast<nn::Index>(vocab.size() + 1);
  EmbeddingMatrix m = EmbeddingMatrix::Zero(rows, static_cast<nn::Index>(dim));
  std::uniform_real_distribution<float> uniform(-kUniformInitRange, kUniformInitRange);
  for (nn::Index r = 1; r < rows; ++r) {
    if (auto vec = table.find(vocab.word(static_cast<int>(r)))) {
      for (std::size_t c = 0; c < dim; ++c) m(r, static_cast<nn::Index>(c)) = (*vec)[c];
    } else {
      std::mt19937_64 rng(nn::mix_seed(init_seed, static_cast<std::uint64_t>(r)));
      for (std::size_t c = 0; c < dim; ++c) m(r, static_cast<nn::Index>(c)) = uniform(rng);
    }
  }
  return m;
}

double cosine(std::span<const float> a, std::span<const float> b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<std::string> nearest_neighbor(std::string_view word, const EmbeddingTable& table,
                                          std::size_t k) {
  if (k == 0) throw std::invalid_argument("nearest_neighbor: k must be >= 1");
  auto query = table.find(word);
  if (!query) throw std::invalid_argument("nearest_neighbor: unknown word '" + std::string(word) + "'");

  double qn = 0;
  for (float v : *query) qn += static_cast<double>(v) * v;
  qn = std::sqrt(qn);

  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (table.words()[i] == word) continue;
    const auto r = table.row(i);
    double dot = 0;
    for (std::size_t d = 0; d < r.size(); ++d) dot += static_cast<double>((*query)[d]) * r[d];
    const double denom = qn * table.norm(i);
    scored.emplace_back(denom == 0 ? 0.0 : dot / denom, i);
  }
  const std::size_t take = std::min(k, scored.size());
  auto better = [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return table.words()[a.second] < table.words()[b.second];
  };
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), better);
  std::vector<std::string> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(table.words()[scored[i].second]);
  return out;
}

}  // namespace toxpipe
