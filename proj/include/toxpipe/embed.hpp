#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "toxpipe/nn/tensor.hpp"

namespace toxpipe {

using Sequence = std::vector<int>;

// Index 0 is padding; words occupy 1..size() in descending frequency.
class Vocab {
 public:
  Vocab() = default;
  explicit Vocab(std::vector<std::string> words);

  std::optional<int> index(std::string_view word) const;
  const std::string& word(int index) const;
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

  // FNV-1a over the ordered word list, hex encoded.
  std::string hash() const;

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
};

// Keeps the num_words most frequent words; ties go to the earlier first occurrence.
Vocab build_vocab(const std::vector<std::vector<std::string>>& corpus, std::size_t num_words);

// Out-of-vocabulary tokens are dropped.
Sequence encode(const std::vector<std::string>& tokens, const Vocab& vocab);

// Trailing zeros up to max_len; longer input keeps its first max_len entries.
Sequence pad(const Sequence& seq, std::size_t max_len);

class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim = 100) : dim_(dim) {}

  // Returns false (and keeps the existing vector) for a duplicate word.
  bool add(std::string word, std::span<const float> vector);

  std::optional<std::span<const float>> find(std::string_view word) const;
  bool contains(std::string_view word) const { return index_.contains(std::string(word)); }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  double norm(std::size_t i) const { return norms_[i]; }

 private:
  std::size_t dim_;
  std::vector<std::string> words_;
  std::vector<float> data_;
  std::vector<double> norms_;
  std::unordered_map<std::string, std::size_t> index_;
};

// `word v1 ... vdim` per line (space-delimited).
EmbeddingTable load_embeddings(const std::filesystem::path& path, std::size_t dim);

// (vocab.size()+1) x dim; row 0 is the zero padding row.
using EmbeddingMatrix = nn::Matrix<float>;

inline constexpr float kUniformInitRange = 0.05f;

// Rows for words found in the table copy their vectors; other rows are drawn
// uniformly from [-0.05, 0.05] with a per-row stream derived from init_seed.
EmbeddingMatrix build_matrix(const Vocab& vocab, const EmbeddingTable& table, std::size_t dim,
                             std::uint64_t init_seed);

// The k most cosine-similar words, excluding the query; ties by word order.
std::vector<std::string> nearest_neighbor(std::string_view word, const EmbeddingTable& table,
                                          std::size_t k);

double cosine(std::span<const float> a, std::span<const float> b);

}  // namespace toxpipe
