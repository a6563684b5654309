#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "toxpipe/corpus.hpp"
#include "toxpipe/embed.hpp"

namespace toxpipe {

using Tokens = std::vector<std::string>;
using StopWords = std::unordered_set<std::string>;

enum class AugmentOp { synonym_replace, random_insert, random_swap, random_delete };

struct AugmentStep {
  AugmentOp op;
  // k replacements, n insertions, n swaps, or deletion probability p.
  double intensity;
};

struct AugmentPolicy {
  std::vector<AugmentStep> ops;
  StopWords stopwords;
  std::uint64_t seed = 0;

  // synonym_replace(2) -> random_insert(1) -> random_swap(1) -> random_delete(0.1)
  static AugmentPolicy composite(std::uint64_t seed = 0);
  void check() const;
};

StopWords default_stopwords();
StopWords load_stopwords(const std::filesystem::path& path);

// {"ops": [{"op": "synonym_replace", "k": 2}, ...], "stopwords": "path", "seed": 7}
AugmentPolicy policy_from_json(const nlohmann::json& j);
nlohmann::json policy_to_json(const AugmentPolicy& policy);

// Per-class targets relative to the majority-class count; nullopt leaves a
// class untouched.
struct RebalanceTarget {
  std::array<std::optional<double>, kNumClasses> ratio;

  // Hate to half the majority; the rest untouched.
  static RebalanceTarget standard();
};

// Memoized nearest-neighbor synonyms over an embedding table. Not thread-safe.
class SynonymLookup {
 public:
  explicit SynonymLookup(const EmbeddingTable& table) : table_(table) {}
  const EmbeddingTable& table() const { return table_; }
  bool has(const std::string& word) const { return table_.contains(word); }
  // nullopt when the word has no embedding or the table has no other word.
  std::optional<std::string> synonym(const std::string& word) const;

 private:
  const EmbeddingTable& table_;
  mutable std::unordered_map<std::string, std::optional<std::string>> cache_;
};

Tokens synonym_replace(const Tokens& tokens, std::size_t k, const SynonymLookup& synonyms,
                       const StopWords& stopwords, std::uint64_t seed);
Tokens synonym_replace(const Tokens& tokens, std::size_t k, const EmbeddingTable& table,
                       const StopWords& stopwords, std::uint64_t seed);

Tokens random_insert(const Tokens& tokens, std::size_t n, const SynonymLookup& synonyms,
                     const StopWords& stopwords, std::uint64_t seed);
Tokens random_insert(const Tokens& tokens, std::size_t n, const EmbeddingTable& table,
                     const StopWords& stopwords, std::uint64_t seed);

Tokens random_swap(const Tokens& tokens, std::size_t n, std::uint64_t seed);
Tokens random_delete(const Tokens& tokens, double p, std::uint64_t seed);

LabeledExample augment_example(const LabeledExample& example, const AugmentPolicy& policy,
                               const SynonymLookup& synonyms);
LabeledExample augment_example(const LabeledExample& example, const AugmentPolicy& policy,
                               const EmbeddingTable& table);

// Target count for class k is max(count_k, ceil(ratio_k * majority_count)).
std::array<std::size_t, kNumClasses> rebalance_targets(const std::array<std::size_t, kNumClasses>& counts,
                                                       const RebalanceTarget& target);

Corpus rebalance(const Corpus& train, const RebalanceTarget& target, const AugmentPolicy& policy,
                 const EmbeddingTable& table);

}  // namespace toxpipe
