#include "toxpipe/augment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "toxpipe/preprocess.hpp"

namespace toxpipe {

namespace {

std::size_t as_count(double intensity) { return static_cast<std::size_t>(std::llround(intensity)); }

std::uint64_t op_seed(std::uint64_t policy_seed, std::size_t example_id, std::size_t op_index) {
  return nn::mix_seed(policy_seed, example_id, op_index);
}

bool eligible(const std::string& tok, const SynonymLookup& synonyms, const StopWords& stopwords) {
  return !stopwords.contains(tok) && synonyms.has(tok);
}

const char* op_name(AugmentOp op) {
  switch (op) {
    case AugmentOp::synonym_replace: return "synonym_replace";
    case AugmentOp::random_insert: return "random_insert";
    case AugmentOp::random_swap: return "random_swap";
    case AugmentOp::random_delete: return "random_delete";
  }
  return "?";
}

}  // namespace

AugmentPolicy AugmentPolicy::composite(std::uint64_t seed) {
  AugmentPolicy p;
  p.ops = {{AugmentOp::synonym_replace, 2},
           {AugmentOp::random_insert, 1},
           {AugmentOp::random_swap, 1},
           {AugmentOp::random_delete, 0.1}};
  p.stopwords = default_stopwords();
  p.seed = seed;
  return p;
}

void AugmentPolicy::check() const {
  for (const auto& s : ops) {
    if (!(s.intensity >= 0)) throw std::invalid_argument("augment: negative intensity");
    if (s.op == AugmentOp::random_delete && s.intensity > 1)
      throw std::invalid_argument("augment: deletion probability must be in [0,1]");
  }
}

StopWords default_stopwords() {
  return {"a",     "an",    "the",   "and",  "or",   "but",   "if",    "of",    "at",   "by",
          "for",   "with",  "about", "to",   "from", "in",    "on",    "up",    "out",  "is",
          "am",    "are",   "was",   "were", "be",   "been",  "being", "have",  "has",  "had",
          "do",    "does",  "did",   "i",    "me",   "my",    "we",    "our",   "you",  "your",
          "he",    "him",   "his",   "she",  "her",  "it",    "its",   "they",  "them", "their",
          "this",  "that",  "these", "those", "what", "which", "who",  "whom",  "so",   "than",
          "too",   "very",  "can",   "will", "just", "not",   "no",    "nor",   "as",   "until",
          "while", "into",  "then",  "there", "here", "when",  "where", "why",  "how",  "all",
          "any",   "both",  "each",  "few",  "more", "most",  "other", "some",  "such", "only",
          "own",   "same",  "s",     "t",    "don",  "should", "now",  "rt"};
}

StopWords load_stopwords(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open stopwords " + path.string());
  StopWords out;
  std::string line;
  while (std::getline(in, line)) {
    for (auto& tok : split_tokens(line)) {
      if (tok[0] == '#') break;
      out.insert(std::move(tok));
    }
  }
  return out;
}

AugmentPolicy policy_from_json(const nlohmann::json& j) {
  AugmentPolicy p;
  for (const auto& o : j.at("ops")) {
    const auto name = o.at("op").get<std::string>();
    if (name == "synonym_replace")
      p.ops.push_back({AugmentOp::synonym_replace, o.at("k").get<double>()});
    else if (name == "random_insert")
      p.ops.push_back({AugmentOp::random_insert, o.at("n").get<double>()});
    else if (name == "random_swap")
      p.ops.push_back({AugmentOp::random_swap, o.at("n").get<double>()});
    else if (name == "random_delete")
      p.ops.push_back({AugmentOp::random_delete, o.at("p").get<double>()});
    else
      throw std::invalid_argument("augment policy: unknown op '" + name + "'");
  }
  if (j.contains("stopwords") && !j["stopwords"].is_null())
    p.stopwords = load_stopwords(j["stopwords"].get<std::string>());
  else
    p.stopwords = default_stopwords();
  p.seed = j.value("seed", std::uint64_t{0});
  p.check();
  return p;
}

nlohmann::json policy_to_json(const AugmentPolicy& policy) {
  nlohmann::json ops = nlohmann::json::array();
  for (const auto& s : policy.ops) {
    const char* key = s.op == AugmentOp::synonym_replace ? "k"
                      : s.op == AugmentOp::random_delete ? "p"
                                                         : "n";
    ops.push_back({{"op", op_name(s.op)}, {key, s.intensity}});
  }
  return {{"ops", ops}, {"seed", policy.seed}, {"stopword_count", policy.stopwords.size()}};
}

RebalanceTarget RebalanceTarget::standard() {
  RebalanceTarget t;
  t.ratio[0] = 0.5;
  return t;
}

std::optional<std::string> SynonymLookup::synonym(const std::string& word) const {
  if (auto it = cache_.find(word); it != cache_.end()) return it->second;
  std::optional<std::string> result;
  if (table_.contains(word) && table_.size() > 1) result = nearest_neighbor(word, table_, 1).front();
  cache_.emplace(word, result);
  return result;
}

Tokens synonym_replace(const Tokens& tokens, std::size_t k, const SynonymLookup& synonyms,
                       const StopWords& stopwords, std::uint64_t seed) {
  if (k == 0) return tokens;
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < tokens.size(); ++i)
    if (eligible(tokens[i], synonyms, stopwords) && synonyms.synonym(tokens[i])) candidates.push_back(i);
  std::mt19937_64 rng(seed);
  std::shuffle(candidates.begin(), candidates.end(), rng);
  Tokens out = tokens;
  for (std::size_t r = 0; r < std::min(k, candidates.size()); ++r) {
    const std::size_t i = candidates[r];
    out[i] = *synonyms.synonym(tokens[i]);
  }
  return out;
}

Tokens synonym_replace(const Tokens& tokens, std::size_t k, const EmbeddingTable& table,
                       const StopWords& stopwords, std::uint64_t seed) {
  return synonym_replace(tokens, k, SynonymLookup(table), stopwords, seed);
}

Tokens random_insert(const Tokens& tokens, std::size_t n, const SynonymLookup& synonyms,
                     const StopWords& stopwords, std::uint64_t seed) {
  Tokens out = tokens;
  std::mt19937_64 rng(seed);
  for (std::size_t step = 0; step < n; ++step) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < out.size(); ++i)
      if (eligible(out[i], synonyms, stopwords) && synonyms.synonym(out[i])) candidates.push_back(i);
    if (candidates.empty()) break;
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    std::string word = *synonyms.synonym(out[candidates[pick(rng)]]);
    std::uniform_int_distribution<std::size_t> where(0, out.size());
    out.insert(out.begin() + static_cast<std::ptrdiff_t>(where(rng)), std::move(word));
  }
  return out;
}

Tokens random_insert(const Tokens& tokens, std::size_t n, const EmbeddingTable& table,
                     const StopWords& stopwords, std::uint64_t seed) {
  return random_insert(tokens, n, SynonymLookup(table), stopwords, seed);
}

Tokens random_swap(const Tokens& tokens, std::size_t n, std::uint64_t seed) {
  Tokens out = tokens;
  if (out.size() < 2) return out;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> first(0, out.size() - 1);
  std::uniform_int_distribution<std::size_t> other(0, out.size() - 2);
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t i = first(rng);
    std::size_t j = other(rng);
    if (j >= i) ++j;
    std::swap(out[i], out[j]);
  }
  return out;
}

Tokens random_delete(const Tokens& tokens, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("random_delete: p must be in [0,1]");
  if (tokens.empty() || p == 0.0) return tokens;
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution drop(p);
  Tokens out;
  for (const auto& t : tokens)
    if (!drop(rng)) out.push_back(t);
  if (out.empty()) {
    std::uniform_int_distribution<std::size_t> keep(0, tokens.size() - 1);
    out.push_back(tokens[keep(rng)]);
  }
  return out;
}

LabeledExample augment_example(const LabeledExample& example, const AugmentPolicy& policy,
                               const SynonymLookup& synonyms) {
  Tokens tokens = split_tokens(example.text);
  for (std::size_t i = 0; i < policy.ops.size(); ++i) {
    const auto& step = policy.ops[i];
    const std::uint64_t seed = op_seed(policy.seed, example.id, i);
    switch (step.op) {
      case AugmentOp::synonym_replace:
        tokens = synonym_replace(tokens, as_count(step.intensity), synonyms, policy.stopwords, seed);
        break;
      case AugmentOp::random_insert:
        tokens = random_insert(tokens, as_count(step.intensity), synonyms, policy.stopwords, seed);
        break;
      case AugmentOp::random_swap:
        tokens = random_swap(tokens, as_count(step.intensity), seed);
        break;
      case AugmentOp::random_delete:
        tokens = random_delete(tokens, step.intensity, seed);
        break;
    }
  }
  LabeledExample out = example;
  out.text = join_tokens(tokens);
  out.synthetic = true;
  return out;
}

LabeledExample augment_example(const LabeledExample& example, const AugmentPolicy& policy,
                               const EmbeddingTable& table) {
  return augment_example(example, policy, SynonymLookup(table));
}

std::array<std::size_t, kNumClasses> rebalance_targets(const std::array<std::size_t, kNumClasses>& counts,
                                                       const RebalanceTarget& target) {
  const std::size_t majority = *std::max_element(counts.begin(), counts.end());
  std::array<std::size_t, kNumClasses> out = counts;
  for (int k = 0; k < kNumClasses; ++k) {
    if (!target.ratio[k]) continue;
    const double r = *target.ratio[k];
    if (!(r > 0.0 && r <= 1.0)) throw std::invalid_argument("rebalance: ratio must be in (0,1]");
    const auto want = static_cast<std::size_t>(std::ceil(r * static_cast<double>(majority) - 1e-9));
    out[k] = std::max(counts[k], want);
  }
  return out;
}

Corpus rebalance(const Corpus& train, const RebalanceTarget& target, const AugmentPolicy& policy,
                 const EmbeddingTable& table) {
  if (train.empty()) throw DataError("rebalance: empty training corpus");
  policy.check();
  const auto counts = class_counts(train);
  const auto goal = rebalance_targets(counts, target);

  std::size_t next_id = 0;
  for (const auto& ex : train) next_id = std::max(next_id, ex.id + 1);

  SynonymLookup synonyms(table);
  Corpus out = train;
  for (int k = 0; k < kNumClasses; ++k) {
    if (goal[k] == counts[k]) continue;
    if (counts[k] == 0)
      throw DataError("rebalance: class " + std::to_string(k) + " has no examples to augment");
    std::vector<const LabeledExample*> sources;
    for (const auto& ex : train)
      if (ex.label == k) sources.push_back(&ex);
    for (std::size_t j = 0; j < goal[k] - counts[k]; ++j) {
      AugmentPolicy derived = policy;
      derived.seed = nn::mix_seed(policy.seed, static_cast<std::uint64_t>(k), j);
      LabeledExample ex = augment_example(*sources[j % sources.size()], derived, synonyms);
      ex.id = next_id++;
      out.push_back(std::move(ex));
    }
  }
  std::mt19937_64 rng(policy.seed);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace toxpipe
