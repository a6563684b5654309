#include <algorithm>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "support.hpp"
#include "toxpipe/augment.hpp"
#include "toxpipe/preprocess.hpp"

using namespace toxpipe;

namespace {

// nearest(good) = great, nearest(dog) = puppy
EmbeddingTable toy_table() {
  EmbeddingTable t(3);
  const std::vector<std::pair<std::string, std::vector<float>>> rows = {
      {"good", {1.0f, 0.1f, 0.0f}},  {"great", {0.95f, 0.15f, 0.0f}}, {"dog", {0.0f, 1.0f, 0.1f}},
      {"puppy", {0.0f, 0.9f, 0.2f}}, {"car", {0.0f, 0.0f, 1.0f}}};
  for (const auto& [w, v] : rows) t.add(w, v);
  return t;
}

Tokens random_tokens(std::mt19937_64& rng, std::size_t max_len) {
  static const Tokens pool{"good", "dog", "car", "the", "a", "is", "very", "x", "y"};
  Tokens t;
  for (std::size_t k = 1 + rng() % max_len; k > 0; --k) t.push_back(pool[rng() % pool.size()]);
  return t;
}

LabeledExample example(std::size_t id, int label, std::string text) {
  LabeledExample ex;
  ex.id = id;
  ex.label = label;
  ex.count = 3;
  ex.votes[label] = 3;
  ex.text = std::move(text);
  return ex;
}

Corpus corpus_with(std::array<std::size_t, 3> counts) {
  Corpus c;
  std::mt19937_64 rng(1);
  for (int k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < counts[k]; ++i)
      c.push_back(example(c.size(), k, join_tokens(random_tokens(rng, 8))));
  return c;
}

}  // namespace

TEST(SynonymReplace, Examples) {
  const EmbeddingTable t = toy_table();
  const Tokens in{"good", "dog"};
  EXPECT_EQ(synonym_replace(in, 0, t, {}, 1), in);
  EXPECT_EQ(synonym_replace(in, 2, t, {}, 1), (Tokens{"great", "puppy"}));
  EXPECT_EQ(synonym_replace(in, 2, t, {"good", "dog"}, 1), in);
  EXPECT_EQ(synonym_replace({"unknown", "words"}, 3, t, {}, 1), (Tokens{"unknown", "words"}));
}

TEST(SynonymReplace, LengthPreservedAndBounded) {
  const EmbeddingTable t = toy_table();
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 500; ++trial) {
    const Tokens in = random_tokens(rng, 10);
    const std::size_t k = rng() % 4;
    const Tokens out = synonym_replace(in, k, t, default_stopwords(), rng());
    ASSERT_EQ(out.size(), in.size());
    std::size_t changed = 0;
    for (std::size_t i = 0; i < in.size(); ++i) changed += in[i] != out[i];
    EXPECT_LE(changed, k);
  }
}

TEST(RandomInsert, Examples) {
  const EmbeddingTable t = toy_table();
  EXPECT_EQ(random_insert({"good"}, 0, t, {}, 3), (Tokens{"good"}));
  const Tokens out = random_insert({"good"}, 1, t, {}, 3);
  EXPECT_TRUE(out == (Tokens{"good", "great"}) || out == (Tokens{"great", "good"}));
  EXPECT_EQ(random_insert({"the", "a"}, 3, t, {"the", "a"}, 3), (Tokens{"the", "a"}));
}

TEST(RandomInsert, BothPositionsReachable) {
  const EmbeddingTable t = toy_table();
  std::set<Tokens> seen;
  for (std::uint64_t seed = 0; seed < 64; ++seed) seen.insert(random_insert({"good"}, 1, t, {}, seed));
  EXPECT_EQ(seen.size(), 2u);
}

TEST(RandomSwap, Examples) {
  EXPECT_EQ(random_swap({"a"}, 3, 1), (Tokens{"a"}));
  EXPECT_EQ(random_swap({"a", "b"}, 1, 1), (Tokens{"b", "a"}));
  EXPECT_EQ(random_swap({"a", "b", "c"}, 0, 1), (Tokens{"a", "b", "c"}));
}

TEST(RandomDelete, Examples) {
  const Tokens in{"a", "b", "c"};
  EXPECT_EQ(random_delete(in, 0.0, 1), in);
  EXPECT_EQ(random_delete(in, 1.0, 1).size(), 1u);
  EXPECT_EQ(random_delete({"a", "b", "c", "d"}, 0.5, 9), random_delete({"a", "b", "c", "d"}, 0.5, 9));
  EXPECT_TRUE(random_delete({}, 0.5, 1).empty());
}

TEST(Operators, PropertiesOverRandomInputs) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 1000; ++trial) {
    const Tokens in = random_tokens(rng, 12);
    const std::uint64_t seed = rng();
    const Tokens swapped = random_swap(in, rng() % 5, seed);
    EXPECT_TRUE(std::is_permutation(swapped.begin(), swapped.end(), in.begin(), in.end()));
    const double p = std::uniform_real_distribution<double>(0, 1)(rng);
    const Tokens deleted = random_delete(in, p, seed);
    EXPECT_GE(deleted.size(), 1u);
    EXPECT_LE(deleted.size(), in.size());
    std::size_t matched = 0;  // deleted must be a subsequence of in
    for (std::size_t i = 0; i < in.size() && matched < deleted.size(); ++i) matched += in[i] == deleted[matched];
    EXPECT_EQ(matched, deleted.size());
    EXPECT_EQ(random_delete(in, p, seed), deleted);
  }
}

TEST(Operators, SeedsProduceVariation) {
  const Tokens in{"one", "two", "three", "four", "five"};
  std::set<Tokens> swaps, deletes;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    swaps.insert(random_swap(in, 1, seed));
    deletes.insert(random_delete(in, 0.3, seed));
  }
  EXPECT_GT(swaps.size(), 1u);
  EXPECT_GT(deletes.size(), 1u);
}

TEST(AugmentExample, EmptyPolicyIsIdentity) {
  AugmentPolicy policy;
  const auto ex = example(4, 2, "some cleaned text");
  const auto out = augment_example(ex, policy, toy_table());
  EXPECT_EQ(out.text, ex.text);
  EXPECT_EQ(out.label, ex.label);
  EXPECT_TRUE(out.synthetic);
}

TEST(AugmentExample, LabelPreservedAndDeterministic) {
  AugmentPolicy policy;
  policy.ops = {{AugmentOp::random_swap, 1}, {AugmentOp::random_delete, 0.1}};
  policy.seed = 5;
  const auto ex = example(7, 0, "w1 w2 w3 w4 w5 w6 w7 w8 w9 w10");
  const auto a = augment_example(ex, policy, toy_table());
  EXPECT_EQ(a.label, 0);
  EXPECT_EQ(a, augment_example(ex, policy, toy_table()));
}

TEST(AugmentPolicy, CompositeAndJson) {
  const AugmentPolicy p = AugmentPolicy::composite(3);
  ASSERT_EQ(p.ops.size(), 4u);
  EXPECT_EQ(p.ops[0].op, AugmentOp::synonym_replace);
  EXPECT_EQ(p.ops[0].intensity, 2);
  EXPECT_EQ(p.ops[3].op, AugmentOp::random_delete);
  EXPECT_DOUBLE_EQ(p.ops[3].intensity, 0.1);
  const AugmentPolicy back = policy_from_json(policy_to_json(p));
  ASSERT_EQ(back.ops.size(), p.ops.size());
  for (std::size_t i = 0; i < p.ops.size(); ++i) {
    EXPECT_EQ(back.ops[i].op, p.ops[i].op);
    EXPECT_EQ(back.ops[i].intensity, p.ops[i].intensity);
  }
  EXPECT_EQ(back.seed, 3u);
  EXPECT_THROW(policy_from_json(nlohmann::json::parse(R"({"ops":[{"op":"shuffle","n":1}]})")),
               std::invalid_argument);
  EXPECT_THROW(policy_from_json(nlohmann::json::parse(R"({"ops":[{"op":"random_delete","p":1.5}]})")),
               std::invalid_argument);
}

TEST(AugmentPolicy, StopwordFile) {
  support::TempDir dir;
  const auto path = support::write_file(dir / "stop.txt", "# c\nthe\n\na\n");
  const nlohmann::json j = {{"ops", nlohmann::json::array()}, {"stopwords", path.string()}, {"seed", 1}};
  EXPECT_EQ(policy_from_json(j).stopwords, (StopWords{"the", "a"}));
  EXPECT_GT(load_stopwords(std::string(TOXPIPE_DATA_DIR) + "/stopwords.txt").size(), 20u);
}

TEST(Rebalance, TargetFormula) {
  RebalanceTarget t;
  t.ratio = {0.5, 1.0, 0.5};
  EXPECT_EQ(rebalance_targets({10, 100, 20}, t), (std::array<std::size_t, 3>{50, 100, 50}));
  t.ratio = {0.333, std::nullopt, 0.1};
  EXPECT_EQ(rebalance_targets({1, 10, 5}, t), (std::array<std::size_t, 3>{4, 10, 5}));
}

TEST(Rebalance, HitsTargetsAndKeepsOriginals) {
  const Corpus train = corpus_with({10, 100, 20});
  RebalanceTarget t;
  t.ratio = {0.5, 1.0, 0.5};
  const Corpus out = rebalance(train, t, AugmentPolicy::composite(4), toy_table());
  EXPECT_EQ(class_counts(out), (std::array<std::size_t, 3>{50, 100, 50}));
  std::size_t originals = 0;
  for (const auto& ex : out) {
    if (ex.synthetic) {
      EXPECT_GE(ex.id, train.size());
      continue;
    }
    ++originals;
    EXPECT_EQ(ex, train[ex.id]);
  }
  EXPECT_EQ(originals, train.size());
  EXPECT_EQ(rebalance(train, t, AugmentPolicy::composite(4), toy_table()), out);
}

TEST(Rebalance, BalancedCorpusUnchangedCounts) {
  const Corpus train = corpus_with({7, 7, 7});
  RebalanceTarget t;
  t.ratio = {1.0, 1.0, 1.0};
  EXPECT_EQ(class_counts(rebalance(train, t, AugmentPolicy::composite(), toy_table())),
            (std::array<std::size_t, 3>{7, 7, 7}));
}

TEST(Rebalance, EmptyClassIsError) {
  RebalanceTarget t;
  t.ratio = {1.0, std::nullopt, std::nullopt};
  EXPECT_THROW(rebalance(corpus_with({0, 5, 5}), t, AugmentPolicy::composite(), toy_table()), DataError);
}
