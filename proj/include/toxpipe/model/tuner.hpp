#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "toxpipe/embed.hpp"
#include "toxpipe/model/spec.hpp"
#include "toxpipe/model/trainer.hpp"

namespace toxpipe::model {

// One point of the search space, in the units of the space itself.
struct Candidate {
  std::size_t lstm1_units = 0;
  double lstm1_dropout = 0;
  std::size_t lstm2_units = 0;
  double lstm2_dropout = 0;
  std::size_t dense1_units = 0;
  double dense1_dropout = 0;
  std::size_t dense2_units = 0;
  double dense2_dropout = 0;
  double lr = 0;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

void to_json(nlohmann::json& j, const Candidate& c);
void from_json(const nlohmann::json& j, Candidate& c);

struct SearchSpace {
  std::vector<std::size_t> lstm_units;
  std::vector<std::size_t> dense_units;
  std::vector<double> dropouts;
  std::vector<double> lrs;

  // Units 32..512 step 32, dropouts {0.2, 0.35, 0.5, 0.65, 0.8},
  // learning rates {0.01, 0.001, 0.0001}.
  static SearchSpace standard();

  // Number of distinct candidates.
  std::uint64_t size() const;
  // Mixed-radix decoding of index in [0, size()).
  Candidate at(std::uint64_t index) const;
  bool contains(const Candidate& c) const;
  void check() const;
};

struct TuneSettings {
  std::size_t budget = 10;
  std::size_t epochs = 5;
  // Sampled unit counts are divided by this (minimum 1) before building the
  // model, so the space can be searched at desk scale.
  std::size_t unit_divisor = 1;
  std::uint64_t seed = 0;
  ModelSpec base;
  TrainConfig train;
  std::size_t threads = 1;  // 0 means hardware concurrency
};

struct LeaderboardEntry {
  std::size_t sample_order = 0;
  Candidate candidate;
  double val_accuracy = 0;
  double val_loss = 0;
  bool diverged = false;
};

void to_json(nlohmann::json& j, const LeaderboardEntry& e);

struct TuneResult {
  Candidate best;
  ModelSpec best_spec;
  TrainConfig best_train;
  std::vector<LeaderboardEntry> leaderboard;  // ranked, best first
};

void to_json(nlohmann::json& j, const TuneResult& r);

// Draws `budget` distinct candidates uniformly (deterministic per seed), or
// enumerates the space when the budget covers it.
std::vector<Candidate> sample_candidates(const SearchSpace& space, std::size_t budget, std::uint64_t seed);

ModelSpec apply(const Candidate& c, ModelSpec base, std::size_t unit_divisor = 1);

// Higher validation accuracy first, then lower validation loss, then sample order.
void rank_leaderboard(std::vector<LeaderboardEntry>& entries);

// Trains every candidate for settings.epochs and ranks by validation accuracy,
// then lower validation loss, then sample order.
TuneResult tune(const SearchSpace& space, const TuneSettings& settings, const EncodedDataset& train_set,
                const EncodedDataset& val_set, const EmbeddingMatrix& matrix);

}  // namespace toxpipe::model
