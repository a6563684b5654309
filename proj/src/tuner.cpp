#include "toxpipe/model/tuner.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "toxpipe/model/classifier.hpp"

namespace toxpipe::model {

void to_json(nlohmann::json& j, const Candidate& c) {
  j = {{"lstm1_units", c.lstm1_units},   {"lstm1_dropout", c.lstm1_dropout},
       {"lstm2_units", c.lstm2_units},   {"lstm2_dropout", c.lstm2_dropout},
       {"dense1_units", c.dense1_units}, {"dense1_dropout", c.dense1_dropout},
       {"dense2_units", c.dense2_units}, {"dense2_dropout", c.dense2_dropout},
       {"lr", c.lr}};
}

void from_json(const nlohmann::json& j, Candidate& c) {
  j.at("lstm1_units").get_to(c.lstm1_units);
  j.at("lstm1_dropout").get_to(c.lstm1_dropout);
  j.at("lstm2_units").get_to(c.lstm2_units);
  j.at("lstm2_dropout").get_to(c.lstm2_dropout);
  j.at("dense1_units").get_to(c.dense1_units);
  j.at("dense1_dropout").get_to(c.dense1_dropout);
  j.at("dense2_units").get_to(c.dense2_units);
  j.at("dense2_dropout").get_to(c.dense2_dropout);
  j.at("lr").get_to(c.lr);
}

void to_json(nlohmann::json& j, const LeaderboardEntry& e) {
  j = {{"sample_order", e.sample_order},
       {"candidate", e.candidate},
       {"val_accuracy", e.val_accuracy},
       {"val_loss", e.diverged ? nlohmann::json(nullptr) : nlohmann::json(e.val_loss)},
       {"diverged", e.diverged}};
}

void to_json(nlohmann::json& j, const TuneResult& r) {
  j = {{"best", r.best}, {"best_spec", r.best_spec}, {"best_train", r.best_train}, {"leaderboard", r.leaderboard}};
}

SearchSpace SearchSpace::standard() {
  SearchSpace s;
  for (std::size_t u = 32; u <= 512; u += 32) s.lstm_units.push_back(u);
  s.dense_units = s.lstm_units;
  s.dropouts = {0.2, 0.35, 0.5, 0.65, 0.8};
  s.lrs = {0.01, 0.001, 0.0001};
  return s;
}

void SearchSpace::check() const {
  if (lstm_units.empty() || dense_units.empty() || dropouts.empty() || lrs.empty())
    throw std::invalid_argument("search space: every dimension needs at least one value");
}

std::uint64_t SearchSpace::size() const {
  const std::uint64_t l = lstm_units.size(), d = dense_units.size(), p = dropouts.size(), r = lrs.size();
  return l * l * d * d * p * p * p * p * r;
}

Candidate SearchSpace::at(std::uint64_t index) const {
  if (index >= size()) throw std::out_of_range("search space index");
  auto take = [&index](std::size_t radix) {
    const auto digit = static_cast<std::size_t>(index % radix);
    index /= radix;
    return digit;
  };
  Candidate c;
  c.lr = lrs[take(lrs.size())];
  c.dense2_dropout = dropouts[take(dropouts.size())];
  c.dense2_units = dense_units[take(dense_units.size())];
  c.dense1_dropout = dropouts[take(dropouts.size())];
  c.dense1_units = dense_units[take(dense_units.size())];
  c.lstm2_dropout = dropouts[take(dropouts.size())];
  c.lstm2_units = lstm_units[take(lstm_units.size())];
  c.lstm1_dropout = dropouts[take(dropouts.size())];
  c.lstm1_units = lstm_units[take(lstm_units.size())];
  return c;
}

bool SearchSpace::contains(const Candidate& c) const {
  auto in = [](const auto& set, auto v) { return std::find(set.begin(), set.end(), v) != set.end(); };
  return in(lstm_units, c.lstm1_units) && in(lstm_units, c.lstm2_units) && in(dense_units, c.dense1_units) &&
         in(dense_units, c.dense2_units) && in(dropouts, c.lstm1_dropout) && in(dropouts, c.lstm2_dropout) &&
         in(dropouts, c.dense1_dropout) && in(dropouts, c.dense2_dropout) && in(lrs, c.lr);
}

std::vector<Candidate> sample_candidates(const SearchSpace& space, std::size_t budget, std::uint64_t seed) {
  space.check();
  if (budget == 0) throw std::invalid_argument("tune: budget must be >= 1");
  const std::uint64_t n = space.size();
  std::vector<Candidate> out;
  if (budget >= n) {
    out.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) out.push_back(space.at(i));
    return out;
  }
  std::mt19937_64 rng(nn::mix_seed(seed, 0x7a4e));
  std::uniform_int_distribution<std::uint64_t> pick(0, n - 1);
  std::unordered_set<std::uint64_t> seen;
  while (out.size() < budget) {
    const auto i = pick(rng);
    if (seen.insert(i).second) out.push_back(space.at(i));
  }
  return out;
}

ModelSpec apply(const Candidate& c, ModelSpec base, std::size_t unit_divisor) {
  if (unit_divisor == 0) throw std::invalid_argument("tune: unit_divisor must be >= 1");
  auto scale = [unit_divisor](std::size_t u) { return std::max<std::size_t>(1, u / unit_divisor); };
  base.lstm1_units = scale(c.lstm1_units);
  base.lstm1_dropout = c.lstm1_dropout;
  base.lstm2_units = scale(c.lstm2_units);
  base.lstm2_dropout = c.lstm2_dropout;
  base.dense1_units = scale(c.dense1_units);
  base.dense1_dropout = c.dense1_dropout;
  base.dense2_units = scale(c.dense2_units);
  base.dense2_dropout = c.dense2_dropout;
  return base;
}

void rank_leaderboard(std::vector<LeaderboardEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const LeaderboardEntry& a, const LeaderboardEntry& b) {
    if (a.val_accuracy != b.val_accuracy) return a.val_accuracy > b.val_accuracy;
    if (a.val_loss != b.val_loss) return a.val_loss < b.val_loss;
    return a.sample_order < b.sample_order;
  });
}

TuneResult tune(const SearchSpace& space, const TuneSettings& settings, const EncodedDataset& train_set,
                const EncodedDataset& val_set, const EmbeddingMatrix& matrix) {
  if (settings.epochs == 0) throw std::invalid_argument("tune: epochs must be >= 1");
  const auto candidates = sample_candidates(space, settings.budget, settings.seed);
  std::vector<LeaderboardEntry> entries(candidates.size());

  auto run_one = [&](std::size_t i) {
    const Candidate& c = candidates[i];
    const ModelSpec spec = apply(c, settings.base, settings.unit_divisor);
    TrainConfig cfg = settings.train;
    cfg.epochs = settings.epochs;
    cfg.lr = c.lr;
    cfg.seed = nn::mix_seed(settings.seed, i);
    Model model(spec, matrix, nn::mix_seed(settings.seed, i, 1));
    LeaderboardEntry& e = entries[i];
    e.sample_order = i;
    e.candidate = c;
    try {
      train(model, train_set, val_set, cfg);
      const Evaluation ev = evaluate(model, val_set);
      e.val_accuracy = ev.accuracy;
      e.val_loss = ev.loss;
    } catch (const TrainingDiverged&) {
      e.diverged = true;
      e.val_accuracy = 0;
      e.val_loss = std::numeric_limits<double>::infinity();
    }
  };

  std::size_t threads = settings.threads ? settings.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, candidates.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < candidates.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t i; !failed && (i = next++) < candidates.size();) {
          try {
            run_one(i);
          } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
          }
        }
      });
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  rank_leaderboard(entries);

  TuneResult result;
  result.best = entries.front().candidate;
  result.best_spec = apply(result.best, settings.base, settings.unit_divisor);
  result.best_train = settings.train;
  result.best_train.lr = result.best.lr;
  result.leaderboard = std::move(entries);
  return result;
}

}  // namespace toxpipe::model
