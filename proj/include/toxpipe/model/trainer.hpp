#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <ostream>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "toxpipe/embed.hpp"
#include "toxpipe/model/spec.hpp"
#include "toxpipe/nn/adam.hpp"

namespace toxpipe::model {

struct EncodedDataset {
  std::vector<Sequence> inputs;  // each padded to the model's max_len
  std::vector<int> labels;

  std::size_t size() const { return inputs.size(); }
};

struct History {
  std::vector<double> train_loss;
  std::vector<double> val_loss;
  std::vector<double> train_acc;
  std::vector<double> val_acc;
  std::size_t best_epoch = 0;  // 1-based epoch whose weights were kept

  std::size_t epochs() const { return train_loss.size(); }
  friend bool operator==(const History&, const History&) = default;
};

// epoch,train_loss,val_loss,train_acc,val_acc
void write_history_csv(std::ostream& out, const History& history);

class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(std::size_t epoch, std::size_t batch)
      : std::runtime_error("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                           std::to_string(batch)),
        epoch_(epoch),
        batch_(batch) {}
  std::size_t epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }

 private:
  std::size_t epoch_;
  std::size_t batch_;
};

struct Evaluation {
  double loss = 0;      // mean cross-entropy + L2 penalty
  double accuracy = 0;
  std::vector<int> predictions;
  std::vector<std::array<double, 3>> probabilities;
};

template <typename Mat>
int argmax_row(const Mat& probs, nn::Index r) {
  nn::Index best = 0;
  for (nn::Index c = 1; c < probs.cols(); ++c)
    if (probs(r, c) > probs(r, best)) best = c;
  return static_cast<int>(best);
}

template <class M>
Evaluation evaluate(M& model, const EncodedDataset& data, std::size_t batch_size = 128) {
  if (data.size() == 0) throw std::invalid_argument("evaluate: empty dataset");
  Evaluation ev;
  std::size_t correct = 0;
  double xent = 0;
  for (std::size_t start = 0; start < data.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, data.size() - start);
    const auto probs = model.predict_proba(std::span<const Sequence>(data.inputs).subspan(start, n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<nn::Index>(i);
      const int label = data.labels[start + i];
      const int pred = argmax_row(probs, r);
      xent -= std::log(std::max(static_cast<double>(probs(r, label)), 1e-30));
      correct += pred == label;
      ev.predictions.push_back(pred);
      ev.probabilities.push_back({static_cast<double>(probs(r, 0)), static_cast<double>(probs(r, 1)),
                                  static_cast<double>(probs(r, 2))});
    }
  }
  ev.loss = xent / static_cast<double>(data.size()) + static_cast<double>(model.l2_penalty());
  ev.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  return ev;
}

using EpochCallback = std::function<void(std::size_t epoch, const History&)>;

// Mini-batch Adam. Deterministic for a fixed cfg.seed. The parameters from
// the epoch with the best validation accuracy (earliest on ties) are restored
// at the end.
template <class M>
History train(M& model, const EncodedDataset& train_set, const EncodedDataset& val_set,
              const TrainConfig& cfg, const EpochCallback& on_epoch = {}) {
  using T = typename M::Scalar;
  cfg.check();
  if (train_set.size() == 0 || val_set.size() == 0)
    throw std::invalid_argument("train: datasets must be non-empty");
  for (const auto* d : {&train_set, &val_set})
    for (int y : d->labels)
      if (y < 0 || y > 2) throw std::invalid_argument("train: labels must be in {0,1,2}");

  auto params = model.parameters();
  nn::AdamState<T> adam(params, nn::AdamConfig{cfg.lr});
  History history;
  double best_acc = -1;
  auto best = nn::snapshot(params);

  std::vector<std::size_t> order(train_set.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Sequence> batch_inputs;
  std::vector<int> batch_labels;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (cfg.shuffle) {
      std::mt19937_64 rng(nn::mix_seed(cfg.seed, 0x5eed, epoch));
      std::shuffle(order.begin(), order.end(), rng);
    }
    double loss_sum = 0;
    std::size_t correct = 0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_index) {
      const std::size_t n = std::min(cfg.batch_size, order.size() - start);
      batch_inputs.clear();
      batch_labels.clear();
      for (std::size_t i = 0; i < n; ++i) {
        batch_inputs.push_back(train_set.inputs[order[start + i]]);
        batch_labels.push_back(train_set.labels[order[start + i]]);
      }
      const auto out = model.loss_and_grad(batch_inputs, batch_labels,
                                           nn::mix_seed(cfg.seed, epoch, batch_index));
      if (!std::isfinite(static_cast<double>(out.loss))) throw TrainingDiverged(epoch, batch_index);
      loss_sum += static_cast<double>(out.loss) * static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i)
        correct += argmax_row(out.probs, static_cast<nn::Index>(i)) == batch_labels[i];
      nn::adam_step(params, adam);
    }
    const Evaluation val = evaluate(model, val_set);
    history.train_loss.push_back(loss_sum / static_cast<double>(train_set.size()));
    history.train_acc.push_back(static_cast<double>(correct) / static_cast<double>(train_set.size()));
    history.val_loss.push_back(val.loss);
    history.val_acc.push_back(val.accuracy);
    if (val.accuracy > best_acc) {
      best_acc = val.accuracy;
      history.best_epoch = epoch;
      best = nn::snapshot(params);
    }
    if (on_epoch) on_epoch(epoch, history);
  }
  nn::restore(params, best);
  return history;
}

}  // namespace toxpipe::model
