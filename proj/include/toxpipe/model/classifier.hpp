#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "toxpipe/embed.hpp"
#include "toxpipe/model/head.hpp"
#include "toxpipe/model/spec.hpp"
#include "toxpipe/nn/layers.hpp"

namespace toxpipe::model {

template <typename T>
struct BatchOutput {
  T loss;               // mean cross-entropy + L2 penalty
  nn::Matrix<T> probs;  // batch x classes
};

// embedding -> BiLSTM (sequences) -> BiLSTM -> flatten | final state -> head.
template <typename T>
class Classifier {
 public:
  using Scalar = T;

  Classifier(const ModelSpec& spec, const EmbeddingMatrix& matrix, std::uint64_t seed,
             Init init = Init::standard)
      : spec_(spec) {
    spec_.check();
    const auto rows = static_cast<nn::Index>(spec_.vocab_size + 1);
    const auto dim = static_cast<nn::Index>(spec_.embed_dim);
    if (matrix.rows() != rows || matrix.cols() != dim)
      throw std::invalid_argument("classifier: embedding matrix must be " + std::to_string(rows) +
                                  " x " + std::to_string(dim));
    embedding_ = nn::Param<T>("embedding", rows, dim);
    embedding_.value = matrix.template cast<T>();
    embedding_.trainable = spec_.embedding == EmbeddingMode::trainable;

    const auto h1 = static_cast<nn::Index>(spec_.lstm1_units);
    const auto h2 = static_cast<nn::Index>(spec_.lstm2_units);
    lstm1_ = nn::BiLstm<T>("lstm1", dim, h1);
    lstm2_ = nn::BiLstm<T>("lstm2", 2 * h1, h2);
    head_ = Head<T>("", static_cast<nn::Index>(spec_.head_width()), head_shape(spec_));

    if (init == Init::standard) {
      std::mt19937_64 rng(nn::mix_seed(seed));
      init_lstm(lstm1_.fwd, rng);
      init_lstm(lstm1_.bwd, rng);
      init_lstm(lstm2_.fwd, rng);
      init_lstm(lstm2_.bwd, rng);
      head_.init(rng);
    }
  }

  const ModelSpec& spec() const { return spec_; }

  nn::ParamRefs<T> parameters() {
    nn::ParamRefs<T> out{&embedding_};
    lstm1_.collect(out);
    lstm2_.collect(out);
    head_.collect(out);
    return out;
  }

  std::size_t param_count() { return nn::trainable_count(parameters()); }

  T l2_penalty() { return nn::l2_penalty(parameters(), head_.l2, false); }

  // Zeroes and fills parameter gradients for one mini-batch. The dropout
  // masks are drawn from `dropout_seed`, so equal seeds give equal losses.
  BatchOutput<T> loss_and_grad(std::span<const Sequence> batch, std::span<const int> labels,
                               std::uint64_t dropout_seed) {
    auto params = parameters();
    nn::zero_grads(params);
    std::mt19937_64 rng(dropout_seed);
    Tape tape;
    const nn::Matrix<T> logits = forward(batch, &rng, tape);
    BatchOutput<T> out;
    nn::Matrix<T> dlogits;
    out.loss = nn::softmax_xent_batch(logits, labels, out.probs, &dlogits);
    out.loss += nn::l2_penalty(params, head_.l2, true);
    backward(batch, tape, dlogits);
    return out;
  }

  // The objective of loss_and_grad, leaving gradients untouched.
  T loss(std::span<const Sequence> batch, std::span<const int> labels, std::uint64_t dropout_seed) {
    std::mt19937_64 rng(dropout_seed);
    Tape tape;
    nn::Matrix<T> probs;
    const T data = nn::softmax_xent_batch(forward(batch, &rng, tape), labels, probs,
                                          static_cast<nn::Matrix<T>*>(nullptr));
    return data + l2_penalty();
  }

  nn::Matrix<T> predict_proba(std::span<const Sequence> batch) const {
    Tape tape;
    return nn::softmax_rows(forward(batch, nullptr, tape));
  }

 private:
  struct Tape {
    std::vector<nn::Matrix<T>> embedded;
    typename nn::BiLstm<T>::Tape lstm1;
    std::vector<nn::Matrix<T>> seq1;
    std::vector<nn::Matrix<T>> mask1;
    typename nn::BiLstm<T>::Tape lstm2;
    std::vector<nn::Matrix<T>> mask2;
    typename Head<T>::Tape head;
  };

  bool flatten() const { return spec_.head_input == HeadInput::flatten; }

  static void apply_dropout(std::vector<nn::Matrix<T>>& xs, double rate, std::mt19937_64* rng,
                            std::vector<nn::Matrix<T>>& masks) {
    if (!rng || rate <= 0) return;
    masks.clear();
    for (auto& x : xs) {
      masks.push_back(nn::dropout_mask<T>(x.rows(), x.cols(), rate, *rng));
      x.array() *= masks.back().array();
    }
  }

  nn::Matrix<T> forward(std::span<const Sequence> batch, std::mt19937_64* rng, Tape& tape) const {
    if (batch.empty()) throw std::invalid_argument("classifier: empty batch");
    const std::size_t steps = spec_.max_len;
    const auto rows = static_cast<nn::Index>(batch.size());
    const auto dim = embedding_.value.cols();
    tape.embedded.assign(steps, nn::Matrix<T>(rows, dim));
    for (std::size_t b = 0; b < batch.size(); ++b) {
      if (batch[b].size() != steps)
        throw std::invalid_argument("classifier: sequence length must equal max_len");
      for (std::size_t t = 0; t < steps; ++t) {
        const int id = batch[b][t];
        if (id < 0 || id >= embedding_.value.rows())
          throw std::out_of_range("classifier: token id " + std::to_string(id));
        tape.embedded[t].row(static_cast<nn::Index>(b)) = embedding_.value.row(id);
      }
    }

    tape.seq1 = lstm1_.forward(tape.embedded, true, tape.lstm1);
    apply_dropout(tape.seq1, spec_.lstm1_dropout, rng, tape.mask1);
    auto seq2 = lstm2_.forward(tape.seq1, flatten(), tape.lstm2);
    apply_dropout(seq2, spec_.lstm2_dropout, rng, tape.mask2);

    nn::Matrix<T> x;
    if (flatten()) {
      const nn::Index w = lstm2_.output_width();
      x.resize(rows, w * static_cast<nn::Index>(steps));
      for (std::size_t t = 0; t < steps; ++t) x.middleCols(static_cast<nn::Index>(t) * w, w) = seq2[t];
    } else {
      x = std::move(seq2[0]);
    }
    return head_.forward(x, rng, tape.head);
  }

  void backward(std::span<const Sequence> batch, const Tape& tape, const nn::Matrix<T>& dlogits) {
    const nn::Matrix<T> dx = head_.backward(tape.head, dlogits);
    std::vector<nn::Matrix<T>> dseq2;
    if (flatten()) {
      const nn::Index w = lstm2_.output_width();
      for (std::size_t t = 0; t < spec_.max_len; ++t)
        dseq2.push_back(dx.middleCols(static_cast<nn::Index>(t) * w, w));
    } else {
      dseq2.push_back(dx);
    }
    for (std::size_t i = 0; i < tape.mask2.size(); ++i) dseq2[i].array() *= tape.mask2[i].array();
    auto dseq1 = lstm2_.backward(tape.seq1, tape.lstm2, dseq2, flatten());
    for (std::size_t i = 0; i < tape.mask1.size(); ++i) dseq1[i].array() *= tape.mask1[i].array();
    const auto demb = lstm1_.backward(tape.embedded, tape.lstm1, dseq1, true);
    if (!embedding_.trainable) return;
    for (std::size_t t = 0; t < spec_.max_len; ++t)
      for (std::size_t b = 0; b < batch.size(); ++b)
        embedding_.grad.row(batch[b][t]) += demb[t].row(static_cast<nn::Index>(b));
  }

  ModelSpec spec_;
  nn::Param<T> embedding_;
  nn::BiLstm<T> lstm1_;
  nn::BiLstm<T> lstm2_;
  Head<T> head_;
};

using Model = Classifier<float>;

// Convenience form: validated model with standard initialization.
inline Model build_classifier(const ModelSpec& spec, const EmbeddingMatrix& matrix, std::uint64_t seed) {
  return Model(spec, matrix, seed);
}

}  // namespace toxpipe::model
