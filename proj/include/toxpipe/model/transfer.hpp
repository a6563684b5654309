#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "toxpipe/embed.hpp"
#include "toxpipe/model/classifier.hpp"
#include "toxpipe/model/head.hpp"

namespace toxpipe::model {

// A pretrained feature extractor whose weights never change. Maps padded
// token ids plus an attention mask (1 over non-pad positions) to a
// max_len x width block of last-hidden-layer states.
class FrozenEncoder {
 public:
  virtual ~FrozenEncoder() = default;
  virtual std::size_t width() const = 0;
  virtual std::size_t max_len() const = 0;
  virtual nn::Matrix<double> encode(std::span<const int> ids, std::span<const std::uint8_t> mask) const = 0;
};

std::vector<std::uint8_t> attention_mask(std::span<const int> ids);

// Deterministic stand-in for a transformer: each (token, feature) pair hashes
// to a fixed value in [-1, 1], plus a small positional term. Masked
// positions are zero.
class HashEncoder final : public FrozenEncoder {
 public:
  HashEncoder(std::size_t width, std::size_t max_len, std::uint64_t seed)
      : width_(width), max_len_(max_len), seed_(seed) {}
  std::size_t width() const override { return width_; }
  std::size_t max_len() const override { return max_len_; }
  nn::Matrix<double> encode(std::span<const int> ids, std::span<const std::uint8_t> mask) const override;

 private:
  std::size_t width_;
  std::size_t max_len_;
  std::uint64_t seed_;
};

// Looks token ids up in a fixed embedding matrix.
class EmbeddingEncoder final : public FrozenEncoder {
 public:
  EmbeddingEncoder(EmbeddingMatrix matrix, std::size_t max_len)
      : matrix_(std::move(matrix)), max_len_(max_len) {}
  std::size_t width() const override { return static_cast<std::size_t>(matrix_.cols()); }
  std::size_t max_len() const override { return max_len_; }
  nn::Matrix<double> encode(std::span<const int> ids, std::span<const std::uint8_t> mask) const override;

 private:
  EmbeddingMatrix matrix_;
  std::size_t max_len_;
};

struct HeadSpec {
  HeadShape shape;
  // When set, the encoder's per-position width must match.
  std::optional<std::size_t> encoder_width;
};

// Frozen encoder -> flatten -> trainable head. Only head tensors are parameters.
template <typename T>
class TransferClassifier {
 public:
  using Scalar = T;

  TransferClassifier(std::shared_ptr<const FrozenEncoder> encoder, const HeadSpec& spec,
                     std::uint64_t seed, Init init = Init::standard)
      : encoder_(std::move(encoder)) {
    if (!encoder_) throw std::invalid_argument("transfer: null encoder");
    if (spec.encoder_width && *spec.encoder_width != encoder_->width())
      throw std::invalid_argument("transfer: encoder width " + std::to_string(encoder_->width()) +
                                  " does not match head spec " + std::to_string(*spec.encoder_width));
    if (encoder_->width() == 0 || encoder_->max_len() == 0)
      throw std::invalid_argument("transfer: encoder must declare positive width and max_len");
    const auto in = static_cast<nn::Index>(encoder_->width() * encoder_->max_len());
    head_ = Head<T>("head.", in, spec.shape);
    if (init == Init::standard) {
      std::mt19937_64 rng(nn::mix_seed(seed));
      head_.init(rng);
    }
  }

  const FrozenEncoder& encoder() const { return *encoder_; }

  nn::ParamRefs<T> parameters() {
    nn::ParamRefs<T> out;
    head_.collect(out);
    return out;
  }

  std::size_t param_count() { return nn::trainable_count(parameters()); }
  T l2_penalty() { return nn::l2_penalty(parameters(), head_.l2, false); }

  BatchOutput<T> loss_and_grad(std::span<const Sequence> batch, std::span<const int> labels,
                               std::uint64_t dropout_seed) {
    auto params = parameters();
    nn::zero_grads(params);
    std::mt19937_64 rng(dropout_seed);
    typename Head<T>::Tape tape;
    const nn::Matrix<T> logits = head_.forward(features(batch), &rng, tape);
    BatchOutput<T> out;
    nn::Matrix<T> dlogits;
    out.loss = nn::softmax_xent_batch(logits, labels, out.probs, &dlogits);
    out.loss += nn::l2_penalty(params, head_.l2, true);
    head_.backward(tape, dlogits);
    return out;
  }

  nn::Matrix<T> predict_proba(std::span<const Sequence> batch) const {
    typename Head<T>::Tape tape;
    return nn::softmax_rows(head_.forward(features(batch), nullptr, tape));
  }

 private:
  nn::Matrix<T> features(std::span<const Sequence> batch) const {
    const auto width = static_cast<nn::Index>(encoder_->width());
    const auto len = static_cast<nn::Index>(encoder_->max_len());
    nn::Matrix<T> x(static_cast<nn::Index>(batch.size()), width * len);
    for (std::size_t b = 0; b < batch.size(); ++b) {
      if (batch[b].size() != encoder_->max_len())
        throw std::invalid_argument("transfer: sequence length must equal encoder max_len");
      const auto mask = attention_mask(batch[b]);
      const nn::Matrix<double> states = encoder_->encode(batch[b], mask);
      if (states.rows() != len || states.cols() != width)
        throw std::runtime_error("transfer: encoder returned wrong shape");
      x.row(static_cast<nn::Index>(b)) =
          Eigen::Map<const nn::RowVector<double>>(states.data(), states.size()).template cast<T>();
    }
    return x;
  }

  std::shared_ptr<const FrozenEncoder> encoder_;
  Head<T> head_;
};

inline TransferClassifier<float> build_transfer_head(std::shared_ptr<const FrozenEncoder> encoder,
                                                     const HeadSpec& spec, std::uint64_t seed) {
  return TransferClassifier<float>(std::move(encoder), spec, seed);
}

}  // namespace toxpipe::model
