#pragma once

#include <cmath>
#include <random>
#include <string>

#include "toxpipe/model/spec.hpp"
#include "toxpipe/nn/layers.hpp"

namespace toxpipe::model {

enum class Init { standard, zeros };

template <typename T>
void glorot_uniform(nn::Matrix<T>& m, nn::Index fan_in, nn::Index fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (nn::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>(dist(rng));
}

template <typename T>
void init_lstm(nn::LstmParams<T>& p, std::mt19937_64& rng) {
  const nn::Index h = p.hidden();
  glorot_uniform(p.input.value, p.input_dim(), 4 * h, rng);
  glorot_uniform(p.recurrent.value, h, 4 * h, rng);
  p.bias.value.setZero();
  p.bias.value.middleCols(h, h).setOnes();  // forget gate
}

// layer_norm -> dense(ReLU) + dropout -> dense(ReLU) + dropout -> dense(classes).
template <typename T>
class Head {
 public:
  nn::LayerNorm<T> norm;
  nn::Dense<T> hidden1;
  nn::Dense<T> hidden2;
  nn::Dense<T> output;
  double dropout1 = 0;
  double dropout2 = 0;
  T l2 = 0;

  struct Tape {
    typename nn::LayerNorm<T>::Tape norm;
    typename nn::Dense<T>::Tape hidden1, hidden2, output;
    nn::Matrix<T> mask1, mask2;
  };

  Head() = default;
  Head(const std::string& prefix, nn::Index input_width, const HeadShape& shape)
      : norm(prefix + "norm", input_width),
        hidden1(prefix + "dense1", input_width, static_cast<nn::Index>(shape.dense1_units),
                nn::Activation::relu, true),
        hidden2(prefix + "dense2", static_cast<nn::Index>(shape.dense1_units),
                static_cast<nn::Index>(shape.dense2_units), nn::Activation::relu, true),
        output(prefix + "output", static_cast<nn::Index>(shape.dense2_units),
               static_cast<nn::Index>(shape.classes), nn::Activation::none, false),
        dropout1(shape.dense1_dropout),
        dropout2(shape.dense2_dropout),
        l2(static_cast<T>(shape.l2)) {}

  nn::Index input_width() const { return norm.gamma.value.cols(); }

  void init(std::mt19937_64& rng) {
    for (auto* d : {&hidden1, &hidden2, &output}) {
      glorot_uniform(d->kernel.value, d->input_width(), d->output_width(), rng);
      d->bias.value.setZero();
    }
  }

  void collect(nn::ParamRefs<T>& out) {
    norm.collect(out);
    hidden1.collect(out);
    hidden2.collect(out);
    output.collect(out);
  }

  // rng == nullptr selects inference (no dropout).
  nn::Matrix<T> forward(const nn::Matrix<T>& x, std::mt19937_64* rng, Tape& tape) const {
    nn::Matrix<T> a = hidden1.forward(norm.forward(x, tape.norm), tape.hidden1);
    if (rng && dropout1 > 0) {
      tape.mask1 = nn::dropout_mask<T>(a.rows(), a.cols(), dropout1, *rng);
      a.array() *= tape.mask1.array();
    }
    nn::Matrix<T> b = hidden2.forward(a, tape.hidden2);
    if (rng && dropout2 > 0) {
      tape.mask2 = nn::dropout_mask<T>(b.rows(), b.cols(), dropout2, *rng);
      b.array() *= tape.mask2.array();
    }
    return output.forward(b, tape.output);
  }

  nn::Matrix<T> backward(const Tape& tape, const nn::Matrix<T>& dlogits) {
    nn::Matrix<T> d = output.backward(tape.output, dlogits);
    if (tape.mask2.size()) d.array() *= tape.mask2.array();
    d = hidden2.backward(tape.hidden2, std::move(d));
    if (tape.mask1.size()) d.array() *= tape.mask1.array();
    d = hidden1.backward(tape.hidden1, std::move(d));
    return norm.backward(tape.norm, d);
  }
};

}  // namespace toxpipe::model
