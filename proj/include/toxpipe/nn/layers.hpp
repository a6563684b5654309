#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "toxpipe/nn/tensor.hpp"

namespace toxpipe::nn {

// ---------------------------------------------------------------------------
// LSTM
// ---------------------------------------------------------------------------

// Gate blocks are stored side by side in the order [input, forget, cell, output],
// so each tensor carries 4*hidden columns.
template <typename T>
struct LstmParams {
  Param<T> input;      // input_dim x 4H
  Param<T> recurrent;  // H x 4H
  Param<T> bias;       // 1 x 4H

  LstmParams() = default;
  LstmParams(const std::string& prefix, Index input_dim, Index hidden)
      : input(prefix + ".input", input_dim, 4 * hidden),
        recurrent(prefix + ".recurrent", hidden, 4 * hidden),
        bias(prefix + ".bias", 1, 4 * hidden) {}

  Index input_dim() const { return input.value.rows(); }
  Index hidden() const { return recurrent.value.rows(); }

  void collect(ParamRefs<T>& out) {
    out.push_back(&input);
    out.push_back(&recurrent);
    out.push_back(&bias);
  }
};

template <typename T>
struct LstmStep {
  Matrix<T> h;
  Matrix<T> c;
  Matrix<T> gates;  // post-activation i, f, g, o
};

namespace detail {

template <typename T>
auto sigmoid(const T& a) {
  return (a.exp().inverse() + 1).inverse();
}

}  // namespace detail

// One LSTM step over a batch: rows of x, h_prev and c_prev are instances.
template <typename T>
LstmStep<T> lstm_cell_step(const Matrix<T>& x, const Matrix<T>& h_prev, const Matrix<T>& c_prev,
                           const LstmParams<T>& p) {
  const Index hidden = p.hidden();
  if (x.cols() != p.input_dim() || h_prev.cols() != hidden || c_prev.cols() != hidden ||
      h_prev.rows() != x.rows() || c_prev.rows() != x.rows())
    throw std::invalid_argument("lstm_cell_step: shape mismatch");

  LstmStep<T> s;
  s.gates = x * p.input.value + h_prev * p.recurrent.value;
  s.gates.rowwise() += p.bias.value.row(0);
  auto i = s.gates.leftCols(hidden).array();
  auto f = s.gates.middleCols(hidden, hidden).array();
  auto g = s.gates.middleCols(2 * hidden, hidden).array();
  auto o = s.gates.rightCols(hidden).array();
  i = detail::sigmoid(i);
  f = detail::sigmoid(f);
  g = g.tanh();
  o = detail::sigmoid(o);
  s.c = (f * c_prev.array() + i * g).matrix();
  s.h = (o * s.c.array().tanh()).matrix();
  return s;
}

// Per-direction activations, indexed by time position (not processing order).
template <typename T>
struct LstmTape {
  std::vector<Matrix<T>> gates;
  std::vector<Matrix<T>> c;
  std::vector<Matrix<T>> h;
};

template <typename T>
void lstm_sequence_forward(const LstmParams<T>& p, const std::vector<Matrix<T>>& xs, bool reverse,
                           LstmTape<T>& tape) {
  const std::size_t steps = xs.size();
  if (steps == 0) throw std::invalid_argument("lstm: empty sequence");
  const Index batch = xs[0].rows();
  tape.gates.assign(steps, {});
  tape.c.assign(steps, {});
  tape.h.assign(steps, {});
  Matrix<T> h = Matrix<T>::Zero(batch, p.hidden());
  Matrix<T> c = Matrix<T>::Zero(batch, p.hidden());
  for (std::size_t k = 0; k < steps; ++k) {
    const std::size_t t = reverse ? steps - 1 - k : k;
    LstmStep<T> s = lstm_cell_step(xs[t], h, c, p);
    h = s.h;
    c = s.c;
    tape.gates[t] = std::move(s.gates);
    tape.c[t] = std::move(s.c);
    tape.h[t] = std::move(s.h);
  }
}

// Backpropagation through time. dh_out[t] is the upstream gradient w.r.t. h at
// time t; an empty matrix means zero. Returns d(loss)/d(xs[t]) and accumulates
// parameter gradients.
template <typename T>
std::vector<Matrix<T>> lstm_sequence_backward(LstmParams<T>& p, const std::vector<Matrix<T>>& xs,
                                              const LstmTape<T>& tape,
                                              const std::vector<Matrix<T>>& dh_out, bool reverse) {
  const std::size_t steps = xs.size();
  const Index batch = xs[0].rows();
  const Index hidden = p.hidden();
  std::vector<Matrix<T>> dxs(steps);
  Matrix<T> dh_next = Matrix<T>::Zero(batch, hidden);
  Matrix<T> dc_next = Matrix<T>::Zero(batch, hidden);
  const Matrix<T> zeros = Matrix<T>::Zero(batch, hidden);
  Matrix<T> da(batch, 4 * hidden);

  for (std::size_t k = steps; k-- > 0;) {
    const std::size_t t = reverse ? steps - 1 - k : k;
    const bool has_prev = k > 0;
    const std::size_t tp = reverse ? t + 1 : t - 1;
    const Matrix<T>& c_prev = has_prev ? tape.c[tp] : zeros;
    const Matrix<T>& h_prev = has_prev ? tape.h[tp] : zeros;

    const auto& gates = tape.gates[t];
    const auto i = gates.leftCols(hidden).array();
    const auto f = gates.middleCols(hidden, hidden).array();
    const auto g = gates.middleCols(2 * hidden, hidden).array();
    const auto o = gates.rightCols(hidden).array();

    Matrix<T> dh = dh_next;
    if (dh_out[t].size() != 0) dh += dh_out[t];
    const auto tc = tape.c[t].array().tanh().eval();
    const auto dc = (dc_next.array() + dh.array() * o * (1 - tc.square())).eval();

    da.leftCols(hidden) = (dc * g * i * (1 - i)).matrix();
    da.middleCols(hidden, hidden) = (dc * c_prev.array() * f * (1 - f)).matrix();
    da.middleCols(2 * hidden, hidden) = (dc * i * (1 - g.square())).matrix();
    da.rightCols(hidden) = (dh.array() * tc * o * (1 - o)).matrix();

    p.input.grad.noalias() += xs[t].transpose() * da;
    if (has_prev) p.recurrent.grad.noalias() += h_prev.transpose() * da;
    p.bias.grad += da.colwise().sum();

    dxs[t].noalias() = da * p.input.value.transpose();
    dh_next.noalias() = da * p.recurrent.value.transpose();
    dc_next = (dc * f).matrix();
  }
  return dxs;
}

// Two independent LSTMs over the same sequence, outputs concatenated
// [forward | backward] per time step.
template <typename T>
class BiLstm {
 public:
  LstmParams<T> fwd;
  LstmParams<T> bwd;

  struct Tape {
    LstmTape<T> fwd;
    LstmTape<T> bwd;
  };

  BiLstm() = default;
  BiLstm(const std::string& prefix, Index input_dim, Index hidden)
      : fwd(prefix + ".fwd", input_dim, hidden), bwd(prefix + ".bwd", input_dim, hidden) {}

  Index hidden() const { return fwd.hidden(); }
  Index output_width() const { return 2 * fwd.hidden(); }

  void collect(ParamRefs<T>& out) {
    fwd.collect(out);
    bwd.collect(out);
  }

  // With return_sequences=false the result has a single entry: the final
  // forward state (after t=T-1) beside the final backward state (after t=0).
  std::vector<Matrix<T>> forward(const std::vector<Matrix<T>>& xs, bool return_sequences,
                                 Tape& tape) const {
    lstm_sequence_forward(fwd, xs, false, tape.fwd);
    lstm_sequence_forward(bwd, xs, true, tape.bwd);
    const std::size_t steps = xs.size();
    auto concat = [&](const Matrix<T>& a, const Matrix<T>& b) {
      Matrix<T> m(a.rows(), a.cols() + b.cols());
      m << a, b;
      return m;
    };
    std::vector<Matrix<T>> out;
    if (return_sequences) {
      out.reserve(steps);
      for (std::size_t t = 0; t < steps; ++t) out.push_back(concat(tape.fwd.h[t], tape.bwd.h[t]));
    } else {
      out.push_back(concat(tape.fwd.h[steps - 1], tape.bwd.h[0]));
    }
    return out;
  }

  std::vector<Matrix<T>> backward(const std::vector<Matrix<T>>& xs, const Tape& tape,
                                  const std::vector<Matrix<T>>& dout, bool return_sequences) {
    const std::size_t steps = xs.size();
    const Index h = hidden();
    std::vector<Matrix<T>> dh_f(steps), dh_b(steps);
    if (return_sequences) {
      for (std::size_t t = 0; t < steps; ++t) {
        dh_f[t] = dout[t].leftCols(h);
        dh_b[t] = dout[t].rightCols(h);
      }
    } else {
      dh_f[steps - 1] = dout[0].leftCols(h);
      dh_b[0] = dout[0].rightCols(h);
    }
    auto dx = lstm_sequence_backward(fwd, xs, tape.fwd, dh_f, false);
    auto dx_b = lstm_sequence_backward(bwd, xs, tape.bwd, dh_b, true);
    for (std::size_t t = 0; t < steps; ++t) dx[t] += dx_b[t];
    return dx;
  }
};

// Single-sequence convenience form: rows of seq are time steps.
template <typename T>
Matrix<T> bilstm_forward(const Matrix<T>& seq, const LstmParams<T>& fwd, const LstmParams<T>& bwd,
                         bool return_sequences) {
  if (seq.rows() == 0) throw std::invalid_argument("bilstm_forward: empty sequence");
  if (fwd.hidden() != bwd.hidden() || fwd.input_dim() != bwd.input_dim())
    throw std::invalid_argument("bilstm_forward: direction shapes differ");
  BiLstm<T> layer;
  layer.fwd = fwd;
  layer.bwd = bwd;
  std::vector<Matrix<T>> xs;
  xs.reserve(static_cast<std::size_t>(seq.rows()));
  for (Index t = 0; t < seq.rows(); ++t) xs.push_back(seq.row(t));
  typename BiLstm<T>::Tape tape;
  auto out = layer.forward(xs, return_sequences, tape);
  Matrix<T> result(static_cast<Index>(out.size()), layer.output_width());
  for (std::size_t t = 0; t < out.size(); ++t) result.row(static_cast<Index>(t)) = out[t].row(0);
  return result;
}

// ---------------------------------------------------------------------------
// Layer normalization (statistics over the feature axis of each row)
// ---------------------------------------------------------------------------

template <typename T>
class LayerNorm {
 public:
  Param<T> gamma;
  Param<T> beta;
  T eps = T(1e-3);

  struct Tape {
    Matrix<T> xhat;
    Matrix<T> inv_std;  // batch x 1
  };

  LayerNorm() = default;
  LayerNorm(const std::string& prefix, Index width, T epsilon = T(1e-3))
      : gamma(prefix + ".gamma", 1, width), beta(prefix + ".beta", 1, width), eps(epsilon) {
    gamma.value.setOnes();
  }

  void collect(ParamRefs<T>& out) {
    out.push_back(&gamma);
    out.push_back(&beta);
  }

  Matrix<T> forward(const Matrix<T>& x, Tape& tape) const {
    if (x.cols() != gamma.value.cols()) throw std::invalid_argument("layer_norm: width mismatch");
    Matrix<T> centered = x;
    centered.colwise() -= x.rowwise().mean();
    tape.inv_std = ((centered.array().square().rowwise().mean()) + eps).rsqrt().matrix();
    tape.xhat = centered;
    tape.xhat.array().colwise() *= tape.inv_std.col(0).array();
    Matrix<T> y = tape.xhat;
    y.array().rowwise() *= gamma.value.row(0).array();
    y.rowwise() += beta.value.row(0);
    return y;
  }

  Matrix<T> backward(const Tape& tape, const Matrix<T>& dy) {
    gamma.grad += (dy.array() * tape.xhat.array()).matrix().colwise().sum();
    beta.grad += dy.colwise().sum();
    Matrix<T> dxhat = dy;
    dxhat.array().rowwise() *= gamma.value.row(0).array();
    const T n = static_cast<T>(dy.cols());
    const auto sum_d = dxhat.rowwise().sum().eval();
    const auto sum_dx = (dxhat.array() * tape.xhat.array()).rowwise().sum().eval();
    Matrix<T> dx = (dxhat * n);
    dx.colwise() -= sum_d;
    dx -= (tape.xhat.array().colwise() * sum_dx.array()).matrix();
    dx.array().colwise() *= (tape.inv_std.col(0).array() / n);
    return dx;
  }
};

template <typename T>
RowVector<T> layer_norm(const RowVector<T>& x, const RowVector<T>& gamma, const RowVector<T>& beta,
                        T eps) {
  if (x.size() != gamma.size() || x.size() != beta.size())
    throw std::invalid_argument("layer_norm: shape mismatch");
  LayerNorm<T> ln("ln", x.size(), eps);
  ln.gamma.value = gamma;
  ln.beta.value = beta;
  typename LayerNorm<T>::Tape tape;
  return ln.forward(Matrix<T>(x), tape).row(0);
}

// ---------------------------------------------------------------------------
// Dense
// ---------------------------------------------------------------------------

enum class Activation { none, relu };

template <typename T>
class Dense {
 public:
  Param<T> kernel;  // out x in
  Param<T> bias;    // 1 x out
  Activation act = Activation::none;

  struct Tape {
    Matrix<T> input;
    Matrix<T> output;
  };

  Dense() = default;
  Dense(const std::string& prefix, Index in, Index out, Activation activation, bool decayed)
      : kernel(prefix + ".kernel", out, in, decayed), bias(prefix + ".bias", 1, out), act(activation) {}

  Index input_width() const { return kernel.value.cols(); }
  Index output_width() const { return kernel.value.rows(); }

  void collect(ParamRefs<T>& out) {
    out.push_back(&kernel);
    out.push_back(&bias);
  }

  Matrix<T> forward(const Matrix<T>& x, Tape& tape) const {
    if (x.cols() != input_width()) throw std::invalid_argument("dense: shape mismatch");
    Matrix<T> y = x * kernel.value.transpose();
    y.rowwise() += bias.value.row(0);
    if (act == Activation::relu) y = y.cwiseMax(T(0));
    tape.input = x;
    tape.output = y;
    return y;
  }

  Matrix<T> backward(const Tape& tape, Matrix<T> dy) {
    if (act == Activation::relu) dy.array() *= (tape.output.array() > T(0)).template cast<T>();
    kernel.grad.noalias() += dy.transpose() * tape.input;
    bias.grad += dy.colwise().sum();
    return dy * kernel.value;
  }
};

template <typename T>
RowVector<T> dense(const RowVector<T>& x, const Matrix<T>& w, const RowVector<T>& b,
                   Activation act) {
  if (w.cols() != x.size() || w.rows() != b.size())
    throw std::invalid_argument("dense: shape mismatch");
  RowVector<T> y = (w * x.transpose()).transpose() + b;
  if (act == Activation::relu) y = y.cwiseMax(T(0));
  return y;
}

// ---------------------------------------------------------------------------
// Dropout (inverted: survivors scaled by 1/(1-rate) at train time)
// ---------------------------------------------------------------------------

template <typename T>
Matrix<T> dropout_mask(Index rows, Index cols, double rate, std::mt19937_64& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout: rate must be in [0,1)");
  Matrix<T> mask(rows, cols);
  if (rate == 0.0) {
    mask.setOnes();
    return mask;
  }
  std::bernoulli_distribution keep(1.0 - rate);
  const T scale = T(1.0 / (1.0 - rate));
  for (Index i = 0; i < mask.size(); ++i) mask.data()[i] = keep(rng) ? scale : T(0);
  return mask;
}

template <typename T>
Matrix<T> dropout(const Matrix<T>& x, double rate, bool training, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate < 1.0)) throw std::invalid_argument("dropout: rate must be in [0,1)");
  if (!training || rate == 0.0) return x;
  std::mt19937_64 rng(seed);
  return (x.array() * dropout_mask<T>(x.rows(), x.cols(), rate, rng).array()).matrix();
}

// ---------------------------------------------------------------------------
// Softmax cross-entropy with L2 on decayed kernels
// ---------------------------------------------------------------------------

template <typename T>
Matrix<T> softmax_rows(const Matrix<T>& logits) {
  Matrix<T> p = logits;
  p.colwise() -= logits.rowwise().maxCoeff();
  p = p.array().exp().matrix();
  p.array().colwise() /= p.rowwise().sum().array();
  return p;
}

template <typename T>
T l2_penalty(const ParamRefs<T>& params, T l2, bool accumulate_grad) {
  T total = 0;
  if (l2 == T(0)) return total;
  for (auto* p : params) {
    if (!p->decayed || !p->trainable) continue;
    total += p->value.squaredNorm();
    if (accumulate_grad) p->grad += T(2) * l2 * p->value;
  }
  return l2 * total;
}

// Mean cross-entropy over a batch. When dlogits is given it receives
// d(mean loss)/d(logits).
template <typename T>
T softmax_xent_batch(const Matrix<T>& logits, std::span<const int> labels, Matrix<T>& probs,
                     Matrix<T>* dlogits) {
  if (static_cast<std::size_t>(logits.rows()) != labels.size())
    throw std::invalid_argument("softmax_xent: label count mismatch");
  probs = softmax_rows(logits);
  const Index batch = logits.rows();
  T total = 0;
  for (Index r = 0; r < batch; ++r) {
    const int y = labels[static_cast<std::size_t>(r)];
    if (y < 0 || y >= logits.cols()) throw std::invalid_argument("softmax_xent: invalid target");
    const T m = logits.row(r).maxCoeff();
    const T lse = m + std::log((logits.row(r).array() - m).exp().sum());
    total += lse - logits(r, y);
  }
  if (dlogits) {
    *dlogits = probs;
    for (Index r = 0; r < batch; ++r) (*dlogits)(r, labels[static_cast<std::size_t>(r)]) -= T(1);
    *dlogits /= static_cast<T>(batch);
  }
  return total / static_cast<T>(batch);
}

template <typename T>
struct XentResult {
  T loss;
  RowVector<T> probs;
};

template <typename T>
XentResult<T> softmax_xent(const RowVector<T>& logits, int target, T l2, const ParamRefs<T>& params) {
  Matrix<T> probs;
  const int labels[] = {target};
  const T data = softmax_xent_batch(Matrix<T>(logits), std::span<const int>(labels), probs,
                                    static_cast<Matrix<T>*>(nullptr));
  return {data + l2_penalty(params, l2, false), probs.row(0)};
}

}  // namespace toxpipe::nn
