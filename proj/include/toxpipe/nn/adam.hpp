#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "toxpipe/nn/tensor.hpp"

namespace toxpipe::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

template <typename T>
struct AdamState {
  AdamConfig config;
  std::size_t step = 0;
  std::vector<Matrix<T>> m;
  std::vector<Matrix<T>> v;

  AdamState() = default;
  AdamState(const ParamRefs<T>& params, AdamConfig cfg) : config(cfg) {
    m.reserve(params.size());
    v.reserve(params.size());
    for (const auto* p : params) {
      m.push_back(Matrix<T>::Zero(p->value.rows(), p->value.cols()));
      v.push_back(Matrix<T>::Zero(p->value.rows(), p->value.cols()));
    }
  }
};

// Bias-corrected Adam update using the gradients stored on each parameter.
// Frozen parameters are skipped.
template <typename T>
void adam_step(const ParamRefs<T>& params, AdamState<T>& state) {
  if (state.m.size() != params.size()) throw std::invalid_argument("adam_step: state/param mismatch");
  const auto& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const T correction1 = T(1.0 - std::pow(c.beta1, t));
  const T correction2 = T(1.0 - std::pow(c.beta2, t));
  const T b1 = T(c.beta1), b2 = T(c.beta2), lr = T(c.lr), eps = T(c.epsilon);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Param<T>& p = *params[k];
    if (!p.trainable) continue;
    if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols() ||
        state.m[k].rows() != p.value.rows() || state.m[k].cols() != p.value.cols())
      throw std::invalid_argument("adam_step: shape mismatch for " + p.name);
    auto m = state.m[k].array();
    auto v = state.v[k].array();
    const auto g = p.grad.array();
    m = b1 * m + (T(1) - b1) * g;
    v = b2 * v + (T(1) - b2) * g.square();
    p.value.array() -= lr * (m / correction1) / ((v / correction2).sqrt() + eps);
  }
}

}  // namespace toxpipe::nn
