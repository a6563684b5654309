#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace toxpipe::nn {

using Index = Eigen::Index;

// Row-major dense block. Batched activations are (batch x features).
template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
using RowVector = Eigen::Matrix<T, 1, Eigen::Dynamic>;

// A trainable tensor together with its gradient accumulator.
template <typename T>
struct Param {
  std::string name;
  Matrix<T> value;
  Matrix<T> grad;
  bool trainable = true;
  // Receives the L2 penalty (hidden dense kernels only).
  bool decayed = false;

  Param() = default;
  Param(std::string n, Index rows, Index cols, bool decay = false)
      : name(std::move(n)),
        value(Matrix<T>::Zero(rows, cols)),
        grad(Matrix<T>::Zero(rows, cols)),
        decayed(decay) {}

  std::size_t size() const { return static_cast<std::size_t>(value.size()); }
  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

template <typename T>
using ParamRefs = std::vector<Param<T>*>;

template <typename T>
bool all_finite(const Matrix<T>& m) {
  return m.allFinite();
}

// Number of trainable scalars across a parameter list.
template <typename T>
std::size_t trainable_count(const ParamRefs<T>& params) {
  std::size_t n = 0;
  for (const auto* p : params)
    if (p->trainable) n += p->size();
  return n;
}

template <typename T>
void zero_grads(const ParamRefs<T>& params) {
  for (auto* p : params) p->zero_grad();
}

template <typename T>
std::vector<Matrix<T>> snapshot(const ParamRefs<T>& params) {
  std::vector<Matrix<T>> out;
  out.reserve(params.size());
  for (const auto* p : params) out.push_back(p->value);
  return out;
}

template <typename T>
void restore(const ParamRefs<T>& params, const std::vector<Matrix<T>>& values) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
}

// splitmix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return mix_seed(a ^ mix_seed(b));
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return mix_seed(mix_seed(a, b), c);
}

}  // namespace toxpipe::nn
