#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "toxpipe/nn/tensor.hpp"

namespace toxpipe::nn {

struct GradCheckEntry {
  std::string param;
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::vector<GradCheckEntry> per_param;
};

inline double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-12});
  return std::abs(analytic - numeric) / denom;
}

// Compares the analytic gradients already stored in params[i]->grad with
// central differences of `loss`. Up to `samples` coordinates per trainable
// tensor are checked (all of them when the tensor is smaller). `loss` must
// be a pure function of the parameter values.
template <typename T, typename LossFn>
GradCheckReport grad_check(LossFn&& loss, const ParamRefs<T>& params, T h, std::size_t samples,
                           std::uint64_t seed) {
  GradCheckReport report;
  std::mt19937_64 rng(seed);
  for (auto* p : params) {
    if (!p->trainable) continue;
    GradCheckEntry entry{p->name, 0.0, 0};
    const auto n = static_cast<std::size_t>(p->value.size());
    std::vector<std::size_t> coords;
    if (n <= samples) {
      for (std::size_t i = 0; i < n; ++i) coords.push_back(i);
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, n - 1);
      for (std::size_t i = 0; i < samples; ++i) coords.push_back(pick(rng));
    }
    for (std::size_t idx : coords) {
      T& theta = p->value.data()[idx];
      const T saved = theta;
      theta = saved + h;
      const T up = loss();
      theta = saved - h;
      const T down = loss();
      theta = saved;
      if (!std::isfinite(static_cast<double>(up)) || !std::isfinite(static_cast<double>(down)))
        throw std::runtime_error("grad_check: non-finite loss at " + p->name);
      const double numeric = (static_cast<double>(up) - static_cast<double>(down)) / (2.0 * h);
      const double analytic = static_cast<double>(p->grad.data()[idx]);
      entry.max_rel_error = std::max(entry.max_rel_error, relative_error(analytic, numeric));
      ++entry.checked;
    }
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.per_param.push_back(entry);
  }
  return report;
}

}  // namespace toxpipe::nn
