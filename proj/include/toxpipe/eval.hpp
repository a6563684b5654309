#pragma once

#include <array>
#include <cstddef>
#include <ostream>
#include <span>

#include <nlohmann/json.hpp>

#include "toxpipe/corpus.hpp"

namespace toxpipe {

// counts[i][j]: true class i predicted as class j.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, kNumClasses>, kNumClasses> counts{};

  std::size_t total() const;
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> labels);

struct ClassMetrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  // Set when the respective denominator was zero (value reported as 0).
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;
};

struct Metrics {
  double accuracy = 0;
  std::array<ClassMetrics, kNumClasses> per_class;
};

Metrics metrics(const ConfusionMatrix& cm);

// costs[i][j]: cost of predicting j for true class i. Correct predictions
// (the diagonal) cost nothing unless set otherwise.
struct CostMatrix {
  std::array<std::array<double, kNumClasses>, kNumClasses> costs{};

  // Class 0 (hate) is the positive class; classes 1 and 2 are acceptable.
  // A false positive flags an acceptable tweet as hate, a false negative
  // lets hate through.
  static CostMatrix from_binary(double false_positive_cost, double false_negative_cost);
};

double expected_cost(const ConfusionMatrix& cm, const CostMatrix& costs);

struct BinaryView {
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t false_negative = 0;
  std::size_t true_negative = 0;
};

BinaryView binary_view(const ConfusionMatrix& cm);

void to_json(nlohmann::json& j, const ConfusionMatrix& cm);
void to_json(nlohmann::json& j, const Metrics& m);
void to_json(nlohmann::json& j, const CostMatrix& c);
void from_json(const nlohmann::json& j, CostMatrix& c);
void to_json(nlohmann::json& j, const BinaryView& b);

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm);

}  // namespace toxpipe
