#include "toxpipe/eval.hpp"

#include <stdexcept>

namespace toxpipe {

std::size_t ConfusionMatrix::total() const {
  std::size_t n = 0;
  for (const auto& row : counts)
    for (auto c : row) n += c;
  return n;
}

ConfusionMatrix confusion(std::span<const int> preds, std::span<const int> labels) {
  if (preds.size() != labels.size()) throw std::invalid_argument("confusion: length mismatch");
  if (preds.empty()) throw std::invalid_argument("confusion: empty input");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] < 0 || preds[i] >= kNumClasses || labels[i] < 0 || labels[i] >= kNumClasses)
      throw std::invalid_argument("confusion: class id out of range");
    ++cm.counts[labels[i]][preds[i]];
  }
  return cm;
}

Metrics metrics(const ConfusionMatrix& cm) {
  Metrics m;
  const std::size_t total = cm.total();
  std::size_t trace = 0;
  for (int k = 0; k < kNumClasses; ++k) trace += cm.counts[k][k];
  m.accuracy = total ? static_cast<double>(trace) / static_cast<double>(total) : 0.0;

  for (int k = 0; k < kNumClasses; ++k) {
    std::size_t col = 0, row = 0;
    for (int j = 0; j < kNumClasses; ++j) {
      col += cm.counts[j][k];
      row += cm.counts[k][j];
    }
    auto& c = m.per_class[k];
    const auto hit = static_cast<double>(cm.counts[k][k]);
    if (col == 0) c.precision_undefined = true; else c.precision = hit / static_cast<double>(col);
    if (row == 0) c.recall_undefined = true; else c.recall = hit / static_cast<double>(row);
    if (c.precision + c.recall == 0)
      c.f1_undefined = true;
    else
      c.f1 = 2 * c.precision * c.recall / (c.precision + c.recall);
  }
  return m;
}

CostMatrix CostMatrix::from_binary(double false_positive_cost, double false_negative_cost) {
  CostMatrix c;
  for (int k = 1; k < kNumClasses; ++k) {
    c.costs[k][0] = false_positive_cost;
    c.costs[0][k] = false_negative_cost;
  }
  return c;
}

double expected_cost(const ConfusionMatrix& cm, const CostMatrix& costs) {
  double total = 0;
  for (int i = 0; i < kNumClasses; ++i)
    for (int j = 0; j < kNumClasses; ++j)
      total += static_cast<double>(cm.counts[i][j]) * costs.costs[i][j];
  return total;
}

BinaryView binary_view(const ConfusionMatrix& cm) {
  BinaryView b;
  for (int i = 0; i < kNumClasses; ++i) {
    for (int j = 0; j < kNumClasses; ++j) {
      const bool truly_hate = i == 0, flagged = j == 0;
      auto n = cm.counts[i][j];
      if (truly_hate && flagged) b.true_positive += n;
      else if (!truly_hate && flagged) b.false_positive += n;
      else if (truly_hate) b.false_negative += n;
      else b.true_negative += n;
    }
  }
  return b;
}

void to_json(nlohmann::json& j, const ConfusionMatrix& cm) { j = cm.counts; }

void to_json(nlohmann::json& j, const Metrics& m) {
  j = {{"accuracy", m.accuracy}};
  nlohmann::json per = nlohmann::json::array();
  for (int k = 0; k < kNumClasses; ++k) {
    const auto& c = m.per_class[k];
    per.push_back({{"class", kClassNames[k]},
                   {"precision", c.precision},
                   {"recall", c.recall},
                   {"f1", c.f1},
                   {"precision_undefined", c.precision_undefined},
                   {"recall_undefined", c.recall_undefined},
                   {"f1_undefined", c.f1_undefined}});
  }
  j["per_class"] = per;
}

void to_json(nlohmann::json& j, const CostMatrix& c) { j = c.costs; }
void from_json(const nlohmann::json& j, CostMatrix& c) { j.get_to(c.costs); }

void to_json(nlohmann::json& j, const BinaryView& b) {
  j = {{"true_positive", b.true_positive},
       {"false_positive", b.false_positive},
       {"false_negative", b.false_negative},
       {"true_negative", b.true_negative}};
}

void write_confusion_csv(std::ostream& out, const ConfusionMatrix& cm) {
  out << "true\\pred";
  for (int j = 0; j < kNumClasses; ++j) out << ',' << kClassNames[j];
  out << '\n';
  for (int i = 0; i < kNumClasses; ++i) {
    out << kClassNames[i];
    for (int j = 0; j < kNumClasses; ++j) out << ',' << cm.counts[i][j];
    out << '\n';
  }
}

}  // namespace toxpipe
