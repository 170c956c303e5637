#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace beatfuse {

namespace {

// 0 log 0 = 0 convention throughout.
double plogp(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

double binary_entropy(std::uint64_t a, std::uint64_t b) {
  const double n = static_cast<double>(a + b);
  return -plogp(static_cast<double>(a) / n) - plogp(static_cast<double>(b) / n);
}

}  // namespace

ConfusionCounts confusion(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size())
    throw UsageError("confusion: predicted and truth lengths differ");
  if (predicted.empty()) throw UsageError("confusion: empty sequences");
  ConfusionCounts c;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool p = predicted[i] != 0;
    const bool t = truth[i] != 0;
    if (p && t)
      ++c.tp;
    else if (p && !t)
      ++c.fp;
    else if (!p && t)
      ++c.fn;
    else
      ++c.tn;
  }
  return c;
}

double entropy_truth_marginal(const ConfusionCounts& c) {
  return binary_entropy(c.tp + c.fn, c.tn + c.fp);
}

double entropy_prediction_marginal(const ConfusionCounts& c) {
  return binary_entropy(c.tp + c.fp, c.tn + c.fn);
}

double joint_entropy(const ConfusionCounts& c) {
  const double n = static_cast<double>(c.total());
  return -plogp(c.tp / n) - plogp(c.tn / n) - plogp(c.fp / n) - plogp(c.fn / n);
}

double mutual_information(const ConfusionCounts& c) {
  const double n = static_cast<double>(c.total());
  const double tp = static_cast<double>(c.tp) / n;
  const double tn = static_cast<double>(c.tn) / n;
  const double fp = static_cast<double>(c.fp) / n;
  const double fn = static_cast<double>(c.fn) / n;
  const double pred_pos = tp + fp;
  const double pred_neg = tn + fn;
  const double true_pos = tp + fn;
  const double true_neg = tn + fp;

  double i = -joint_entropy(c);
  if (tp > 0.0) i -= tp * std::log(pred_pos * true_pos);
  if (fn > 0.0) i -= fn * std::log(true_pos * pred_neg);
  if (fp > 0.0) i -= fp * std::log(pred_pos * true_neg);
  if (tn > 0.0) i -= tn * std::log(pred_neg * true_neg);
  return i;
}

bool normalized_mi_degenerate(const ConfusionCounts& c, MiDenominator denom) {
  const double h = denom == MiDenominator::kTruth ? entropy_truth_marginal(c)
                                                  : entropy_prediction_marginal(c);
  return h <= 0.0;
}

double normalized_mi(const ConfusionCounts& c, MiDenominator denom) {
  const double h = denom == MiDenominator::kTruth ? entropy_truth_marginal(c)
                                                  : entropy_prediction_marginal(c);
  if (h <= 0.0) return 0.0;
  const double r = mutual_information(c) / h;
  if (std::abs(r - 1.0) < 1e-12) return 1.0;  // snap fp residue at the I == H limit
  return std::clamp(r, 0.0, 1.0);
}

ClassMetrics class_metrics(const ConfusionCounts& c) {
  if (c.tp + c.fn == 0) throw DataError("class metrics: empty positive population");
  if (c.tn + c.fp == 0) throw DataError("class metrics: empty negative population");
  ClassMetrics m;
  const double n = static_cast<double>(c.total());
  m.accuracy = static_cast<double>(c.tp + c.tn) / n;
  m.sensitivity = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  m.specificity = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
  m.fpr = static_cast<double>(c.fp) / static_cast<double>(c.tn + c.fp);
  m.fnr = static_cast<double>(c.fn) / static_cast<double>(c.tp + c.fn);
  return m;
}

}  // namespace beatfuse
