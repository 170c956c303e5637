#pragma once

#include <cstdint>
#include <vector>

namespace beatfuse {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const { return tp + tn + fp + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

struct ClassMetrics {
  double accuracy = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  double fpr = 0.0;
  double fnr = 0.0;
};

// Which confusion margin the normalized-MI denominator entropy uses.
// The weighting formula writes the truth margin (TP+FN); `kPrediction`
// is the alternative reading over the predicted-positive margin.
enum class MiDenominator { kTruth, kPrediction };

ConfusionCounts confusion(const std::vector<int>& predicted, const std::vector<int>& truth);

// Binary entropy (nats) of the truth margin (TP+FN vs TN+FP).
double entropy_truth_marginal(const ConfusionCounts& c);
// Binary entropy (nats) of the predicted-positive margin (TP+FP vs TN+FN).
double entropy_prediction_marginal(const ConfusionCounts& c);
// Entropy (nats) of the four-cell joint distribution.
double joint_entropy(const ConfusionCounts& c);
// Mutual information (nats) between predicted and true binary labels,
// computed term by term from the four cells and their margins.
double mutual_information(const ConfusionCounts& c);
// Mutual information over the chosen marginal entropy, clamped to [0,1].
// A zero-entropy denominator yields weight 0.
double normalized_mi(const ConfusionCounts& c, MiDenominator denom = MiDenominator::kTruth);
// True when normalized_mi would hit the zero-entropy convention.
bool normalized_mi_degenerate(const ConfusionCounts& c, MiDenominator denom = MiDenominator::kTruth);

ClassMetrics class_metrics(const ConfusionCounts& c);

}  // namespace beatfuse
