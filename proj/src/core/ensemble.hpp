#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "core/dataset.hpp"
#include "core/metrics.hpp"

namespace beatfuse {

inline constexpr int kNumClassifiers = 3;  // MLP, RBF, SVM

// One sample's 3 x 5 score block: scores[i][j] = classifier i's class-j
// output.
struct ClassifierOutputs {
  std::array<std::array<double, kNumTrainable>, kNumClassifiers> scores{};
};

// Frozen fusion parameters: normalized-MI weights, per-cell RMS
// normalization factors, and the binarization thresholds for voting and
// for the weighted sum.
struct FusionModel {
  std::array<std::array<double, kNumTrainable>, kNumClassifiers> weights{};       // n_ij
  std::array<std::array<double, kNumTrainable>, kNumClassifiers> norm_factors{};  // > 0
  std::array<std::array<double, kNumTrainable>, kNumClassifiers> vote_thresholds{};
  std::array<double, kNumTrainable> sum_thresholds{};
  // confusion cells of the thresholded calibration outputs that produced
  // each weight, kept for auditability
  std::array<std::array<ConfusionCounts, kNumTrainable>, kNumClassifiers> calibration_cells{};
  MiDenominator mi_denominator = MiDenominator::kTruth;
};

struct VoteDecision {
  std::array<int, kNumTrainable> bits{};
  int final_class = 0;
};

struct WeightedDecision {
  std::array<double, kNumTrainable> sums{};
  std::array<int, kNumTrainable> bits{};
  int final_class = 0;
};

// Threshold on `scores` maximizing Youden's J (sensitivity + specificity
// - 1) against binary truth; prediction is score >= threshold. Ties
// resolve to the lowest candidate threshold. Exposed for tests.
double youden_threshold(const std::vector<double>& scores, const std::vector<int>& truth);

// Calibrate weights, normalization factors, and thresholds on held-out
// outputs; never call with test data.
FusionModel fit_fusion(const std::vector<ClassifierOutputs>& cal_outputs,
                       const std::vector<BeatClass>& cal_truth,
                       MiDenominator denom = MiDenominator::kTruth);

// S_j = sum_i n_ij * score_ij / norm_ij
std::array<double, kNumTrainable> weighted_sum(const ClassifierOutputs& outputs,
                                               const FusionModel& fusion);

// Threshold-then-vote: class j passes with >= 2 of 3 binarized outputs;
// zero or multiple passing classes fall back to the highest mean
// normalized score.
VoteDecision majority_vote(const ClassifierOutputs& outputs, const FusionModel& fusion);

// Per-class bits from sum_thresholds; final class = argmax S.
WeightedDecision predict_weighted(const ClassifierOutputs& outputs, const FusionModel& fusion);

void fusion_save(const FusionModel& fusion, std::ostream& out);
FusionModel fusion_load(std::istream& in);

}  // namespace beatfuse
