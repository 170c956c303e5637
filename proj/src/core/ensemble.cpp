#include "core/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "core/errors.hpp"
#include "core/serialize.hpp"
#include "core/textnum.hpp"

namespace beatfuse {

double youden_threshold(const std::vector<double>& scores, const std::vector<int>& truth) {
  const std::size_t n = scores.size();
  if (n == 0 || n != truth.size()) throw UsageError("youden_threshold: bad inputs");
  std::size_t n_pos = 0;
  for (int t : truth) n_pos += t != 0;
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw DataError("youden_threshold: truth has a single class");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // sweep candidate thresholds from below the minimum upward; at each
  // distinct score value the points below it flip to predicted-negative
  double best_threshold = scores[order[0]] - 1.0;
  std::size_t tp = n_pos, fp = n_neg;  // everything predicted positive
  double best_j = static_cast<double>(tp) / n_pos - static_cast<double>(fp) / n_neg;
  std::size_t k = 0;
  while (k < n) {
    const double v = scores[order[k]];
    while (k < n && scores[order[k]] == v) {
      if (truth[order[k]])
        --tp;
      else
        --fp;
      ++k;
    }
    const double threshold =
        k < n ? (v + scores[order[k]]) / 2.0 : v + 1.0;
    const double j = static_cast<double>(tp) / n_pos - static_cast<double>(fp) / n_neg;
    if (j > best_j) {
      best_j = j;
      best_threshold = threshold;
    }
  }
  return best_threshold;
}

namespace {

std::array<double, kNumTrainable> mean_normalized_scores(const ClassifierOutputs& outputs,
                                                         const FusionModel& fusion) {
  std::array<double, kNumTrainable> mean{};
  for (int j = 0; j < kNumTrainable; ++j) {
    double s = 0.0;
    for (int i = 0; i < kNumClassifiers; ++i)
      s += outputs.scores[i][j] / fusion.norm_factors[i][j];
    mean[j] = s / kNumClassifiers;
  }
  return mean;
}

}  // namespace

FusionModel fit_fusion(const std::vector<ClassifierOutputs>& cal_outputs,
                       const std::vector<BeatClass>& cal_truth, MiDenominator denom) {
  const std::size_t n = cal_outputs.size();
  if (n == 0 || n != cal_truth.size())
    throw UsageError("fit_fusion: calibration outputs and truth must align and be non-empty");
  std::array<std::size_t, kNumTrainable> class_count{};
  for (BeatClass c : cal_truth) {
    if (static_cast<int>(c) >= kNumTrainable)
      throw DataError("fit_fusion: OTHER beats may not enter calibration");
    ++class_count[static_cast<int>(c)];
  }
  int distinct = 0;
  for (auto k : class_count) distinct += k > 0;
  if (distinct < 2) throw DataError("fit_fusion: calibration truth needs >= 2 distinct classes");
  for (int j = 0; j < kNumTrainable; ++j)
    if (class_count[j] == 0)
      throw DataError("fit_fusion: class " + class_label(static_cast<BeatClass>(j)) +
                      " missing from calibration truth");

  FusionModel fusion;
  fusion.mi_denominator = denom;
  for (int i = 0; i < kNumClassifiers; ++i) {
    for (int j = 0; j < kNumTrainable; ++j) {
      std::vector<double> scores(n);
      std::vector<int> truth(n);
      double sum = 0.0, sum_sq = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        scores[s] = cal_outputs[s].scores[i][j];
        truth[s] = static_cast<int>(cal_truth[s]) == j;
        sum += scores[s];
        sum_sq += scores[s] * scores[s];
      }
      const double mean = sum / static_cast<double>(n);
      // centered two-pass variance: exact-constant cells stay below the
      // threshold instead of picking up catastrophic-cancellation noise
      double var = 0.0;
      for (std::size_t s = 0; s < n; ++s) var += (scores[s] - mean) * (scores[s] - mean);
      var /= static_cast<double>(n);
      if (var < 1e-24)
        throw DataError("fit_fusion: zero-variance scores for classifier " +
                        std::to_string(i + 1) + ", class " +
                        class_label(static_cast<BeatClass>(j)));
      // RMS of the calibration scores = ||a_ij|| / sqrt(N); frozen so
      // per-sample normalization matches calibration-vector normalization
      fusion.norm_factors[i][j] = std::sqrt(sum_sq / static_cast<double>(n));

      fusion.vote_thresholds[i][j] = youden_threshold(scores, truth);
      std::vector<int> predicted(n);
      for (std::size_t s = 0; s < n; ++s)
        predicted[s] = scores[s] >= fusion.vote_thresholds[i][j];
      fusion.calibration_cells[i][j] = confusion(predicted, truth);
      fusion.weights[i][j] = normalized_mi(fusion.calibration_cells[i][j], denom);
    }
  }

  for (int j = 0; j < kNumTrainable; ++j) {
    std::vector<double> sums(n);
    std::vector<int> truth(n);
    for (std::size_t s = 0; s < n; ++s) {
      sums[s] = weighted_sum(cal_outputs[s], fusion)[j];
      truth[s] = static_cast<int>(cal_truth[s]) == j;
    }
    fusion.sum_thresholds[j] = youden_threshold(sums, truth);
  }
  return fusion;
}

std::array<double, kNumTrainable> weighted_sum(const ClassifierOutputs& outputs,
                                               const FusionModel& fusion) {
  std::array<double, kNumTrainable> s{};
  for (int j = 0; j < kNumTrainable; ++j) {
    double acc = 0.0;
    for (int i = 0; i < kNumClassifiers; ++i)
      acc += fusion.weights[i][j] * outputs.scores[i][j] / fusion.norm_factors[i][j];
    s[j] = acc;
  }
  return s;
}

VoteDecision majority_vote(const ClassifierOutputs& outputs, const FusionModel& fusion) {
  VoteDecision d;
  std::vector<int> passing;
  for (int j = 0; j < kNumTrainable; ++j) {
    int votes = 0;
    for (int i = 0; i < kNumClassifiers; ++i)
      votes += outputs.scores[i][j] >= fusion.vote_thresholds[i][j];
    d.bits[j] = votes >= 2;
    if (d.bits[j]) passing.push_back(j);
  }
  if (passing.size() == 1) {
    d.final_class = passing[0];
    return d;
  }
  // zero or multiple passing classes: highest mean normalized score,
  // restricted to the passing set when there is one
  const auto mean = mean_normalized_scores(outputs, fusion);
  std::vector<int> pool = passing;
  if (pool.empty()) {
    pool.resize(kNumTrainable);
    std::iota(pool.begin(), pool.end(), 0);
  }
  int best = pool[0];
  for (int j : pool)
    if (mean[j] > mean[best]) best = j;
  d.final_class = best;
  return d;
}

WeightedDecision predict_weighted(const ClassifierOutputs& outputs, const FusionModel& fusion) {
  WeightedDecision d;
  d.sums = weighted_sum(outputs, fusion);
  int best = 0;
  for (int j = 0; j < kNumTrainable; ++j) {
    d.bits[j] = d.sums[j] >= fusion.sum_thresholds[j];
    if (d.sums[j] > d.sums[best]) best = j;
  }
  d.final_class = best;
  return d;
}

void fusion_save(const FusionModel& fusion, std::ostream& out) {
  out << "beatfuse-fusion 1\n";
  out << (fusion.mi_denominator == MiDenominator::kTruth ? "truth" : "prediction") << "\n";
  auto write_grid = [&](const std::array<std::array<double, kNumTrainable>, kNumClassifiers>& g) {
    for (int i = 0; i < kNumClassifiers; ++i) {
      for (int j = 0; j < kNumTrainable; ++j) {
        if (j) out << ' ';
        out << format_hex_double(g[i][j]);
      }
      out << "\n";
    }
  };
  write_grid(fusion.weights);
  write_grid(fusion.norm_factors);
  write_grid(fusion.vote_thresholds);
  for (int j = 0; j < kNumTrainable; ++j) {
    if (j) out << ' ';
    out << format_hex_double(fusion.sum_thresholds[j]);
  }
  out << "\n";
  for (int i = 0; i < kNumClassifiers; ++i)
    for (int j = 0; j < kNumTrainable; ++j) {
      const auto& c = fusion.calibration_cells[i][j];
      out << c.tp << ' ' << c.tn << ' ' << c.fp << ' ' << c.fn << "\n";
    }
}

FusionModel fusion_load(std::istream& in) {
  expect_magic(in, "beatfuse-fusion", 1);
  FusionModel fusion;
  std::string denom;
  in >> denom;
  if (denom == "truth")
    fusion.mi_denominator = MiDenominator::kTruth;
  else if (denom == "prediction")
    fusion.mi_denominator = MiDenominator::kPrediction;
  else
    throw DataError("fusion model file: bad mi denominator '" + denom + "'");
  auto read_grid = [&](std::array<std::array<double, kNumTrainable>, kNumClassifiers>& g) {
    std::string tok;
    for (int i = 0; i < kNumClassifiers; ++i)
      for (int j = 0; j < kNumTrainable; ++j) {
        if (!(in >> tok)) throw DataError("fusion model file: truncated");
        g[i][j] = parse_hex_double(tok);
      }
  };
  read_grid(fusion.weights);
  read_grid(fusion.norm_factors);
  read_grid(fusion.vote_thresholds);
  std::string tok;
  for (int j = 0; j < kNumTrainable; ++j) {
    if (!(in >> tok)) throw DataError("fusion model file: truncated");
    fusion.sum_thresholds[j] = parse_hex_double(tok);
  }
  for (int i = 0; i < kNumClassifiers; ++i)
    for (int j = 0; j < kNumTrainable; ++j) {
      auto& c = fusion.calibration_cells[i][j];
      if (!(in >> c.tp >> c.tn >> c.fp >> c.fn))
        throw DataError("fusion model file: truncated confusion cells");
    }
  return fusion;
}

}  // namespace beatfuse
