#include <cmath>
#include <random>

#include <doctest.h>

#include "core/errors.hpp"
#include "core/metrics.hpp"
#include "oracles.hpp"

using namespace beatfuse;
using namespace beatfuse::testing;

TEST_CASE("confusion counting") {
  CHECK(confusion({1, 1, 0, 0}, {1, 1, 0, 0}) == ConfusionCounts{2, 2, 0, 0});
  CHECK(confusion({0, 0, 1, 1}, {1, 1, 0, 0}) == ConfusionCounts{0, 0, 2, 2});
  const auto c = confusion({1, 0, 1, 0, 0}, {1, 1, 0, 0, 0});
  CHECK(c.tp == 1);
  CHECK(c.fn == 1);
  CHECK(c.fp == 1);
  CHECK(c.tn == 2);
  CHECK_THROWS_AS(confusion({1}, {1, 0}), UsageError);
  CHECK_THROWS_AS(confusion({}, {}), UsageError);
}

TEST_CASE("truth-marginal entropy") {
  CHECK(entropy_truth_marginal({25, 25, 25, 25}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(entropy_truth_marginal({100, 0, 0, 0}) == 0.0);
  // (40+10)/100 = 0.5 marginal
  CHECK(entropy_truth_marginal({40, 45, 5, 10}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("joint entropy") {
  CHECK(joint_entropy({25, 25, 25, 25}) == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(joint_entropy({100, 0, 0, 0}) == 0.0);
  CHECK(joint_entropy({50, 50, 0, 0}) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("mutual information basics") {
  // identity channel
  const ConfusionCounts perfect{50, 50, 0, 0};
  CHECK(mutual_information(perfect) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(mutual_information(perfect) ==
        doctest::Approx(entropy_truth_marginal(perfect)).epsilon(1e-12));
  // product-of-margins table
  CHECK(std::abs(mutual_information({25, 25, 25, 25})) < 1e-12);
  // cross-checked against the entropy-identity oracle
  const ConfusionCounts c{40, 45, 5, 10};
  CHECK(mutual_information(c) == doctest::Approx(oracle_mutual_information(c)).epsilon(1e-12));
}

TEST_CASE("mutual information identity oracle over random tables") {
  std::mt19937_64 rng(20260823);
  for (int k = 0; k < 1000; ++k) {
    const auto c = random_confusion(rng);
    const double i = mutual_information(c);
    CHECK(std::abs(i - oracle_mutual_information(c)) < 1e-12);
    CHECK(i >= -1e-12);
    CHECK(i <= std::min(oracle_entropy_pred(c), oracle_entropy_true(c)) + 1e-12);
    const double n = normalized_mi(c);
    CHECK(n >= 0.0);
    CHECK(n <= 1.0);
  }
}

TEST_CASE("normalized MI") {
  CHECK(normalized_mi({50, 50, 0, 0}) == 1.0);
  CHECK(normalized_mi({25, 25, 25, 25}) == doctest::Approx(0.0).epsilon(1e-12));
  // all-positive truth: zero-entropy denominator convention
  const ConfusionCounts degenerate{90, 0, 0, 10};
  CHECK(normalized_mi_degenerate(degenerate));
  CHECK(normalized_mi(degenerate) == 0.0);
  // all-positive prediction: I vanishes, so both denominator readings
  // give weight 0
  const ConfusionCounts all_pred_pos{90, 0, 10, 0};
  CHECK(std::abs(normalized_mi(all_pred_pos, MiDenominator::kTruth)) < 1e-12);
  CHECK(normalized_mi(all_pred_pos, MiDenominator::kPrediction) == 0.0);
}

TEST_CASE("normalized MI base invariance") {
  // nats vs bits cancels in the ratio
  std::mt19937_64 rng(7);
  for (int k = 0; k < 100; ++k) {
    const auto c = random_confusion(rng);
    const double h = entropy_truth_marginal(c);
    if (h <= 0.0) continue;
    const double nat = mutual_information(c) / h;
    const double bit = (mutual_information(c) / std::log(2.0)) / (h / std::log(2.0));
    CHECK(nat == doctest::Approx(bit).epsilon(1e-12));
  }
}

TEST_CASE("mutual information symmetry under fp/fn swap") {
  std::mt19937_64 rng(13);
  for (int k = 0; k < 200; ++k) {
    const auto c = random_confusion(rng);
    const ConfusionCounts swapped{c.tp, c.tn, c.fn, c.fp};
    CHECK(mutual_information(c) == doctest::Approx(mutual_information(swapped)).epsilon(1e-12));
  }
}

TEST_CASE("cell-scaling invariance") {
  std::mt19937_64 rng(99);
  for (int k = 0; k < 100; ++k) {
    const auto c = random_confusion(rng, 200);
    const ConfusionCounts scaled{c.tp * 7, c.tn * 7, c.fp * 7, c.fn * 7};
    CHECK(mutual_information(c) == doctest::Approx(mutual_information(scaled)).epsilon(1e-12));
    CHECK(joint_entropy(c) == doctest::Approx(joint_entropy(scaled)).epsilon(1e-12));
    CHECK(normalized_mi(c) == doctest::Approx(normalized_mi(scaled)).epsilon(1e-12));
    if (c.tp + c.fn > 0 && c.tn + c.fp > 0) {
      const auto m1 = class_metrics(c);
      const auto m2 = class_metrics(scaled);
      CHECK(m1.accuracy == doctest::Approx(m2.accuracy).epsilon(1e-12));
      CHECK(m1.sensitivity == doctest::Approx(m2.sensitivity).epsilon(1e-12));
    }
  }
}

TEST_CASE("MI denominator switch") {
  // asymmetric table: the two readings differ
  const ConfusionCounts c{80, 10, 5, 5};
  const double truth_w = normalized_mi(c, MiDenominator::kTruth);
  const double pred_w = normalized_mi(c, MiDenominator::kPrediction);
  CHECK(truth_w == doctest::Approx(mutual_information(c) / oracle_entropy_true(c)));
  CHECK(pred_w == doctest::Approx(mutual_information(c) / oracle_entropy_pred(c)));
}

TEST_CASE("class metrics") {
  const auto perfect = class_metrics({50, 50, 0, 0});
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.sensitivity == 1.0);
  CHECK(perfect.specificity == 1.0);
  CHECK(perfect.fpr == 0.0);
  CHECK(perfect.fnr == 0.0);

  // ratios matching the published RBBB row shape: 93.33% sensitivity with
  // 99.67% specificity forces fnr 6.67% and fpr 0.33%
  const auto m = class_metrics({9333, 9967, 33, 667});
  CHECK(m.sensitivity == doctest::Approx(0.9333).epsilon(1e-12));
  CHECK(m.specificity == doctest::Approx(0.9967).epsilon(1e-12));
  CHECK(m.fnr == doctest::Approx(1.0 - m.sensitivity).epsilon(1e-12));
  CHECK(m.fpr == doctest::Approx(1.0 - m.specificity).epsilon(1e-12));

  const auto small = class_metrics({1, 4, 2, 3});
  CHECK(small.sensitivity == doctest::Approx(0.25));
  CHECK(small.specificity == doctest::Approx(2.0 / 3.0));
  CHECK(small.accuracy == doctest::Approx(0.5));

  CHECK_THROWS_AS(class_metrics({0, 10, 5, 0}), DataError);  // empty positives
  CHECK_THROWS_AS(class_metrics({5, 0, 0, 5}), DataError);   // empty negatives
}
