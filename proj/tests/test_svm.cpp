#include <cmath>
#include <random>
#include <sstream>

#include <doctest.h>

#include "core/errors.hpp"
#include "core/svm.hpp"
#include "oracles.hpp"

using namespace beatfuse;
using namespace beatfuse::testing;

namespace {

Eigen::MatrixXd gram(const Eigen::MatrixXd& pts, const PolyKernel& k) {
  const int n = static_cast<int>(pts.rows());
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      g(i, j) = kernel_eval(k, pts.row(i).transpose(), pts.row(j).transpose());
  return g;
}

}  // namespace

TEST_CASE("kernel closed forms") {
  PolyKernel k;  // b0 = 1
  Eigen::VectorXd x(2), w(2);
  x << 1.0, 0.0;
  w << 1.0, 0.0;
  CHECK(kernel_eval(k, x, w) == 4.0);  // (1 + 1)^2
  w << 0.0, 1.0;
  CHECK(kernel_eval(k, x, w) == 1.0);  // (0 + 1)^2
  k.b0 = 0.0;
  CHECK(kernel_eval(k, x, w) == 0.0);  // orthogonal, no offset
  x << 2.0, 3.0;
  w << 1.0, -1.0;
  CHECK(kernel_eval(k, x, w) == 1.0);  // (-1)^2

  Eigen::VectorXd bad(3);
  CHECK_THROWS_AS(kernel_eval(k, x, bad), UsageError);
}

TEST_CASE("kernel gram matrices are positive semidefinite") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 1.5);
  PolyKernel k;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd pts(8, 4);
    for (int i = 0; i < pts.size(); ++i) pts(i / 4, i % 4) = g(rng);
    const Eigen::MatrixXd gm = gram(pts, k);
    CHECK((gm - gm.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gm);
    CHECK(eig.eigenvalues().minCoeff() > -1e-9 * std::max(1.0, gm.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("SMO separates XOR with the quadratic kernel") {
  Eigen::MatrixXd pts(4, 2);
  pts << 1, 1, -1, -1, 1, -1, -1, 1;
  const std::vector<int> labels = {1, 1, -1, -1};
  SmoConfig cfg;
  cfg.c = 10.0;
  const auto m = svm_train_binary(pts, labels, PolyKernel{}, cfg);
  CHECK(m.converged);
  for (int i = 0; i < 4; ++i) {
    const double f = m.decision(pts.row(i).transpose());
    CHECK(labels[i] * f > 0.0);
  }
  // dual feasibility: sum alpha_i y_i = 0 within tolerance
  CHECK(std::abs(m.dual_coefficients.sum()) < 1e-8);
}

TEST_CASE("conflicting duplicate points saturate at the box constraint") {
  Eigen::MatrixXd pts(2, 1);
  pts << 1.0, 1.0;
  const std::vector<int> labels = {1, -1};
  SmoConfig cfg;
  cfg.c = 2.5;
  const auto m = svm_train_binary(pts, labels, PolyKernel{}, cfg);
  REQUIRE(m.dual_coefficients.size() == 2);
  // both alphas pinned at C; coefficients stored as alpha * y
  std::vector<double> coef = {m.dual_coefficients[0], m.dual_coefficients[1]};
  std::sort(coef.begin(), coef.end());
  CHECK(coef[0] == doctest::Approx(-2.5).epsilon(1e-6));
  CHECK(coef[1] == doctest::Approx(2.5).epsilon(1e-6));
}

TEST_CASE("SMO matches a brute-force dual solver on tiny problems") {
  std::mt19937_64 rng(20260823);
  std::normal_distribution<double> g(0.0, 1.0);
  PolyKernel kernel;
  int solved = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 4 + static_cast<int>(rng() % 5);  // 4..8 points
    Eigen::MatrixXd pts(n, 2);
    std::vector<int> labels(n);
    bool has_pos = false, has_neg = false;
    for (int i = 0; i < n; ++i) {
      pts(i, 0) = g(rng);
      pts(i, 1) = g(rng);
      labels[i] = (rng() & 1) ? 1 : -1;
      (labels[i] > 0 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) continue;
    const double c = 1.0 + static_cast<double>(rng() % 10);

    const Eigen::MatrixXd gm = gram(pts, kernel);
    const auto oracle = brute_force_dual(gm, labels, c);
    if (!oracle.found) continue;

    SmoConfig cfg;
    cfg.c = c;
    cfg.kkt_tolerance = 1e-6;
    cfg.seed = static_cast<std::uint64_t>(trial);
    const auto m = svm_train_binary(pts, labels, kernel, cfg);
    REQUIRE(m.converged);

    // recover the full alpha vector (zero alphas are dropped from the model)
    std::vector<double> alpha(n, 0.0);
    for (int s = 0; s < m.dual_coefficients.size(); ++s) {
      // match the support vector back to its source row
      for (int i = 0; i < n; ++i) {
        if ((m.support_vectors.row(s) - pts.row(i)).norm() < 1e-12 && alpha[i] == 0.0) {
          alpha[i] = std::abs(m.dual_coefficients[s]);
          break;
        }
      }
    }
    const double smo_obj = dual_objective(
        [&] {
          Eigen::MatrixXd q(n, n);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) q(i, j) = labels[i] * labels[j] * gm(i, j);
          return q;
        }(),
        alpha);
    // SMO's dual objective matches the exhaustive optimum
    CHECK(smo_obj == doctest::Approx(oracle.objective).epsilon(1e-5));
    ++solved;
  }
  CHECK(solved >= 30);  // the property actually exercised many problems
}

TEST_CASE("decision is a kernel expansion over support vectors") {
  const auto ds = synth_generate({{BeatClass::Normal, 40}, {BeatClass::PVC, 40},
                                  {BeatClass::APB, 40}, {BeatClass::RBBB, 40},
                                  {BeatClass::LBBB, 40}},
                                 29, 4.0);
  SmoConfig cfg;
  cfg.seed = 8;
  const auto m = svm_train_ova(ds, PolyKernel{}, cfg);
  const auto& bin = m.binary[0];
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd x(FeatureVector::kDim);
    for (int i = 0; i < x.size(); ++i) x[i] = g(rng);
    double expect = bin.bias;
    for (int s = 0; s < bin.dual_coefficients.size(); ++s)
      expect += bin.dual_coefficients[s] *
                kernel_eval(bin.kernel, bin.support_vectors.row(s).transpose(), x);
    CHECK(bin.decision(x) == doctest::Approx(expect).epsilon(1e-10));
  }
  // stored expansions exclude zero coefficients
  for (int c = 0; c < kNumTrainable; ++c)
    for (int s = 0; s < m.binary[c].dual_coefficients.size(); ++s)
      CHECK(m.binary[c].dual_coefficients[s] != 0.0);
}

TEST_CASE("score calibration maps the decision midpoint near 0.5") {
  // symmetric, cleanly separated decisions
  std::vector<double> decisions;
  std::vector<int> labels;
  for (int i = 1; i <= 20; ++i) {
    decisions.push_back(0.1 * i);
    labels.push_back(1);
    decisions.push_back(-0.1 * i);
    labels.push_back(-1);
  }
  const auto cal = fit_score_calibration(decisions, labels);
  CHECK(cal.apply(0.0) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(cal.apply(2.0) > 0.9);
  CHECK(cal.apply(-2.0) < 0.1);
  CHECK(cal.slope > 0.0);
  // monotone in the decision value
  double prev = 0.0;
  for (double f = -3.0; f <= 3.0; f += 0.25) {
    const double s = cal.apply(f);
    CHECK(s > prev);
    CHECK(s > 0.0);
    CHECK(s < 1.0);
    prev = s;
  }
}

TEST_CASE("five-class one-vs-all on separated data") {
  const auto train = synth_generate({{BeatClass::Normal, 60}, {BeatClass::PVC, 60},
                                     {BeatClass::APB, 60}, {BeatClass::RBBB, 60},
                                     {BeatClass::LBBB, 60}},
                                    51, 6.0);
  const auto test = synth_generate({{BeatClass::Normal, 30}, {BeatClass::PVC, 30},
                                    {BeatClass::APB, 30}, {BeatClass::RBBB, 30},
                                    {BeatClass::LBBB, 30}},
                                   52, 6.0);
  SmoConfig cfg;
  cfg.seed = 2;
  const auto m = svm_train_ova(train, PolyKernel{}, cfg);
  std::size_t correct = 0;
  for (const auto& b : test.beats()) {
    const Eigen::VectorXd s = svm_scores(m, b.features);
    REQUIRE(s.size() == kNumTrainable);
    CHECK(s.minCoeff() > 0.0);
    CHECK(s.maxCoeff() < 1.0);
    int arg = 0;
    s.maxCoeff(&arg);
    correct += arg == static_cast<int>(b.label);
  }
  CHECK(static_cast<double>(correct) / static_cast<double>(test.size()) > 0.98);
}

TEST_CASE("ova training determinism") {
  const auto ds = synth_generate({{BeatClass::Normal, 30}, {BeatClass::PVC, 30},
                                  {BeatClass::APB, 30}, {BeatClass::RBBB, 30},
                                  {BeatClass::LBBB, 30}},
                                 61, 4.0);
  SmoConfig cfg;
  cfg.seed = 14;
  const auto a = svm_train_ova(ds, PolyKernel{}, cfg);
  const auto b = svm_train_ova(ds, PolyKernel{}, cfg);
  for (int c = 0; c < kNumTrainable; ++c) {
    CHECK(a.binary[c].dual_coefficients == b.binary[c].dual_coefficients);
    CHECK(a.binary[c].bias == b.binary[c].bias);
    CHECK(a.calibration[c].slope == b.calibration[c].slope);
  }
}

TEST_CASE("ova training requires every class") {
  const auto ds = synth_generate({{BeatClass::Normal, 30}, {BeatClass::PVC, 30},
                                  {BeatClass::APB, 30}, {BeatClass::RBBB, 30}},
                                 1, 3.0);
  CHECK_THROWS_WITH_AS(svm_train_ova(ds, PolyKernel{}, SmoConfig{}),
                       doctest::Contains("LBBB"), DataError);
}

TEST_CASE("svm save/load round trip is bit exact") {
  const auto ds = synth_generate({{BeatClass::Normal, 25}, {BeatClass::PVC, 25},
                                  {BeatClass::APB, 25}, {BeatClass::RBBB, 25},
                                  {BeatClass::LBBB, 25}},
                                 71, 4.0);
  SmoConfig cfg;
  cfg.seed = 5;
  const auto m = svm_train_ova(ds, PolyKernel{}, cfg);
  std::stringstream buf;
  svm_save(m, buf);
  const auto back = svm_load(buf);
  for (int c = 0; c < kNumTrainable; ++c) {
    CHECK(back.binary[c].support_vectors == m.binary[c].support_vectors);
    CHECK(back.binary[c].dual_coefficients == m.binary[c].dual_coefficients);
    CHECK(back.binary[c].bias == m.binary[c].bias);
    CHECK(back.calibration[c].slope == m.calibration[c].slope);
    CHECK(back.calibration[c].intercept == m.calibration[c].intercept);
  }
  for (const auto& b : ds.beats())
    CHECK(svm_scores(back, b.features) == svm_scores(m, b.features));
}
