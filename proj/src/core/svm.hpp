#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "core/dataset.hpp"
#include "core/scaler.hpp"

namespace beatfuse {

// Degree-2 polynomial kernel (x.w + b0)^2. b0 is the kernel offset
// constant; the soft-margin box constraint C lives in SmoConfig.
struct PolyKernel {
  double b0 = 1.0;
  static constexpr int kDegree = 2;
};

double kernel_eval(const PolyKernel& k, const Eigen::VectorXd& x, const Eigen::VectorXd& w);

struct SmoConfig {
  double c = 10.0;
  double kkt_tolerance = 1e-3;
  // cap on SMO pair updates; exhausting it leaves converged = false
  int max_passes = 200000;
  std::uint64_t seed = 0;
};

struct SvmBinaryModel {
  Eigen::MatrixXd support_vectors;  // rows = SVs, scaled feature space
  Eigen::VectorXd dual_coefficients;  // alpha_i * y_i
  double bias = 0.0;
  PolyKernel kernel;
  bool converged = true;
  int kkt_violations = 0;

  double decision(const Eigen::VectorXd& x) const;
};

// Per-class logistic score calibration: score = 1/(1+exp(-(slope*f+intercept))).
struct ScoreCalibration {
  double slope = 1.0;
  double intercept = 0.0;
  double apply(double decision) const;
};

struct SvmOvaModel {
  std::array<SvmBinaryModel, kNumTrainable> binary;
  std::array<ScoreCalibration, kNumTrainable> calibration;
  FeatureScaler scaler;
};

// Soft-margin dual via SMO, maximal-violating-pair selection with seeded
// random tie-breaking.
SvmBinaryModel svm_train_binary(const Eigen::MatrixXd& points, const std::vector<int>& labels,
                                const PolyKernel& kernel, const SmoConfig& cfg);

SvmOvaModel svm_train_ova(const Dataset& train, const PolyKernel& kernel, const SmoConfig& cfg);

// Calibrated per-class scores, each in (0,1).
Eigen::VectorXd svm_scores(const SvmOvaModel& model, const FeatureVector& x);

// Logistic fit of decision values to binary labels (regularized targets,
// Newton with backtracking). Exposed for tests.
ScoreCalibration fit_score_calibration(const std::vector<double>& decisions,
                                       const std::vector<int>& labels);

void svm_save(const SvmOvaModel& model, std::ostream& out);
SvmOvaModel svm_load(std::istream& in);

}  // namespace beatfuse
