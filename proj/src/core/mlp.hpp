#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "core/dataset.hpp"
#include "core/scaler.hpp"

namespace beatfuse {

// Single-hidden-layer perceptron: sigmoid hidden units, linear outputs.
struct MlpModel {
  int input_dim = FeatureVector::kDim;
  int hidden_dim = 35;
  int output_dim = kNumTrainable;
  Eigen::MatrixXd hidden_weights;  // hidden_dim x input_dim
  Eigen::VectorXd hidden_bias;     // hidden_dim
  Eigen::MatrixXd output_weights;  // output_dim x hidden_dim
  Eigen::VectorXd output_bias;     // output_dim
  FeatureScaler scaler;

  int parameter_count() const {
    return hidden_dim * input_dim + hidden_dim + output_dim * hidden_dim + output_dim;
  }
};

struct LmConfig {
  double lambda_init = 1e-3;
  double lambda_up = 10.0;
  double lambda_down = 10.0;
  int max_epochs = 300;
  double mse_goal = 1e-4;
  double max_lambda = 1e10;
  std::uint64_t seed = 0;
};

enum class LmStatus { kGoalReached, kMaxEpochs, kLambdaLimit, kStalled };

struct LmResult {
  MlpModel model;
  // MSE before training followed by the MSE after each accepted step;
  // strictly decreasing.
  std::vector<double> mse_history;
  LmStatus status = LmStatus::kMaxEpochs;
};

// Symmetric 1/sqrt(fan-in) initialization, deterministic per seed.
MlpModel mlp_init(int input_dim, int hidden_dim, int output_dim, std::uint64_t seed);

Eigen::VectorXd mlp_forward(const MlpModel& model, const FeatureVector& x);
// Forward pass on already-scaled inputs (rows = samples).
Eigen::MatrixXd mlp_forward_scaled(const MlpModel& model, const Eigen::MatrixXd& x);

// Full-batch Levenberg-Marquardt on one-hot targets. Fits the z-score
// scaler on `train` before optimizing.
LmResult mlp_train_lm(const MlpModel& model, const Dataset& train, const LmConfig& cfg);

// Flat parameter vector [W1 row-major, b1, W2 row-major, b2] and its
// inverse; used by training and by the finite-difference checks.
Eigen::VectorXd mlp_pack(const MlpModel& model);
void mlp_unpack(const Eigen::VectorXd& theta, MlpModel* model);

// Jacobian of all network outputs w.r.t. the packed parameters, rows
// ordered sample-major then output; residuals e = target - output.
void mlp_jacobian(const MlpModel& model, const Eigen::MatrixXd& x,
                  const Eigen::MatrixXd& targets, Eigen::MatrixXd* jacobian,
                  Eigen::VectorXd* residuals);

void mlp_save(const MlpModel& model, std::ostream& out);
MlpModel mlp_load(std::istream& in);

}  // namespace beatfuse
