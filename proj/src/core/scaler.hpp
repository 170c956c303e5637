#pragma once

#include <Eigen/Dense>

#include "core/dataset.hpp"

namespace beatfuse {

// Per-feature z-score scaler fitted on training data. Identity until
// fitted; zero-variance features get std 1 so they pass through centred.
class FeatureScaler {
 public:
  FeatureScaler()
      : mean_(Eigen::VectorXd::Zero(FeatureVector::kDim)),
        std_(Eigen::VectorXd::Ones(FeatureVector::kDim)) {}
  FeatureScaler(Eigen::VectorXd mean, Eigen::VectorXd stddev)
      : mean_(std::move(mean)), std_(std::move(stddev)) {}

  static FeatureScaler fit(const Dataset& ds);
  static FeatureScaler identity() { return FeatureScaler(); }

  Eigen::VectorXd apply(const FeatureVector& f) const {
    Eigen::VectorXd x(FeatureVector::kDim);
    const auto v = f.values();
    for (int i = 0; i < FeatureVector::kDim; ++i) x[i] = (v[i] - mean_[i]) / std_[i];
    return x;
  }

  // Rows = samples, scaled.
  Eigen::MatrixXd apply(const Dataset& ds) const;

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& stddev() const { return std_; }

 private:
  Eigen::VectorXd mean_;
  Eigen::VectorXd std_;
};

// One-hot target matrix (rows = samples, cols = the 5 trainable classes).
Eigen::MatrixXd one_hot_targets(const Dataset& ds);

}  // namespace beatfuse
