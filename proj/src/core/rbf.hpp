#pragma once

#include <cstdint>
#include <iosfwd>

#include <Eigen/Dense>

#include "core/dataset.hpp"
#include "core/scaler.hpp"

namespace beatfuse {

// Gaussian-hidden-unit network: y_m = exp(-||x - c_m||^2 / (2 sigma^2)),
// linear output layer fitted by regularized least squares.
struct RbfModel {
  Eigen::MatrixXd centers;         // M x input_dim, in scaled feature space
  double spread = 2.0;
  Eigen::MatrixXd output_weights;  // output_dim x M
  Eigen::VectorXd output_bias;     // output_dim
  FeatureScaler scaler;

  int num_centers() const { return static_cast<int>(centers.rows()); }
};

struct RbfConfig {
  int n_centers = 50;
  // Spread in scaled feature units. With scale_features = false the raw
  // feature values are used directly and spreads like 105 make sense.
  double spread = 2.0;
  double ridge = 1e-8;
  bool scale_features = true;
  std::uint64_t seed = 0;
  int kmeans_max_iters = 100;
};

// Hidden activations for one sample; every component in (0, 1].
Eigen::VectorXd rbf_hidden(const RbfModel& model, const FeatureVector& x);

// Seeded k-means centers on (optionally scaled) features, then a ridge
// least-squares solve from hidden activations to one-hot targets.
RbfModel rbf_build(const Dataset& train, const RbfConfig& cfg);

Eigen::VectorXd rbf_forward(const RbfModel& model, const FeatureVector& x);

// Lloyd's algorithm with seeded sampling init; exposed for tests.
Eigen::MatrixXd kmeans_centers(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                               int max_iters);

void rbf_save(const RbfModel& model, std::ostream& out);
RbfModel rbf_load(std::istream& in);

}  // namespace beatfuse
