#include "core/scaler.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace beatfuse {

FeatureScaler FeatureScaler::fit(const Dataset& ds) {
  if (ds.empty()) throw DataError("cannot fit scaler on empty dataset");
  const int d = FeatureVector::kDim;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (const auto& b : ds.beats()) {
    const auto v = b.features.values();
    for (int i = 0; i < d; ++i) mean[i] += v[i];
  }
  mean /= static_cast<double>(ds.size());
  Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
  for (const auto& b : ds.beats()) {
    const auto v = b.features.values();
    for (int i = 0; i < d; ++i) {
      const double delta = v[i] - mean[i];
      var[i] += delta * delta;
    }
  }
  var /= static_cast<double>(ds.size());
  Eigen::VectorXd stddev(d);
  for (int i = 0; i < d; ++i) stddev[i] = var[i] > 0.0 ? std::sqrt(var[i]) : 1.0;
  return FeatureScaler(std::move(mean), std::move(stddev));
}

Eigen::MatrixXd FeatureScaler::apply(const Dataset& ds) const {
  Eigen::MatrixXd x(ds.size(), FeatureVector::kDim);
  for (std::size_t r = 0; r < ds.size(); ++r)
    x.row(r) = apply(ds.beats()[r].features).transpose();
  return x;
}

Eigen::MatrixXd one_hot_targets(const Dataset& ds) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(ds.size(), kNumTrainable);
  for (std::size_t r = 0; r < ds.size(); ++r) {
    const int c = static_cast<int>(ds.beats()[r].label);
    if (c >= kNumTrainable)
      throw DataError("one-hot targets: beat labelled OTHER is not trainable");
    t(r, c) = 1.0;
  }
  return t;
}

}  // namespace beatfuse
