#include "core/mlp.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "core/errors.hpp"
#include "core/serialize.hpp"

namespace beatfuse {

namespace {

inline double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

Eigen::MatrixXd sigmoid_mat(const Eigen::MatrixXd& m) {
  return m.unaryExpr([](double t) { return sigmoid(t); });
}

}  // namespace

MlpModel mlp_init(int input_dim, int hidden_dim, int output_dim, std::uint64_t seed) {
  if (input_dim < 1 || hidden_dim < 1 || output_dim < 1)
    throw UsageError("mlp_init: dimensions must be >= 1");
  MlpModel m;
  m.input_dim = input_dim;
  m.hidden_dim = hidden_dim;
  m.output_dim = output_dim;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto draw = [&](double fan_in) { return unit(rng) / std::sqrt(fan_in); };
  m.hidden_weights.resize(hidden_dim, input_dim);
  for (int j = 0; j < hidden_dim; ++j)
    for (int i = 0; i < input_dim; ++i) m.hidden_weights(j, i) = draw(input_dim);
  m.hidden_bias.resize(hidden_dim);
  for (int j = 0; j < hidden_dim; ++j) m.hidden_bias[j] = draw(input_dim);
  m.output_weights.resize(output_dim, hidden_dim);
  for (int k = 0; k < output_dim; ++k)
    for (int j = 0; j < hidden_dim; ++j) m.output_weights(k, j) = draw(hidden_dim);
  m.output_bias.resize(output_dim);
  for (int k = 0; k < output_dim; ++k) m.output_bias[k] = draw(hidden_dim);
  m.scaler = FeatureScaler::identity();
  return m;
}

Eigen::MatrixXd mlp_forward_scaled(const MlpModel& model, const Eigen::MatrixXd& x) {
  // x rows are samples
  Eigen::MatrixXd pre = x * model.hidden_weights.transpose();
  pre.rowwise() += model.hidden_bias.transpose();
  const Eigen::MatrixXd h = sigmoid_mat(pre);
  Eigen::MatrixXd out = h * model.output_weights.transpose();
  out.rowwise() += model.output_bias.transpose();
  return out;
}

Eigen::VectorXd mlp_forward(const MlpModel& model, const FeatureVector& x) {
  const Eigen::VectorXd xs = model.scaler.apply(x);
  const Eigen::VectorXd h =
      (model.hidden_weights * xs + model.hidden_bias).unaryExpr([](double t) { return sigmoid(t); });
  return model.output_weights * h + model.output_bias;
}

Eigen::VectorXd mlp_pack(const MlpModel& m) {
  Eigen::VectorXd theta(m.parameter_count());
  int p = 0;
  for (int j = 0; j < m.hidden_dim; ++j)
    for (int i = 0; i < m.input_dim; ++i) theta[p++] = m.hidden_weights(j, i);
  for (int j = 0; j < m.hidden_dim; ++j) theta[p++] = m.hidden_bias[j];
  for (int k = 0; k < m.output_dim; ++k)
    for (int j = 0; j < m.hidden_dim; ++j) theta[p++] = m.output_weights(k, j);
  for (int k = 0; k < m.output_dim; ++k) theta[p++] = m.output_bias[k];
  return theta;
}

void mlp_unpack(const Eigen::VectorXd& theta, MlpModel* m) {
  int p = 0;
  for (int j = 0; j < m->hidden_dim; ++j)
    for (int i = 0; i < m->input_dim; ++i) m->hidden_weights(j, i) = theta[p++];
  for (int j = 0; j < m->hidden_dim; ++j) m->hidden_bias[j] = theta[p++];
  for (int k = 0; k < m->output_dim; ++k)
    for (int j = 0; j < m->hidden_dim; ++j) m->output_weights(k, j) = theta[p++];
  for (int k = 0; k < m->output_dim; ++k) m->output_bias[k] = theta[p++];
}

void mlp_jacobian(const MlpModel& m, const Eigen::MatrixXd& x, const Eigen::MatrixXd& targets,
                  Eigen::MatrixXd* jacobian, Eigen::VectorXd* residuals) {
  const int n = static_cast<int>(x.rows());
  const int d = m.input_dim;
  const int hd = m.hidden_dim;
  const int od = m.output_dim;
  const int np = m.parameter_count();
  const int w1_off = 0;
  const int b1_off = hd * d;
  const int w2_off = b1_off + hd;
  const int b2_off = w2_off + od * hd;

  Eigen::MatrixXd pre = x * m.hidden_weights.transpose();
  pre.rowwise() += m.hidden_bias.transpose();
  const Eigen::MatrixXd h = sigmoid_mat(pre);       // n x hd
  Eigen::MatrixXd out = h * m.output_weights.transpose();
  out.rowwise() += m.output_bias.transpose();       // n x od

  jacobian->setZero(n * od, np);
  residuals->resize(n * od);
  for (int s = 0; s < n; ++s) {
    for (int k = 0; k < od; ++k) {
      const int row = s * od + k;
      (*residuals)[row] = targets(s, k) - out(s, k);
      for (int j = 0; j < hd; ++j) {
        const double hs = h(s, j);
        const double gate = m.output_weights(k, j) * hs * (1.0 - hs);
        for (int i = 0; i < d; ++i) (*jacobian)(row, w1_off + j * d + i) = gate * x(s, i);
        (*jacobian)(row, b1_off + j) = gate;
        (*jacobian)(row, w2_off + k * hd + j) = hs;
      }
      (*jacobian)(row, b2_off + k) = 1.0;
    }
  }
}

LmResult mlp_train_lm(const MlpModel& model, const Dataset& train, const LmConfig& cfg) {
  if (train.empty()) throw DataError("mlp_train_lm: empty training set");

  LmResult res;
  res.model = model;
  res.model.scaler = FeatureScaler::fit(train);
  const Eigen::MatrixXd x = res.model.scaler.apply(train);
  const Eigen::MatrixXd t = one_hot_targets(train);
  const int n_res = static_cast<int>(x.rows()) * model.output_dim;

  auto mse_of = [&](const MlpModel& m) {
    const Eigen::MatrixXd out = mlp_forward_scaled(m, x);
    return (t - out).squaredNorm() / static_cast<double>(n_res);
  };

  double mse = mse_of(res.model);
  res.mse_history.push_back(mse);
  if (mse <= cfg.mse_goal) {
    res.status = LmStatus::kGoalReached;
    return res;
  }

  double lambda = cfg.lambda_init;
  Eigen::MatrixXd jac;
  Eigen::VectorXd err;
  const int np = res.model.parameter_count();
  int accepted = 0;
  res.status = LmStatus::kMaxEpochs;

  while (accepted < cfg.max_epochs) {
    mlp_jacobian(res.model, x, t, &jac, &err);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd jte = jac.transpose() * err;

    bool stepped = false;
    while (!stepped) {
      Eigen::MatrixXd damped = jtj;
      damped.diagonal().array() += lambda;
      const Eigen::VectorXd delta = damped.ldlt().solve(jte);
      if (!delta.allFinite()) {
        lambda *= cfg.lambda_up;
        if (lambda > cfg.max_lambda) {
          res.status = LmStatus::kStalled;
          return res;
        }
        continue;
      }
      MlpModel trial = res.model;
      mlp_unpack(mlp_pack(res.model) + delta, &trial);
      const double trial_mse = mse_of(trial);
      if (std::isfinite(trial_mse) && trial_mse < mse) {
        res.model = std::move(trial);
        mse = trial_mse;
        res.mse_history.push_back(mse);
        lambda /= cfg.lambda_down;
        ++accepted;
        stepped = true;
      } else {
        lambda *= cfg.lambda_up;
        if (lambda > cfg.max_lambda) {
          res.status = LmStatus::kLambdaLimit;
          return res;
        }
      }
    }
    if (mse <= cfg.mse_goal) {
      res.status = LmStatus::kGoalReached;
      return res;
    }
  }
  return res;
}

void mlp_save(const MlpModel& m, std::ostream& out) {
  out << "beatfuse-mlp 1\n";
  out << m.input_dim << ' ' << m.hidden_dim << ' ' << m.output_dim << "\n";
  write_vector(out, m.scaler.mean());
  write_vector(out, m.scaler.stddev());
  write_matrix(out, m.hidden_weights);
  write_vector(out, m.hidden_bias);
  write_matrix(out, m.output_weights);
  write_vector(out, m.output_bias);
}

MlpModel mlp_load(std::istream& in) {
  expect_magic(in, "beatfuse-mlp", 1);
  MlpModel m;
  in >> m.input_dim >> m.hidden_dim >> m.output_dim;
  if (!in || m.input_dim < 1 || m.hidden_dim < 1 || m.output_dim < 1)
    throw DataError("mlp model file: bad dimensions");
  Eigen::VectorXd mean = read_vector(in, m.input_dim);
  Eigen::VectorXd stddev = read_vector(in, m.input_dim);
  m.scaler = FeatureScaler(std::move(mean), std::move(stddev));
  m.hidden_weights = read_matrix(in, m.hidden_dim, m.input_dim);
  m.hidden_bias = read_vector(in, m.hidden_dim);
  m.output_weights = read_matrix(in, m.output_dim, m.hidden_dim);
  m.output_bias = read_vector(in, m.output_dim);
  return m;
}

}  // namespace beatfuse
