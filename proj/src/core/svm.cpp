#include "core/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "core/errors.hpp"
#include "core/serialize.hpp"
#include "core/textnum.hpp"

namespace beatfuse {

double kernel_eval(const PolyKernel& k, const Eigen::VectorXd& x, const Eigen::VectorXd& w) {
  if (x.size() != w.size()) throw UsageError("kernel_eval: dimension mismatch");
  const double s = x.dot(w) + k.b0;
  return s * s;
}

double SvmBinaryModel::decision(const Eigen::VectorXd& x) const {
  double f = bias;
  for (Eigen::Index i = 0; i < support_vectors.rows(); ++i) {
    const double s = support_vectors.row(i).dot(x) + kernel.b0;
    f += dual_coefficients[i] * s * s;
  }
  return f;
}

double ScoreCalibration::apply(double decision) const {
  return 1.0 / (1.0 + std::exp(-(slope * decision + intercept)));
}

namespace {

constexpr double kAlphaEps = 1e-12;

Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& points, const PolyKernel& kernel) {
  Eigen::MatrixXd g = points * points.transpose();
  g.array() += kernel.b0;
  g = g.array().square();
  return g;
}

SvmBinaryModel smo_solve(const Eigen::MatrixXd& points, const Eigen::MatrixXd& gram,
                         const std::vector<int>& labels, const PolyKernel& kernel,
                         const SmoConfig& cfg) {
  const int n = static_cast<int>(points.rows());
  bool has_pos = false, has_neg = false;
  for (int y : labels) (y > 0 ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) throw DataError("svm_train_binary: both labels must be present");
  if (!(cfg.c > 0.0) || !(cfg.kkt_tolerance > 0.0))
    throw UsageError("svm_train_binary: C and kkt_tolerance must be positive");

  std::vector<double> alpha(n, 0.0);
  std::vector<double> f(n, 0.0);  // f_i = sum_l alpha_l y_l K(l,i), no bias
  std::mt19937_64 rng(cfg.seed);

  auto in_i_up = [&](int t) {
    return (labels[t] > 0 && alpha[t] < cfg.c - kAlphaEps) ||
           (labels[t] < 0 && alpha[t] > kAlphaEps);
  };
  auto in_i_low = [&](int t) {
    return (labels[t] < 0 && alpha[t] < cfg.c - kAlphaEps) ||
           (labels[t] > 0 && alpha[t] > kAlphaEps);
  };

  int iter = 0;
  bool converged = false;
  double m_up = 0.0, m_low = 0.0;
  while (iter < cfg.max_passes) {
    // maximal violating pair: min E over I_up vs max E over I_low,
    // E_t = f_t - y_t; ties broken by seeded coin flip
    int i = -1, j = -1;
    double e_min = std::numeric_limits<double>::infinity();
    double e_max = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < n; ++t) {
      const double e = f[t] - labels[t];
      if (in_i_up(t)) {
        if (e < e_min || (e == e_min && (rng() & 1))) {
          e_min = e;
          i = t;
        }
      }
      if (in_i_low(t)) {
        if (e > e_max || (e == e_max && (rng() & 1))) {
          e_max = e;
          j = t;
        }
      }
    }
    m_up = e_min;
    m_low = e_max;
    if (i < 0 || j < 0 || e_max - e_min <= cfg.kkt_tolerance) {
      converged = true;
      break;
    }

    double eta = gram(i, i) + gram(j, j) - 2.0 * gram(i, j);
    if (eta <= 1e-12) eta = 1e-12;

    const double yi = labels[i], yj = labels[j];
    double lo, hi;
    if (yi != yj) {
      lo = std::max(0.0, alpha[j] - alpha[i]);
      hi = std::min(cfg.c, cfg.c + alpha[j] - alpha[i]);
    } else {
      lo = std::max(0.0, alpha[i] + alpha[j] - cfg.c);
      hi = std::min(cfg.c, alpha[i] + alpha[j]);
    }
    const double ei = f[i] - yi;
    const double ej = f[j] - yj;
    double aj_new = std::clamp(alpha[j] + yj * (ei - ej) / eta, lo, hi);
    const double aj_old = alpha[j];
    if (std::abs(aj_new - aj_old) < kAlphaEps) {
      // numerically stuck pair; a tiny tolerance bump would loop forever
      converged = e_max - e_min <= cfg.kkt_tolerance;
      break;
    }
    const double ai_old = alpha[i];
    alpha[j] = aj_new;
    alpha[i] = ai_old + yi * yj * (aj_old - aj_new);

    const double di = (alpha[i] - ai_old) * yi;
    const double dj = (aj_new - aj_old) * yj;
    for (int t = 0; t < n; ++t) f[t] += di * gram(i, t) + dj * gram(j, t);
    ++iter;
  }

  SvmBinaryModel model;
  model.kernel = kernel;
  model.converged = converged;
  model.bias = -(m_up + m_low) / 2.0;

  if (!converged) {
    int violations = 0;
    for (int t = 0; t < n; ++t) {
      const double margin = labels[t] * (f[t] + model.bias);
      if (alpha[t] < kAlphaEps) {
        if (margin < 1.0 - cfg.kkt_tolerance) ++violations;
      } else if (alpha[t] > cfg.c - kAlphaEps) {
        if (margin > 1.0 + cfg.kkt_tolerance) ++violations;
      } else if (std::abs(margin - 1.0) > cfg.kkt_tolerance) {
        ++violations;
      }
    }
    model.kkt_violations = violations;
  }

  std::vector<int> sv;
  for (int t = 0; t < n; ++t)
    if (alpha[t] > kAlphaEps) sv.push_back(t);
  model.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), points.cols());
  model.dual_coefficients.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t s = 0; s < sv.size(); ++s) {
    model.support_vectors.row(static_cast<Eigen::Index>(s)) = points.row(sv[s]);
    model.dual_coefficients[static_cast<Eigen::Index>(s)] = alpha[sv[s]] * labels[sv[s]];
  }
  return model;
}

}  // namespace

SvmBinaryModel svm_train_binary(const Eigen::MatrixXd& points, const std::vector<int>& labels,
                                const PolyKernel& kernel, const SmoConfig& cfg) {
  if (points.rows() != static_cast<Eigen::Index>(labels.size()))
    throw UsageError("svm_train_binary: points and labels lengths differ");
  return smo_solve(points, gram_matrix(points, kernel), labels, kernel, cfg);
}

ScoreCalibration fit_score_calibration(const std::vector<double>& decisions,
                                       const std::vector<int>& labels) {
  // Platt-style sigmoid fit with regularized targets and a Newton/
  // backtracking minimizer on the cross-entropy objective.
  const std::size_t n = decisions.size();
  double prior1 = 0.0, prior0 = 0.0;
  for (int y : labels) (y > 0 ? prior1 : prior0) += 1.0;
  const double hi_target = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo_target = 1.0 / (prior0 + 2.0);

  double a = 0.0;
  double b = std::log((prior0 + 1.0) / (prior1 + 1.0));
  const int max_iter = 100;
  const double min_step = 1e-10;
  const double sigma = 1e-12;

  auto objective = [&](double pa, double pb) {
    double obj = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double t = labels[k] > 0 ? hi_target : lo_target;
      const double z = pa * decisions[k] + pb;
      if (z >= 0.0)
        obj += t * z + std::log1p(std::exp(-z));
      else
        obj += (t - 1.0) * z + std::log1p(std::exp(z));
    }
    return obj;
  };

  double fval = objective(a, b);
  for (int it = 0; it < max_iter; ++it) {
    double h11 = sigma, h22 = sigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double t = labels[k] > 0 ? hi_target : lo_target;
      const double z = a * decisions[k] + b;
      double p, q;
      if (z >= 0.0) {
        p = std::exp(-z) / (1.0 + std::exp(-z));
        q = 1.0 / (1.0 + std::exp(-z));
      } else {
        p = 1.0 / (1.0 + std::exp(z));
        q = std::exp(z) / (1.0 + std::exp(z));
      }
      const double d2 = p * q;
      h11 += decisions[k] * decisions[k] * d2;
      h22 += d2;
      h21 += decisions[k] * d2;
      const double d1 = t - p;
      g1 += decisions[k] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;

    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    while (step >= min_step) {
      const double try_f = objective(a + step * da, b + step * db);
      if (try_f < fval + 1e-4 * step * gd) {
        a += step * da;
        b += step * db;
        fval = try_f;
        break;
      }
      step /= 2.0;
    }
    if (step < min_step) break;
  }
  // our score form is logistic(slope*f + intercept) with Platt's
  // P = 1/(1+exp(A f + B)), hence the sign flips
  return {-a, -b};
}

SvmOvaModel svm_train_ova(const Dataset& train, const PolyKernel& kernel, const SmoConfig& cfg) {
  if (train.empty()) throw DataError("svm_train_ova: empty training set");
  for (int c = 0; c < kNumTrainable; ++c)
    if (train.count(static_cast<BeatClass>(c)) == 0)
      throw DataError("svm_train_ova: class " + class_label(static_cast<BeatClass>(c)) +
                      " absent from training data");

  SvmOvaModel model;
  model.scaler = FeatureScaler::fit(train);
  const Eigen::MatrixXd x = model.scaler.apply(train);
  const Eigen::MatrixXd gram = gram_matrix(x, kernel);

  for (int c = 0; c < kNumTrainable; ++c) {
    std::vector<int> labels(train.size());
    for (std::size_t r = 0; r < train.size(); ++r)
      labels[r] = static_cast<int>(train.beats()[r].label) == c ? 1 : -1;
    SmoConfig bin_cfg = cfg;
    bin_cfg.seed = cfg.seed + static_cast<std::uint64_t>(c);
    model.binary[c] = smo_solve(x, gram, labels, kernel, bin_cfg);

    std::vector<double> decisions(train.size());
    for (std::size_t r = 0; r < train.size(); ++r)
      decisions[r] = model.binary[c].decision(x.row(static_cast<Eigen::Index>(r)).transpose());
    model.calibration[c] = fit_score_calibration(decisions, labels);
  }
  return model;
}

Eigen::VectorXd svm_scores(const SvmOvaModel& model, const FeatureVector& x) {
  const Eigen::VectorXd xs = model.scaler.apply(x);
  Eigen::VectorXd scores(kNumTrainable);
  for (int c = 0; c < kNumTrainable; ++c)
    scores[c] = model.calibration[c].apply(model.binary[c].decision(xs));
  return scores;
}

void svm_save(const SvmOvaModel& model, std::ostream& out) {
  out << "beatfuse-svm 1\n";
  out << FeatureVector::kDim << ' ' << kNumTrainable << "\n";
  write_vector(out, model.scaler.mean());
  write_vector(out, model.scaler.stddev());
  for (int c = 0; c < kNumTrainable; ++c) {
    const auto& b = model.binary[c];
    out << b.support_vectors.rows() << ' ' << format_hex_double(b.kernel.b0) << ' '
        << format_hex_double(b.bias) << ' ' << (b.converged ? 1 : 0) << ' '
        << b.kkt_violations << "\n";
    write_matrix(out, b.support_vectors);
    write_vector(out, b.dual_coefficients);
    out << format_hex_double(model.calibration[c].slope) << ' '
        << format_hex_double(model.calibration[c].intercept) << "\n";
  }
}

SvmOvaModel svm_load(std::istream& in) {
  expect_magic(in, "beatfuse-svm", 1);
  int dim = 0, classes = 0;
  in >> dim >> classes;
  if (!in || dim != FeatureVector::kDim || classes != kNumTrainable)
    throw DataError("svm model file: bad dimensions");
  SvmOvaModel model;
  Eigen::VectorXd mean = read_vector(in, dim);
  Eigen::VectorXd stddev = read_vector(in, dim);
  model.scaler = FeatureScaler(std::move(mean), std::move(stddev));
  for (int c = 0; c < kNumTrainable; ++c) {
    auto& b = model.binary[c];
    long nsv = 0;
    std::string b0_tok, bias_tok;
    int conv = 0;
    in >> nsv >> b0_tok >> bias_tok >> conv >> b.kkt_violations;
    if (!in || nsv < 0) throw DataError("svm model file: bad support vector count");
    b.kernel.b0 = parse_hex_double(b0_tok);
    b.bias = parse_hex_double(bias_tok);
    b.converged = conv != 0;
    b.support_vectors = read_matrix(in, static_cast<int>(nsv), dim);
    b.dual_coefficients = read_vector(in, static_cast<int>(nsv));
    std::string slope_tok, icept_tok;
    in >> slope_tok >> icept_tok;
    if (!in) throw DataError("svm model file: truncated calibration");
    model.calibration[c].slope = parse_hex_double(slope_tok);
    model.calibration[c].intercept = parse_hex_double(icept_tok);
  }
  return model;
}

}  // namespace beatfuse
