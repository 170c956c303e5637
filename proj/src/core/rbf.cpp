#include "core/rbf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "core/errors.hpp"
#include "core/serialize.hpp"
#include "core/textnum.hpp"

namespace beatfuse {

namespace {

Eigen::MatrixXd design_matrix(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centers,
                              double spread) {
  const Eigen::Index n = x.rows();
  const Eigen::Index m = centers.rows();
  Eigen::MatrixXd h(n, m);
  const double denom = 2.0 * spread * spread;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      h(i, j) = std::exp(-(x.row(i) - centers.row(j)).squaredNorm() / denom);
  return h;
}

}  // namespace

Eigen::MatrixXd kmeans_centers(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                               int max_iters) {
  const Eigen::Index n = points.rows();
  if (k < 1 || k > n) throw UsageError("kmeans: k must be in [1, n]");
  std::mt19937_64 rng(seed);
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::shuffle(order.begin(), order.end(), rng);

  Eigen::MatrixXd centers(k, points.cols());
  for (int j = 0; j < k; ++j) centers.row(j) = points.row(order[j]);

  std::vector<int> assign(n, -1);
  for (int iter = 0; iter < max_iters; ++iter) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (points.row(i) - centers.row(0)).squaredNorm();
      for (int j = 1; j < k; ++j) {
        const double d = (points.row(i) - centers.row(j)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = j;
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed && iter > 0) break;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    std::vector<Eigen::Index> counts(k, 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(assign[i]) += points.row(i);
      ++counts[assign[i]];
    }
    for (int j = 0; j < k; ++j) {
      if (counts[j] > 0) {
        centers.row(j) = sums.row(j) / static_cast<double>(counts[j]);
      } else {
        // reseed empty clusters from the point farthest from its center
        Eigen::Index worst = 0;
        double worst_d = -1.0;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double d = (points.row(i) - centers.row(assign[i])).squaredNorm();
          if (d > worst_d) {
            worst_d = d;
            worst = i;
          }
        }
        centers.row(j) = points.row(worst);
      }
    }
  }
  return centers;
}

Eigen::VectorXd rbf_hidden(const RbfModel& model, const FeatureVector& x) {
  const Eigen::VectorXd xs = model.scaler.apply(x);
  const int m = model.num_centers();
  Eigen::VectorXd y(m);
  const double denom = 2.0 * model.spread * model.spread;
  for (int j = 0; j < m; ++j)
    y[j] = std::exp(-(xs.transpose() - model.centers.row(j)).squaredNorm() / denom);
  return y;
}

RbfModel rbf_build(const Dataset& train, const RbfConfig& cfg) {
  if (train.empty()) throw DataError("rbf_build: empty training set");
  if (cfg.n_centers < 1 || cfg.n_centers > static_cast<int>(train.size()))
    throw UsageError("rbf_build: n_centers must be in [1, |train|]");
  if (!(cfg.spread > 0.0)) throw UsageError("rbf_build: spread must be positive");
  if (cfg.ridge < 0.0) throw UsageError("rbf_build: ridge must be non-negative");

  RbfModel model;
  model.spread = cfg.spread;
  model.scaler = cfg.scale_features ? FeatureScaler::fit(train) : FeatureScaler::identity();
  const Eigen::MatrixXd x = model.scaler.apply(train);
  model.centers = kmeans_centers(x, cfg.n_centers, cfg.seed, cfg.kmeans_max_iters);

  const Eigen::MatrixXd h = design_matrix(x, model.centers, model.spread);
  const Eigen::MatrixXd t = one_hot_targets(train);
  const Eigen::Index m = h.cols();

  // augmented design [H | 1] so the bias is part of the solve
  Eigen::MatrixXd ha(h.rows(), m + 1);
  ha.leftCols(m) = h;
  ha.col(m).setOnes();

  Eigen::MatrixXd w;  // (m+1) x output_dim
  if (cfg.ridge == 0.0) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(ha);
    // full interpolation (centers = points) leaves the bias column
    // redundant, so require full rank only up to the smaller dimension
    if (qr.rank() < std::min(ha.rows(), ha.cols()))
      throw NumericError(
          "rbf_build: design matrix is rank deficient; use ridge > 0 "
          "(near-duplicate centers)");
    w = qr.solve(t);
  } else {
    Eigen::MatrixXd normal = ha.transpose() * ha;
    normal.diagonal().array() += cfg.ridge;
    w = normal.ldlt().solve(ha.transpose() * t);
  }
  if (!w.allFinite()) throw NumericError("rbf_build: least-squares solve produced non-finite weights");

  model.output_weights = w.topRows(m).transpose();
  model.output_bias = w.row(m).transpose();
  return model;
}

Eigen::VectorXd rbf_forward(const RbfModel& model, const FeatureVector& x) {
  return model.output_weights * rbf_hidden(model, x) + model.output_bias;
}

void rbf_save(const RbfModel& m, std::ostream& out) {
  out << "beatfuse-rbf 1\n";
  out << m.centers.rows() << ' ' << m.centers.cols() << ' ' << m.output_bias.size() << "\n";
  out << format_hex_double(m.spread) << "\n";
  write_vector(out, m.scaler.mean());
  write_vector(out, m.scaler.stddev());
  write_matrix(out, m.centers);
  write_matrix(out, m.output_weights);
  write_vector(out, m.output_bias);
}

RbfModel rbf_load(std::istream& in) {
  expect_magic(in, "beatfuse-rbf", 1);
  int m = 0, d = 0, od = 0;
  in >> m >> d >> od;
  if (!in || m < 1 || d < 1 || od < 1) throw DataError("rbf model file: bad dimensions");
  std::string tok;
  in >> tok;
  RbfModel model;
  model.spread = parse_hex_double(tok);
  Eigen::VectorXd mean = read_vector(in, d);
  Eigen::VectorXd stddev = read_vector(in, d);
  model.scaler = FeatureScaler(std::move(mean), std::move(stddev));
  model.centers = read_matrix(in, m, d);
  model.output_weights = read_matrix(in, od, m);
  model.output_bias = read_vector(in, od);
  return model;
}

}  // namespace beatfuse
