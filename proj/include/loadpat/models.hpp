#ifndef LOADPAT_MODELS_HPP
#define LOADPAT_MODELS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "loadpat/error.hpp"

// Estimators from household feature vectors to pattern distributions.
// Data matrices hold one example per row.

namespace loadpat {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct Standardizer {
  static constexpr double kStdFloor = 1e-9;
  VectorXd mean;
  VectorXd std;

  /// Population statistics per column.
  static Standardizer fit(const MatrixXd& x) {
    require(x.rows() >= 1, "cannot standardize an empty matrix");
    Standardizer s;
    s.mean = x.colwise().mean().transpose();
    s.std.resize(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double var = (x.col(c).array() - s.mean(c)).square().mean();
      s.std(c) = std::max(std::sqrt(var), kStdFloor);
    }
    return s;
  }

  MatrixXd transform(const MatrixXd& x) const {
    return (x.rowwise() - mean.transpose()).array().rowwise() / std.transpose().array();
  }

  MatrixXd inverse_transform(const MatrixXd& z) const {
    return (z.array().rowwise() * std.transpose().array()).matrix().rowwise() + mean.transpose();
  }
};

inline void require_finite(const MatrixXd& m, const std::string& what) {
  if (!m.allFinite()) throw NumericalError("non-finite values in " + what);
}

// ---------------------------------------------------------------------------- MLP

struct MlpModel {
  std::vector<std::size_t> layer_sizes;  // input, hidden..., output
  std::vector<MatrixXd> weights;         // layer l: sizes[l+1] x sizes[l]
  std::vector<VectorXd> biases;
  Standardizer standardizer;

  /// Zero weights and biases with an identity standardizer.
  static MlpModel zeros(std::vector<std::size_t> sizes) {
    require(sizes.size() >= 2, "an MLP needs at least input and output layers");
    for (auto s : sizes) require(s >= 1, "layer sizes must be positive");
    MlpModel m;
    m.layer_sizes = std::move(sizes);
    for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
      const auto in = static_cast<Eigen::Index>(m.layer_sizes[l]);
      const auto out = static_cast<Eigen::Index>(m.layer_sizes[l + 1]);
      m.weights.push_back(MatrixXd::Zero(out, in));
      m.biases.push_back(VectorXd::Zero(out));
    }
    m.standardizer.mean = VectorXd::Zero(static_cast<Eigen::Index>(m.layer_sizes.front()));
    m.standardizer.std = VectorXd::Ones(static_cast<Eigen::Index>(m.layer_sizes.front()));
    return m;
  }

  /// Uniform in +-sqrt(6 / (fan_in + fan_out)) per layer, zero biases.
  static MlpModel glorot(std::vector<std::size_t> sizes, std::mt19937_64& rng) {
    auto m = zeros(std::move(sizes));
    for (auto& w : m.weights) {
      const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
      std::uniform_real_distribution<double> u(-limit, limit);
      for (Eigen::Index c = 0; c < w.cols(); ++c)
        for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = u(rng);
    }
    return m;
  }

  std::size_t n_layers() const { return weights.size(); }
  std::size_t input_size() const { return layer_sizes.front(); }
  std::size_t output_size() const { return layer_sizes.back(); }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < n_layers(); ++l) n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
    return n;
  }

  /// Layer by layer: weights row-major, then biases.
  std::vector<double> parameters() const {
    std::vector<double> p;
    p.reserve(parameter_count());
    for (std::size_t l = 0; l < n_layers(); ++l) {
      for (Eigen::Index r = 0; r < weights[l].rows(); ++r)
        for (Eigen::Index c = 0; c < weights[l].cols(); ++c) p.push_back(weights[l](r, c));
      for (Eigen::Index r = 0; r < biases[l].size(); ++r) p.push_back(biases[l](r));
    }
    return p;
  }

  void set_parameters(std::span<const double> p) {
    require(p.size() == parameter_count(), "parameter vector has the wrong length");
    std::size_t i = 0;
    for (std::size_t l = 0; l < n_layers(); ++l) {
      for (Eigen::Index r = 0; r < weights[l].rows(); ++r)
        for (Eigen::Index c = 0; c < weights[l].cols(); ++c) weights[l](r, c) = p[i++];
      for (Eigen::Index r = 0; r < biases[l].size(); ++r) biases[l](r) = p[i++];
    }
  }

  /// Column-wise softmax with max-logit subtraction. Outputs are kept inside the open
  /// interval (0,1): saturated entries that round to exactly 0 or 1 are moved by at most
  /// one ulp of 1.0, which leaves the column sum within 2^-53 of one.
  static MatrixXd softmax(const MatrixXd& logits) {
    static const double lo = std::numeric_limits<double>::min();
    static const double hi = std::nextafter(1.0, 0.0);
    MatrixXd out(logits.rows(), logits.cols());
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      const double m = logits.col(c).maxCoeff();
      out.col(c) = (logits.col(c).array() - m).exp().matrix();
      out.col(c) /= out.col(c).sum();
    }
    return out.cwiseMax(lo).cwiseMin(hi);
  }

  /// Inputs already standardized, one example per column; returns K x batch probabilities.
  MatrixXd forward_standardized(const MatrixXd& z) const {
    MatrixXd a = z;
    for (std::size_t l = 0; l < n_layers(); ++l) {
      MatrixXd pre = (weights[l] * a).colwise() + biases[l];
      if (l + 1 < n_layers())
        a = pre.cwiseMax(0.0);
      else
        return softmax(pre);
    }
    return a;
  }

  /// Raw features, one example per row; returns one distribution per row.
  MatrixXd predict(const MatrixXd& x) const {
    require(static_cast<std::size_t>(x.cols()) == input_size(), "feature width does not match the MLP input layer");
    require_finite(x, "MLP input");
    return forward_standardized(standardizer.transform(x).transpose()).transpose();
  }

  VectorXd forward(std::span<const double> features) const {
    MatrixXd x(1, static_cast<Eigen::Index>(features.size()));
    for (std::size_t i = 0; i < features.size(); ++i) x(0, static_cast<Eigen::Index>(i)) = features[i];
    return predict(x).row(0).transpose();
  }
};

struct MlpGradients {
  std::vector<MatrixXd> weights;
  std::vector<VectorXd> biases;

  std::vector<double> flatten() const {
    std::vector<double> p;
    for (std::size_t l = 0; l < weights.size(); ++l) {
      for (Eigen::Index r = 0; r < weights[l].rows(); ++r)
        for (Eigen::Index c = 0; c < weights[l].cols(); ++c) p.push_back(weights[l](r, c));
      for (Eigen::Index r = 0; r < biases[l].size(); ++r) p.push_back(biases[l](r));
    }
    return p;
  }
};

/// Loss = mean over examples of (1/K) sum_j (p_hat_j - p_j)^2. `z` is standardized input
/// (features x batch), `y` the targets (K x batch). Fills `grad` when non-null.
inline double mlp_loss(const MlpModel& m, const MatrixXd& z, const MatrixXd& y, MlpGradients* grad = nullptr) {
  const std::size_t L = m.n_layers();
  std::vector<MatrixXd> acts{z};  // activations entering each layer
  std::vector<MatrixXd> pres;
  for (std::size_t l = 0; l < L; ++l) {
    pres.push_back((m.weights[l] * acts.back()).colwise() + m.biases[l]);
    if (l + 1 < L) acts.push_back(pres.back().cwiseMax(0.0));
  }
  const MatrixXd p = MlpModel::softmax(pres.back());
  const double scale = 1.0 / static_cast<double>(y.rows() * y.cols());
  const MatrixXd diff = p - y;
  const double loss = diff.squaredNorm() * scale;
  if (!grad) return loss;

  grad->weights.resize(L);
  grad->biases.resize(L);
  const MatrixXd dp = 2.0 * scale * diff;
  // Softmax Jacobian-vector product per column: p * (g - <p, g>).
  const Eigen::RowVectorXd inner = (p.array() * dp.array()).colwise().sum();
  MatrixXd delta = (p.array() * (dp.rowwise() - inner).array()).matrix();
  for (std::size_t l = L; l-- > 0;) {
    grad->weights[l] = delta * acts[l].transpose();
    grad->biases[l] = delta.rowwise().sum();
    if (l == 0) break;
    MatrixXd back = m.weights[l].transpose() * delta;
    delta = (back.array() * (pres[l - 1].array() > 0.0).cast<double>()).matrix();
  }
  return loss;
}

struct TrainConfig {
  std::size_t epochs = 2000;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  std::vector<std::size_t> hidden_layers{100, 100, 100};
  double ridge_lambda = 1e-6;

  void validate() const {
    require(epochs >= 1 && batch_size >= 1, "epochs and batch_size must be positive");
    require(learning_rate > 0.0 && epsilon > 0.0, "learning_rate and epsilon must be positive");
    require(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0, "adaptive-moment betas must lie in (0,1)");
    require(train_fraction > 0.0 && train_fraction < 1.0, "train_fraction must lie in (0,1)");
    require(ridge_lambda >= 0.0, "ridge_lambda must be non-negative");
  }
};

struct MlpTrainResult {
  MlpModel model;
  std::vector<double> loss_curve;  // training MSE after each epoch
};

inline void validate_dataset(const MatrixXd& x, const MatrixXd& y) {
  require(x.rows() >= 1, "training set is empty");
  require(x.rows() == y.rows(), "features and targets differ in example count");
  require_finite(x, "features");
  require_finite(y, "targets");
}

/// Minibatch Adam on the MSE loss. Deterministic for a fixed seed.
inline MlpTrainResult mlp_train(const MatrixXd& x, const MatrixXd& y, const TrainConfig& cfg) {
  cfg.validate();
  validate_dataset(x, y);
  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> sizes{static_cast<std::size_t>(x.cols())};
  sizes.insert(sizes.end(), cfg.hidden_layers.begin(), cfg.hidden_layers.end());
  sizes.push_back(static_cast<std::size_t>(y.cols()));

  MlpTrainResult out{MlpModel::glorot(sizes, rng), {}};
  MlpModel& m = out.model;
  m.standardizer = Standardizer::fit(x);
  const MatrixXd z = m.standardizer.transform(x).transpose();
  const MatrixXd yt = y.transpose();
  const auto n = static_cast<std::size_t>(x.rows());

  std::vector<MatrixXd> mw, vw;
  std::vector<VectorXd> mb, vb;
  for (std::size_t l = 0; l < m.n_layers(); ++l) {
    mw.push_back(MatrixXd::Zero(m.weights[l].rows(), m.weights[l].cols()));
    vw.push_back(mw.back());
    mb.push_back(VectorXd::Zero(m.biases[l].size()));
    vb.push_back(mb.back());
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  MlpGradients g;
  std::uint64_t step = 0;
  out.loss_curve.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t b = std::min(cfg.batch_size, n - start);
      MatrixXd zb(z.rows(), static_cast<Eigen::Index>(b)), yb(yt.rows(), static_cast<Eigen::Index>(b));
      for (std::size_t i = 0; i < b; ++i) {
        zb.col(static_cast<Eigen::Index>(i)) = z.col(static_cast<Eigen::Index>(order[start + i]));
        yb.col(static_cast<Eigen::Index>(i)) = yt.col(static_cast<Eigen::Index>(order[start + i]));
      }
      mlp_loss(m, zb, yb, &g);
      ++step;
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      auto adam = [&](auto& param, auto& mom, auto& vel, const auto& grad) {
        mom = cfg.beta1 * mom + (1.0 - cfg.beta1) * grad;
        vel = cfg.beta2 * vel + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
        param.array() -= cfg.learning_rate * (mom.array() / c1) / ((vel.array() / c2).sqrt() + cfg.epsilon);
      };
      for (std::size_t l = 0; l < m.n_layers(); ++l) {
        adam(m.weights[l], mw[l], vw[l], g.weights[l]);
        adam(m.biases[l], mb[l], vb[l], g.biases[l]);
      }
    }
    const double loss = mlp_loss(m, z, yt);
    if (!std::isfinite(loss))
      throw NumericalError("MLP training diverged: non-finite loss at epoch " + std::to_string(epoch + 1));
    out.loss_curve.push_back(loss);
  }
  return out;
}

// ---------------------------------------------------------------------- ridge

/// Degree 1: the features themselves. Degree 2 appends x_i * x_j for i <= j.
inline MatrixXd polynomial_features(const MatrixXd& x, int degree) {
  require(degree == 1 || degree == 2, "polynomial degree must be 1 or 2");
  if (degree == 1) return x;
  const Eigen::Index d = x.cols();
  MatrixXd out(x.rows(), d + d * (d + 1) / 2);
  out.leftCols(d) = x;
  Eigen::Index c = d;
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i; j < d; ++j) out.col(c++) = x.col(i).cwiseProduct(x.col(j));
  return out;
}

/// Least squares on standardized (mapped) features with unpenalized intercept:
/// minimize (1/n)||Y - 1 b - Z W||^2 + lambda ||W||^2. Predictions are raw affine outputs.
struct RidgeModel {
  int degree = 1;
  double lambda = 1e-6;
  Standardizer input;
  Standardizer mapped;
  MatrixXd coefficients;  // mapped features x K
  VectorXd intercept;     // K

  MatrixXd design(const MatrixXd& x) const {
    require(x.cols() == input.mean.size(), "feature width does not match the fitted model");
    require_finite(x, "model input");
    return mapped.transform(polynomial_features(input.transform(x), degree));
  }

  MatrixXd predict(const MatrixXd& x) const {
    return (design(x) * coefficients).rowwise() + intercept.transpose();
  }

  VectorXd forward(std::span<const double> features) const {
    MatrixXd x(1, static_cast<Eigen::Index>(features.size()));
    for (std::size_t i = 0; i < features.size(); ++i) x(0, static_cast<Eigen::Index>(i)) = features[i];
    return predict(x).row(0).transpose();
  }
};

inline RidgeModel ridge_fit(const MatrixXd& x, const MatrixXd& y, int degree, double lambda) {
  validate_dataset(x, y);
  require(lambda >= 0.0 && std::isfinite(lambda), "ridge lambda must be finite and non-negative");
  RidgeModel m;
  m.degree = degree;
  m.lambda = lambda;
  m.input = Standardizer::fit(x);
  const MatrixXd raw_design = polynomial_features(m.input.transform(x), degree);
  m.mapped = Standardizer::fit(raw_design);
  const MatrixXd z = m.mapped.transform(raw_design);

  const Eigen::Index n = z.rows(), p = z.cols();
  const VectorXd y_mean = y.colwise().mean().transpose();
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  MatrixXd a(n + p, p);
  a.topRows(n) = z * inv_sqrt_n;
  a.bottomRows(p) = std::sqrt(lambda) * MatrixXd::Identity(p, p);
  MatrixXd rhs = MatrixXd::Zero(n + p, y.cols());
  rhs.topRows(n) = (y.rowwise() - y_mean.transpose()) * inv_sqrt_n;
  m.coefficients = a.colPivHouseholderQr().solve(rhs);
  // Design columns are centered up to rounding; fold the residue into the intercept.
  m.intercept = y_mean - (m.coefficients.transpose() * z.colwise().mean().transpose());
  require_finite(m.coefficients, "ridge coefficients");
  return m;
}

inline RidgeModel linear_fit(const MatrixXd& x, const MatrixXd& y, double lambda = 1e-6) { return ridge_fit(x, y, 1, lambda); }
inline RidgeModel poly_fit(const MatrixXd& x, const MatrixXd& y, double lambda = 1e-6) { return ridge_fit(x, y, 2, lambda); }

// ---------------------------------------------------------------- evaluation

/// Mean over examples and output dimensions of the squared error.
template <typename Model>
double evaluate_mse(const Model& model, const MatrixXd& x, const MatrixXd& y) {
  require(x.rows() >= 1, "test set is empty");
  require(x.rows() == y.rows(), "features and targets differ in example count");
  const MatrixXd p = model.predict(x);
  require(p.cols() == y.cols(), "prediction width does not match target width");
  return (p - y).squaredNorm() / static_cast<double>(y.rows() * y.cols());
}

struct TrainTestSplit {
  std::vector<std::string> train;
  std::vector<std::string> test;
};

/// Seeded shuffle at household level; the first ceil(fraction * n) go to training, never
/// fewer than one or more than n - 1.
inline TrainTestSplit split_train_test(std::vector<std::string> ids, double fraction, std::uint64_t seed) {
  require(ids.size() >= 2, "need at least 2 households to split");
  require(fraction > 0.0 && fraction < 1.0, "train fraction must lie in (0,1)");
  std::mt19937_64 rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  const double raw = fraction * static_cast<double>(ids.size());
  auto n_train = static_cast<std::size_t>(std::ceil(raw - 1e-9));
  n_train = std::clamp<std::size_t>(n_train, 1, ids.size() - 1);
  TrainTestSplit s;
  s.train.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
  s.test.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
  return s;
}

// ------------------------------------------------------------- serialization

namespace detail {

inline nlohmann::json to_json(const VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

inline VectorXd vector_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline nlohmann::json to_json(const Standardizer& s) { return {{"mean", to_json(s.mean)}, {"std", to_json(s.std)}}; }

inline Standardizer standardizer_from_json(const nlohmann::json& j) {
  return {vector_from_json(j.at("mean")), vector_from_json(j.at("std"))};
}

inline nlohmann::json to_json(const TrainConfig& c) {
  return {{"epochs", c.epochs},         {"batch_size", c.batch_size}, {"learning_rate", c.learning_rate},
          {"beta1", c.beta1},           {"beta2", c.beta2},           {"epsilon", c.epsilon},
          {"train_fraction", c.train_fraction}, {"hidden_layers", c.hidden_layers}, {"ridge_lambda", c.ridge_lambda}};
}

}  // namespace detail

inline nlohmann::json to_json(const MlpModel& m, const TrainConfig& cfg) {
  return {{"kind", "mlp"},
          {"layer_sizes", m.layer_sizes},
          {"parameters", m.parameters()},
          {"standardizer", detail::to_json(m.standardizer)},
          {"config", detail::to_json(cfg)},
          {"seed", cfg.seed}};
}

inline nlohmann::json to_json(const RidgeModel& m, const TrainConfig& cfg) {
  std::vector<double> coef;
  for (Eigen::Index r = 0; r < m.coefficients.rows(); ++r)
    for (Eigen::Index c = 0; c < m.coefficients.cols(); ++c) coef.push_back(m.coefficients(r, c));
  return {{"kind", m.degree == 1 ? "linear" : "poly"},
          {"degree", m.degree},
          {"lambda", m.lambda},
          {"coefficient_shape", {m.coefficients.rows(), m.coefficients.cols()}},
          {"coefficients", coef},
          {"intercept", detail::to_json(m.intercept)},
          {"standardizer", detail::to_json(m.input)},
          {"mapped_standardizer", detail::to_json(m.mapped)},
          {"config", detail::to_json(cfg)},
          {"seed", cfg.seed}};
}

inline MlpModel mlp_from_json(const nlohmann::json& j) {
  try {
    require(j.at("kind") == "mlp", "model file is not an MLP");
    auto m = MlpModel::zeros(j.at("layer_sizes").get<std::vector<std::size_t>>());
    m.set_parameters(j.at("parameters").get<std::vector<double>>());
    m.standardizer = detail::standardizer_from_json(j.at("standardizer"));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid MLP model JSON: ") + e.what());
  }
}

inline RidgeModel ridge_from_json(const nlohmann::json& j) {
  try {
    RidgeModel m;
    m.degree = j.at("degree").get<int>();
    m.lambda = j.at("lambda").get<double>();
    const auto shape = j.at("coefficient_shape").get<std::vector<Eigen::Index>>();
    const auto coef = j.at("coefficients").get<std::vector<double>>();
    require(shape.size() == 2 && static_cast<std::size_t>(shape[0] * shape[1]) == coef.size(), "coefficient shape mismatch");
    m.coefficients.resize(shape[0], shape[1]);
    for (Eigen::Index r = 0, i = 0; r < shape[0]; ++r)
      for (Eigen::Index c = 0; c < shape[1]; ++c) m.coefficients(r, c) = coef[static_cast<std::size_t>(i++)];
    m.intercept = detail::vector_from_json(j.at("intercept"));
    m.input = detail::standardizer_from_json(j.at("standardizer"));
    m.mapped = detail::standardizer_from_json(j.at("mapped_standardizer"));
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid regression model JSON: ") + e.what());
  }
}

}  // namespace loadpat

#endif  // LOADPAT_MODELS_HPP
