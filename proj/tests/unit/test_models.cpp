#include <numeric>
#include <set>

#include "catch_amalgamated.hpp"
#include "generators.hpp"
#include "gradcheck.hpp"

using namespace loadpat;
using Catch::Matchers::WithinAbs;
using Eigen::MatrixXd;

namespace {

MatrixXd random_matrix(gen::Rng& rng, Eigen::Index rows, Eigen::Index cols, double lo = -1, double hi = 1) {
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = gen::uniform(rng, lo, hi);
  return m;
}

MatrixXd random_simplex_rows(gen::Rng& rng, Eigen::Index rows, Eigen::Index k) {
  MatrixXd y = random_matrix(rng, rows, k, 0.01, 1.0);
  for (Eigen::Index i = 0; i < rows; ++i) y.row(i) /= y.row(i).sum();
  return y;
}

struct Constant {
  MatrixXd value;  // 1 x K
  MatrixXd predict(const MatrixXd& x) const { return value.replicate(x.rows(), 1); }
};

TrainConfig quick(std::size_t epochs, std::uint64_t seed = 1) {
  TrainConfig c;
  c.epochs = epochs;
  c.seed = seed;
  c.hidden_layers = {16, 16};
  return c;
}

}  // namespace

TEST_CASE("zero weights give a uniform output") {
  const auto m = MlpModel::zeros({10, 100, 100, 100, 7});
  const std::vector<double> f = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const auto p = m.forward(f);
  for (Eigen::Index j = 0; j < 7; ++j) CHECK_THAT(p(j), WithinAbs(1.0 / 7.0, 1e-15));
}

TEST_CASE("softmax is shift-invariant in the output biases") {
  gen::Rng rng(1);
  auto m = MlpModel::glorot({10, 8, 8, 5}, rng);
  const std::vector<double> f = {0.3, -1, 2, 0, 1, 1, -2, 0.5, 0.1, 3};
  const auto before = m.forward(f);
  m.biases.back().array() += 3.7;
  const auto after = m.forward(f);
  for (Eigen::Index j = 0; j < 5; ++j) CHECK_THAT(after(j), WithinAbs(before(j), 1e-14));
}

TEST_CASE("property: forward output is on the open simplex") {
  gen::Rng rng(2);
  for (int trial = 0; trial < 300; ++trial) {
    auto m = MlpModel::glorot({10, 12, 7}, rng);
    const double scale = std::pow(10.0, gen::uniform(rng, 0, 4));
    for (auto& w : m.weights) w *= scale;
    std::vector<double> f(10);
    for (auto& x : f) x = gen::uniform(rng, -3, 3);
    const auto p = m.forward(f);
    CHECK_THAT(p.sum(), WithinAbs(1.0, 1e-12));
    for (Eigen::Index j = 0; j < p.size(); ++j) {
      CHECK(p(j) > 0.0);
      CHECK(p(j) < 1.0);
    }
  }
}

TEST_CASE("softmax survives extreme logits") {
  MatrixXd logits(3, 2);
  logits << 1e4, -1e4, -1e4, 1e4, 0, 0;
  const auto p = MlpModel::softmax(logits);
  for (Eigen::Index c = 0; c < 2; ++c) {
    CHECK_THAT(p.col(c).sum(), WithinAbs(1.0, 1e-12));
    for (Eigen::Index r = 0; r < 3; ++r) {
      CHECK(p(r, c) > 0.0);
      CHECK(p(r, c) < 1.0);
    }
  }
}

TEST_CASE("non-finite input is rejected") {
  const auto m = MlpModel::zeros({3, 4, 2});
  const std::vector<double> bad = {1, NAN, 2};
  CHECK_THROWS_AS(m.forward(bad), NumericalError);
  const std::vector<double> wrong = {1, 2};
  CHECK_THROWS_AS(m.forward(wrong), DataError);
}

TEST_CASE("property: analytic gradients match central differences") {
  gen::Rng rng(99);
  double worst = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    const auto p = oracle::random_grad_problem(rng);
    worst = std::max(worst, oracle::gradient_check(p.model, p.z, p.y).max_relative_error);
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("parameters round-trip through the flat vector") {
  gen::Rng rng(4);
  auto m = MlpModel::glorot({3, 5, 2}, rng);
  const auto p = m.parameters();
  CHECK(p.size() == m.parameter_count());
  CHECK(p.size() == 3 * 5 + 5 + 5 * 2 + 2);
  auto z = MlpModel::zeros({3, 5, 2});
  z.set_parameters(p);
  CHECK(z.parameters() == p);
  CHECK(z.weights[1] == m.weights[1]);
}

TEST_CASE("single example is memorized") {
  MatrixXd x(1, 10);
  x << 1, 0, 2, 0, 1, 0, 0, 4, 3, 1500;
  MatrixXd y(1, 7);
  y << 0.3, 0.1, 0.05, 0.2, 0.05, 0.15, 0.15;
  TrainConfig cfg;
  cfg.epochs = 5000;
  cfg.seed = 3;
  const auto r = mlp_train(x, y, cfg);
  REQUIRE(r.loss_curve.size() == 5000);
  CHECK(r.loss_curve.back() < 1e-4);
  CHECK(evaluate_mse(r.model, x, y) < 1e-4);
  for (double l : r.loss_curve) CHECK(std::isfinite(l));
}

TEST_CASE("training is bitwise deterministic for a fixed seed") {
  gen::Rng rng(5);
  const MatrixXd x = random_matrix(rng, 40, 10);
  const MatrixXd y = random_simplex_rows(rng, 40, 4);
  const auto a = mlp_train(x, y, quick(30, 8));
  const auto b = mlp_train(x, y, quick(30, 8));
  CHECK(a.loss_curve == b.loss_curve);
  CHECK(a.model.parameters() == b.model.parameters());
  const auto c = mlp_train(x, y, quick(30, 9));
  CHECK(c.loss_curve != a.loss_curve);
}

TEST_CASE("divergent training aborts with a numerical error") {
  gen::Rng rng(6);
  const MatrixXd x = random_matrix(rng, 20, 10);
  const MatrixXd y = random_simplex_rows(rng, 20, 3);
  auto cfg = quick(50);
  cfg.learning_rate = 1e300;
  CHECK_THROWS_AS(mlp_train(x, y, cfg), NumericalError);
}

TEST_CASE("empty or mismatched training data is rejected") {
  CHECK_THROWS_AS(mlp_train(MatrixXd(0, 10), MatrixXd(0, 3), quick(1)), DataError);
  CHECK_THROWS_AS(mlp_train(MatrixXd::Zero(3, 10), MatrixXd::Zero(2, 3), quick(1)), DataError);
  CHECK_THROWS_AS(linear_fit(MatrixXd(0, 10), MatrixXd(0, 3)), DataError);
}

TEST_CASE("ridge recovers exactly affine targets") {
  gen::Rng rng(7);
  const MatrixXd x = random_matrix(rng, 50, 10, 0, 5);
  const MatrixXd a = random_matrix(rng, 10, 3);
  const Eigen::RowVectorXd b = random_matrix(rng, 1, 3);
  const MatrixXd y = (x * a).rowwise() + b;
  CHECK(evaluate_mse(linear_fit(x, y), x, y) < 1e-8);
}

TEST_CASE("y = x^2 on five points") {
  MatrixXd x(5, 1), y(5, 1);
  for (int i = 0; i < 5; ++i) {
    x(i, 0) = i - 2;
    y(i, 0) = (i - 2) * (i - 2);
  }
  CHECK(evaluate_mse(poly_fit(x, y), x, y) < 1e-8);
  // residuals of the best line y = 2 are (2, -1, -2, -1, 2)
  CHECK_THAT(evaluate_mse(linear_fit(x, y), x, y), WithinAbs(14.0 / 5.0, 1e-9));
}

TEST_CASE("duplicated dataset gives identical ridge coefficients") {
  gen::Rng rng(8);
  const MatrixXd x = random_matrix(rng, 30, 4);
  const MatrixXd y = random_simplex_rows(rng, 30, 3);
  MatrixXd x2(60, 4), y2(60, 3);
  x2 << x, x;
  y2 << y, y;
  for (int degree : {1, 2}) {
    const auto a = ridge_fit(x, y, degree, 1e-3);
    const auto b = ridge_fit(x2, y2, degree, 1e-3);
    CHECK((a.coefficients - b.coefficients).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((a.intercept - b.intercept).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("identical feature rows are still solvable") {
  const MatrixXd x = MatrixXd::Constant(6, 10, 2.5);
  gen::Rng rng(9);
  const MatrixXd y = random_simplex_rows(rng, 6, 4);
  for (const auto& m : {linear_fit(x, y), poly_fit(x, y)}) {
    const MatrixXd p = m.predict(x);
    CHECK(p.allFinite());
    for (Eigen::Index r = 0; r < 6; ++r)
      for (Eigen::Index j = 0; j < 4; ++j) CHECK_THAT(p(r, j), WithinAbs(y.col(j).mean(), 1e-12));
  }
  MatrixXd bad = x;
  bad(0, 0) = NAN;
  CHECK_THROWS_AS(linear_fit(bad, y), NumericalError);
}

TEST_CASE("property: ridge coefficients approach least squares as lambda shrinks") {
  gen::Rng rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXd x = random_matrix(rng, 80, 5);
    const MatrixXd y = random_matrix(rng, 80, 2);
    const auto base = linear_fit(x, y, 0.0);
    // least-squares oracle via the normal equations in the same coordinates
    const MatrixXd z = base.design(x);
    const MatrixXd yc = y.rowwise() - y.colwise().mean();
    const MatrixXd ols = (z.transpose() * z).ldlt().solve(z.transpose() * yc);
    double previous = INFINITY;
    for (double lambda : {1e-2, 1e-4, 1e-6}) {
      const double gap = (linear_fit(x, y, lambda).coefficients - ols).norm();
      CHECK(gap < previous);
      previous = gap;
    }
    CHECK(previous < 1e-5);
  }
}

TEST_CASE("property: poly with zero quadratic terms nests the linear model") {
  gen::Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const MatrixXd x = random_matrix(rng, 60, 10, 0, 4);
    const MatrixXd y = random_simplex_rows(rng, 60, 7);
    const auto lin = linear_fit(x, y);
    auto poly = poly_fit(x, y);
    REQUIRE(poly.coefficients.rows() == 10 + 55);
    poly.coefficients.setZero();
    poly.coefficients.topRows(10) = lin.coefficients;
    poly.intercept = lin.intercept;
    const MatrixXd probe = random_matrix(rng, 20, 10, 0, 4);
    CHECK((poly.predict(probe) - lin.predict(probe)).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("evaluate_mse examples") {
  gen::Rng rng(12);
  const MatrixXd y = random_simplex_rows(rng, 10, 7);
  const MatrixXd x = MatrixXd::Zero(10, 1);
  CHECK(evaluate_mse(Constant{y.row(3)}, x.topRows(1), y.row(3)) == 0.0);

  MatrixXd one_hot = MatrixXd::Zero(7, 7);
  for (int i = 0; i < 7; ++i) one_hot(i, i) = 1.0;
  const double mse = evaluate_mse(Constant{MatrixXd::Constant(1, 7, 1.0 / 7.0)}, MatrixXd::Zero(7, 1), one_hot);
  CHECK_THAT(mse, WithinAbs(6.0 / 49.0, 1e-12));

  for (int trial = 0; trial < 50; ++trial)
    CHECK(evaluate_mse(Constant{random_matrix(rng, 1, 7)}, x, y) >= 0.0);
  CHECK_THROWS_AS(evaluate_mse(Constant{y.row(0)}, MatrixXd(0, 1), MatrixXd(0, 7)), DataError);
}

TEST_CASE("split_train_test examples") {
  std::vector<std::string> ids;
  for (int i = 0; i < 10; ++i) ids.push_back("h" + std::to_string(i));
  const auto s = split_train_test(ids, 0.8, 3);
  CHECK(s.train.size() == 8);
  CHECK(s.test.size() == 2);
  std::set<std::string> all(s.train.begin(), s.train.end());
  all.insert(s.test.begin(), s.test.end());
  CHECK(all.size() == 10);

  const auto again = split_train_test(ids, 0.8, 3);
  CHECK(again.train == s.train);
  CHECK(again.test == s.test);

  const std::vector<std::string> five = {"a", "b", "c", "d", "e"};
  CHECK(split_train_test(five, 0.5, 1).train.size() == 3);
  for (std::size_t n : {312u, 250u, 7u}) {
    std::vector<std::string> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = std::to_string(i);
    CHECK(split_train_test(v, 0.8, 1).train.size() == static_cast<std::size_t>(std::ceil(0.8 * n - 1e-9)));
  }
  CHECK_THROWS_AS(split_train_test({"a"}, 0.8, 1), DataError);
  CHECK(split_train_test({"a", "b"}, 0.99, 1).test.size() == 1);
}

TEST_CASE("model JSON round-trips bit-exactly") {
  gen::Rng rng(13);
  const MatrixXd x = random_matrix(rng, 30, 10, 0, 3);
  const MatrixXd y = random_simplex_rows(rng, 30, 4);
  const auto cfg = quick(5);
  const auto mlp = mlp_train(x, y, cfg).model;
  const auto mlp2 = mlp_from_json(nlohmann::json::parse(to_json(mlp, cfg).dump()));
  CHECK(mlp2.predict(x) == mlp.predict(x));
  for (const auto& m : {linear_fit(x, y), poly_fit(x, y)}) {
    const auto back = ridge_from_json(nlohmann::json::parse(to_json(m, cfg).dump()));
    CHECK(back.degree == m.degree);
    CHECK(back.predict(x) == m.predict(x));
  }
}
