#include "oracles.hpp"

#include "pmd/errors.hpp"
#include "pmd/lift.hpp"

#include <doctest.h>

using namespace pmd;

TEST_CASE("identity design recovers the residuals") {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd res = oracle::random_matrix(rng, 7, 4);
  const LiftMap map = fit_ridge(Eigen::MatrixXd::Identity(4, 4), res, 0.0);
  CHECK((map.K_lift - res).norm() <= 1e-12 * res.norm());
}

TEST_CASE("ridge lift matches an augmented-QR least-squares oracle") {
  std::mt19937_64 rng(2);
  for (double lambda : {0.0, 1e-3, 1.0}) {
    const Eigen::MatrixXd c = oracle::random_matrix(rng, 6, 20);
    const Eigen::MatrixXd r = oracle::random_matrix(rng, 9, 20);
    const LiftMap map = fit_ridge(c, r, lambda);
    CHECK(oracle::rel_err(map.K_lift, oracle::ridge_qr(c, r, lambda)) <= 1e-8);
  }
}

TEST_CASE("perturbing the ridge lift increases the objective") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd c = oracle::random_matrix(rng, 3, 15);
    const Eigen::MatrixXd r = oracle::random_matrix(rng, 5, 15);
    const double lambda = 0.1;
    const LiftMap map = fit_ridge(c, r, lambda);
    const double best = oracle::ridge_objective(map.K_lift, c, r, lambda);
    Eigen::MatrixXd delta = oracle::random_matrix(rng, 5, 3);
    delta *= 1e-3 / delta.norm();
    CHECK(oracle::ridge_objective(map.K_lift + delta, c, r, lambda) > best);
  }
}

TEST_CASE("huge penalty shrinks the ridge lift") {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd c = oracle::random_matrix(rng, 3, 10);
  const Eigen::MatrixXd r = oracle::random_matrix(rng, 4, 10);
  const LiftMap map = fit_ridge(c, r, 1e12);
  CHECK(map.K_lift.norm() <= 1e-6 * (r * c.transpose()).norm());
}

TEST_CASE("singular ridge system without penalty is a numerical error") {
  Eigen::MatrixXd c(2, 4);
  c << 1, 2, 3, 4, 2, 4, 6, 8;  // rank one
  CHECK_THROWS_AS(fit_ridge(c, Eigen::MatrixXd::Ones(3, 4), 0.0), NumericalError);
  CHECK_THROWS_AS(fit_ridge(c, Eigen::MatrixXd::Ones(3, 5), 1.0), ShapeError);
}

TEST_CASE("linear kernel equals ridge on the same features") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd c = oracle::random_matrix(rng, 3, 12);
  const Eigen::MatrixXd r = oracle::random_matrix(rng, 6, 12);
  const double lambda = 0.05;
  const LiftMap kernel = fit_kernel_ridge(c, r, lambda, 0.0, 1);
  const LiftMap ridge = fit_ridge(c, r, lambda);
  const Eigen::MatrixXd probes = oracle::random_matrix(rng, 3, 5);
  CHECK(oracle::rel_err(lift_apply_columns(kernel, probes), lift_apply_columns(ridge, probes)) <= 1e-6);
}

TEST_CASE("kernel ridge dual coefficients solve the regularized Gram system") {
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd c = oracle::random_matrix(rng, 2, 10);
  const Eigen::MatrixXd r = oracle::random_matrix(rng, 4, 10);
  const LiftMap map = fit_kernel_ridge(c, r, 0.3, 1.0, 3);
  Eigen::MatrixXd gram(10, 10);
  for (Eigen::Index i = 0; i < 10; ++i)
    for (Eigen::Index j = 0; j < 10; ++j) gram(i, j) = std::pow(c.col(i).dot(c.col(j)) + 1.0, 3);
  CHECK((map.dual * (gram + 0.3 * Eigen::MatrixXd::Identity(10, 10)) - r).norm() <= 1e-9 * r.norm());
  CHECK(oracle::rel_err(polynomial_gram(c, c, 1.0, 3), gram) <= 1e-14);
}

TEST_CASE("quadratic kernel represents a parabola exactly") {
  Eigen::MatrixXd c(1, 9);
  Eigen::MatrixXd r(1, 9);
  for (Eigen::Index i = 0; i < 9; ++i) {
    const double x = -1.0 + 0.25 * static_cast<double>(i);
    c(0, i) = x;
    r(0, i) = 2.0 * x * x - x + 0.5;
  }
  const LiftMap map = fit_kernel_ridge(c, r, 1e-10, 1.0, 2);
  CHECK(oracle::rel_err(lift_apply_columns(map, c), r) <= 1e-6);
}

TEST_CASE("interpolation limit reproduces training residuals") {
  std::mt19937_64 rng(7);
  const Eigen::MatrixXd c = oracle::random_matrix(rng, 2, 8);
  const Eigen::MatrixXd r = oracle::random_matrix(rng, 5, 8);
  const LiftMap map = fit_kernel_ridge(c, r, 1e-12, 1.0, 4);
  for (Eigen::Index i = 0; i < 8; ++i)
    CHECK((lift_apply(map, c.col(i)) - r.col(i)).norm() <= 1e-6 * r.col(i).norm());
}

TEST_CASE("large kernel penalty shrinks predictions") {
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd c = oracle::random_matrix(rng, 2, 10);
  const Eigen::MatrixXd r = oracle::random_matrix(rng, 3, 10);
  const double small = lift_apply_columns(fit_kernel_ridge(c, r, 1e-2, 1.0, 2), c).norm();
  const double large = lift_apply_columns(fit_kernel_ridge(c, r, 1e8, 1.0, 2), c).norm();
  CHECK(large < 1e-4 * small);
}

TEST_CASE("neighbour restriction") {
  std::mt19937_64 rng(9);
  const Eigen::MatrixXd c = oracle::random_matrix(rng, 2, 10);
  const Eigen::MatrixXd r = oracle::random_matrix(rng, 3, 10);
  LiftMap all = fit_kernel_ridge(c, r, 0.1, 1.0, 2);
  LiftMap full = fit_kernel_ridge(c, r, 0.1, 1.0, 2, 10);
  LiftMap local = fit_kernel_ridge(c, r, 0.1, 1.0, 2, 3);
  const Eigen::Vector2d p(0.2, -0.4);
  CHECK(lift_apply(all, p) == lift_apply(full, p));
  // Three nearest only: the sum over those columns of the dual.
  std::vector<std::pair<double, Eigen::Index>> order;
  for (Eigen::Index j = 0; j < 10; ++j) order.push_back({(c.col(j) - p).squaredNorm(), j});
  std::sort(order.begin(), order.end());
  Eigen::VectorXd expect = Eigen::VectorXd::Zero(3);
  for (int k = 0; k < 3; ++k) {
    const Eigen::Index j = order[static_cast<std::size_t>(k)].second;
    expect += local.dual.col(j) * std::pow(p.dot(c.col(j)) + 1.0, 2);
  }
  CHECK((lift_apply(local, p) - expect).norm() <= 1e-12 * expect.norm());
}

TEST_CASE("zero map and shape checks") {
  LiftMap zero;
  zero.kind = LiftKind::Ridge;
  zero.K_lift = Eigen::MatrixXd::Zero(4, 2);
  CHECK(lift_apply(zero, Eigen::Vector2d(3, -1)) == Eigen::VectorXd::Zero(4));
  CHECK_THROWS_AS(lift_apply(zero, Eigen::Vector3d(1, 2, 3)), ShapeError);
  CHECK_THROWS_AS(fit_kernel_ridge(Eigen::MatrixXd::Ones(1, 3), Eigen::MatrixXd::Ones(1, 3), 0.0, 1.0, 2),
                  ConfigError);
  CHECK_THROWS_AS(fit_kernel_ridge(Eigen::MatrixXd::Ones(1, 3), Eigen::MatrixXd::Ones(1, 3), 1.0, 1.0, 0),
                  ConfigError);
}

TEST_CASE("lift outputs stay finite on bounded inputs") {
  std::mt19937_64 rng(10);
  const Eigen::MatrixXd c = oracle::random_matrix(rng, 2, 15);
  const Eigen::MatrixXd r = oracle::random_matrix(rng, 4, 15);
  const LiftMap map = fit_kernel_ridge(c, r, 1e-6, 1.0, 3);
  const Eigen::MatrixXd probes = 3.0 * oracle::random_matrix(rng, 2, 50);
  CHECK(lift_apply_columns(map, probes).allFinite());
}
