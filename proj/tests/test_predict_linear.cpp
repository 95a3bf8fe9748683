#include "oracles.hpp"

#include "pmd/errors.hpp"
#include "pmd/predict_linear.hpp"

#include <doctest.h>

#include <complex>

using namespace pmd;

namespace {

Eigen::MatrixXd trajectory(const Eigen::MatrixXd& a, const Eigen::VectorXd& x0, Eigen::Index m) {
  Eigen::MatrixXd out(a.rows(), m);
  out.col(0) = x0;
  for (Eigen::Index k = 1; k < m; ++k) out.col(k) = a * out.col(k - 1);
  return out;
}

// Diagonalizable with a rotation pair, a decaying pair and a real mode.
Eigen::MatrixXd generic_dynamics(std::mt19937_64& rng) {
  Eigen::MatrixXd block = Eigen::MatrixXd::Zero(5, 5);
  block.block<2, 2>(0, 0) << 0.98 * std::cos(0.2), -0.98 * std::sin(0.2), 0.98 * std::sin(0.2),
      0.98 * std::cos(0.2);
  block.block<2, 2>(2, 2) << 0.9 * std::cos(0.7), -0.9 * std::sin(0.7), 0.9 * std::sin(0.7),
      0.9 * std::cos(0.7);
  block(4, 4) = 0.8;
  const Eigen::MatrixXd s = oracle::random_matrix(rng, 5, 5) + 3.0 * Eigen::MatrixXd::Identity(5, 5);
  return s * block * s.inverse();
}

}  // namespace

TEST_CASE("sequential split") {
  Eigen::MatrixXd u(1, 3);
  u << 1, 2, 3;
  const auto [a, b] = split_sequential(u);
  CHECK(a == (Eigen::MatrixXd(1, 2) << 1, 2).finished());
  CHECK(b == (Eigen::MatrixXd(1, 2) << 2, 3).finished());
  const auto [c, d] = split_sequential(Eigen::MatrixXd::Ones(2, 2));
  CHECK(c.cols() == 1);
  CHECK(d.cols() == 1);
  CHECK_THROWS_AS(split_sequential(Eigen::MatrixXd::Ones(2, 1)), ShapeError);

  std::mt19937_64 rng(1);
  const Eigen::MatrixXd r = oracle::random_matrix(rng, 3, 9);
  const auto [r1, r2] = split_sequential(r);
  for (Eigen::Index j = 0; j + 1 < r1.cols(); ++j) CHECK(r2.col(j) == r1.col(j + 1));
}

TEST_CASE("operator recovers known dynamics") {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd a = generic_dynamics(rng);
  const Eigen::MatrixXd u = trajectory(a, Eigen::VectorXd::Ones(5), 30);
  const auto [u1, u2] = split_sequential(u);
  CHECK((fit_operator(u1, u2, 0.0) - a).norm() <= 1e-8 * a.norm());
}

TEST_CASE("operator matches the least-squares oracle with a penalty") {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd u1 = oracle::random_matrix(rng, 4, 20);
  const Eigen::MatrixXd u2 = oracle::random_matrix(rng, 4, 20);
  CHECK(oracle::rel_err(fit_operator(u1, u2, 0.7), oracle::ridge_qr(u1, u2, 0.7)) <= 1e-8);
  CHECK(oracle::rel_err(fit_operator(u1, u1, 0.0), Eigen::MatrixXd::Identity(4, 4)) <= 1e-10);
  CHECK(fit_operator(u1, u2, 1e14).norm() <= 1e-10);
}

TEST_CASE("singular operator fit without penalty") {
  Eigen::MatrixXd u1(2, 3);
  u1 << 1, 2, 3, 2, 4, 6;
  CHECK_THROWS_AS(fit_operator(u1, u1, 0.0), NumericalError);
}

TEST_CASE("spectral modes of a diagonal operator") {
  const SpectralModes s = spectral_modes(Eigen::Vector2d(0.5, 2.0).asDiagonal().toDenseMatrix());
  CHECK(s.eigenvalues[0] == std::complex<double>(2.0, 0.0));
  CHECK(s.eigenvalues[1] == std::complex<double>(0.5, 0.0));
  CHECK(std::abs(s.modes(1, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(s.modes(0, 1)) == doctest::Approx(1.0));
  CHECK(std::abs(s.modes(0, 0)) <= 1e-15);
}

TEST_CASE("rotation has unit-modulus conjugate eigenvalues, positive imaginary first") {
  const double theta = 0.4;
  Eigen::Matrix2d rot;
  rot << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  const SpectralModes s = spectral_modes(rot);
  CHECK(std::abs(s.eigenvalues[0] - std::polar(1.0, theta)) <= 1e-12);
  CHECK(s.eigenvalues[1] == std::conj(s.eigenvalues[0]));
  CHECK(s.modes.col(1) == s.modes.col(0).conjugate());
}

TEST_CASE("modes satisfy the eigen relation") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::MatrixXd a = oracle::random_matrix(rng, 6, 6);
    const SpectralModes s = spectral_modes(a);
    const Eigen::MatrixXcd lhs = a.cast<std::complex<double>>() * s.modes;
    const Eigen::MatrixXcd rhs = s.modes * s.eigenvalues.asDiagonal();
    for (Eigen::Index j = 0; j < 6; ++j) CHECK((lhs.col(j) - rhs.col(j)).norm() <= 1e-9 * std::max(1.0, std::abs(s.eigenvalues[j])));
    for (Eigen::Index j = 1; j < 6; ++j)
      CHECK(std::abs(s.eigenvalues[j]) <= std::abs(s.eigenvalues[j - 1]) * (1 + 1e-12) + 1e-12);
  }
}

TEST_CASE("amplitude projection") {
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(3, 3);
  const Eigen::Vector3d u(1, -2, 3);
  CHECK((amplitudes(id, u, 0.0) - u.cast<std::complex<double>>()).norm() <= 1e-15);
  CHECK(amplitudes(id, u, 1e12).norm() <= 1e-10);

  std::mt19937_64 rng(5);
  const SpectralModes s = spectral_modes(oracle::random_matrix(rng, 4, 4));
  const Eigen::VectorXd v = oracle::random_matrix(rng, 4, 1);
  const Eigen::VectorXcd b = amplitudes(s.modes, v, 0.0);
  CHECK((s.modes * b - v.cast<std::complex<double>>()).norm() <= 1e-9 * v.norm());
}

TEST_CASE("held-out prediction of an exact linear system") {
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd a = generic_dynamics(rng);
  const Eigen::MatrixXd full = trajectory(a, Eigen::VectorXd::Ones(5), 60);
  const Eigen::MatrixXd train = full.leftCols(40);
  const LinearPredictor p = fit_linear_predictor(train, 0.0, 39);
  CHECK((predict(p, 0) - train.col(39)).norm() <= 1e-9 * train.col(39).norm());
  for (Eigen::Index k = 1; k <= 20; ++k) {
    const Eigen::VectorXd truth = full.col(39 + k);
    CHECK((predict(p, k) - truth).norm() <= 1e-6 * truth.norm());
  }
  const Eigen::MatrixXd range = predict_range(p, 1, 5);
  for (Eigen::Index k = 0; k < 5; ++k) CHECK(range.col(k) == predict(p, k + 1));
}

TEST_CASE("shift consistency with the fitted operator") {
  std::mt19937_64 rng(7);
  const Eigen::MatrixXd a = generic_dynamics(rng);
  const Eigen::MatrixXd u = trajectory(a, Eigen::VectorXd::Ones(5), 25);
  const LinearPredictor p = fit_linear_predictor(u, 0.0, 24);
  for (Eigen::Index k = 0; k < 10; ++k) {
    const Eigen::VectorXd next = predict(p, k + 1);
    CHECK((next - p.A1 * predict(p, k)).norm() <= 1e-8 * std::max(1.0, next.norm()));
  }
}

TEST_CASE("decaying spectrum drives predictions to zero") {
  Eigen::Matrix2d a;
  a << 0.7 * std::cos(0.5), -0.7 * std::sin(0.5), 0.7 * std::sin(0.5), 0.7 * std::cos(0.5);
  const Eigen::MatrixXd u = trajectory(a, Eigen::Vector2d(1, 0.3), 12);
  const LinearPredictor p = fit_linear_predictor(u, 0.0, 11);
  double previous = predict(p, 0).norm();
  for (Eigen::Index k = 1; k < 30; ++k) {
    const double current = predict(p, k).norm();
    CHECK(current < previous);
    previous = current;
  }
}

TEST_CASE("overflow is a data error") {
  const Eigen::MatrixXd u = trajectory(Eigen::MatrixXd::Constant(1, 1, 3.0), Eigen::VectorXd::Ones(1), 5);
  const LinearPredictor p = fit_linear_predictor(u, 0.0, 4);
  CHECK_THROWS_AS(predict(p, 1000), DataError);
}

TEST_CASE("zero predictor") {
  const LinearPredictor p = LinearPredictor::zero(3, 7);
  CHECK(p.rank() == 3);
  CHECK(predict(p, 4) == Eigen::VectorXd::Zero(3));
}
