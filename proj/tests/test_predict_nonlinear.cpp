#include "oracles.hpp"

#include "pmd/errors.hpp"
#include "pmd/predict_nonlinear.hpp"

#include <doctest.h>

#include <numbers>

using namespace pmd;

namespace {

// Points on a circle advancing by a fixed angle each step.
Eigen::MatrixXd circle_orbit(Eigen::Index m, double step, double radius = 1.0) {
  Eigen::MatrixXd c(2, m);
  for (Eigen::Index i = 0; i < m; ++i)
    c.col(i) << radius * std::cos(step * static_cast<double>(i)), radius * std::sin(step * static_cast<double>(i));
  return c;
}

Eigen::MatrixXd two_block_kernel(Eigen::Index per, double coupling) {
  Eigen::MatrixXd k = Eigen::MatrixXd::Constant(2 * per, 2 * per, coupling);
  k.topLeftCorner(per, per).setOnes();
  k.bottomRightCorner(per, per).setOnes();
  return k;
}

}  // namespace

TEST_CASE("manifold kernel values") {
  Eigen::MatrixXd c(1, 3);
  c << 0.0, 0.0, 0.5;
  const Eigen::MatrixXd k = manifold_kernel(c, 0.5);
  CHECK(k(0, 1) == 1.0);
  CHECK(k(0, 2) == doctest::Approx(std::exp(-1.0)));
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd r = manifold_kernel(oracle::random_matrix(rng, 3, 10), 0.8);
  CHECK(r == r.transpose());
  CHECK(r.diagonal() == Eigen::VectorXd::Ones(10));
  const Eigen::VectorXd row = manifold_kernel_row(c, Eigen::VectorXd::Zero(1), 0.5);
  CHECK((row - k.row(0).transpose()).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("harmonic basis of complete mixing") {
  const HarmonicBasis b = harmonic_basis(Eigen::MatrixXd::Ones(5, 5), 5, 1.0);
  CHECK(b.eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(b.eigenvalues.tail(4).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("harmonic basis ordering, trivial pair and orthonormality") {
  std::mt19937_64 rng(2);
  const Eigen::MatrixXd c = oracle::random_matrix(rng, 2, 25);
  const HarmonicBasis b = harmonic_basis(manifold_kernel(c, 1.0), 10, 1.0);
  CHECK(std::abs(b.eigenvalues[0] - 1.0) <= 1e-10);
  for (Eigen::Index j = 1; j < 10; ++j) {
    CHECK(b.eigenvalues[j] <= b.eigenvalues[j - 1] + 1e-15);
    CHECK(std::abs(b.eigenvalues[j]) <= 1.0);
  }
  const Eigen::VectorXd v1 = b.harmonics.col(0);
  CHECK((v1.array() - v1.mean()).abs().maxCoeff() <= 1e-10 * std::abs(v1.mean()));
  const Eigen::MatrixXd gram = b.harmonics.transpose() * b.degrees.asDiagonal() * b.harmonics;
  CHECK((gram - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK_THROWS_AS(harmonic_basis(manifold_kernel(c, 1.0), 26, 1.0), ShapeError);
}

TEST_CASE("two-block kernel: second harmonic separates the blocks") {
  const HarmonicBasis b = harmonic_basis(two_block_kernel(6, 1e-6), 2, 1.0);
  CHECK(b.eigenvalues[1] > 1.0 - 1e-5);
  const double s = b.harmonics(0, 1);
  for (Eigen::Index i = 0; i < 12; ++i) CHECK(b.harmonics(i, 1) * s * (i < 6 ? 1.0 : -1.0) > 0.0);
}

TEST_CASE("one-step ridge map") {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd m_map = oracle::random_matrix(rng, 3, 3) * 0.4;
  Eigen::MatrixXd c(3, 12);
  c.col(0) = oracle::random_matrix(rng, 3, 1);
  for (Eigen::Index i = 1; i < 12; ++i) c.col(i) = m_map * c.col(i - 1);
  CHECK((fit_one_step(c, 0.0) - m_map).norm() <= 1e-8 * m_map.norm());

  // A one-dimensional constant trajectory is full rank and maps to itself.
  const Eigen::MatrixXd still = Eigen::MatrixXd::Constant(1, 8, 0.7);
  CHECK(std::abs(fit_one_step(still, 0.0)(0, 0) - 1.0) <= 1e-9);

  const Eigen::MatrixXd noisy = oracle::random_matrix(rng, 2, 9);
  Eigen::MatrixXd stay(2, 10);
  stay << noisy, noisy.col(8);
  CHECK(oracle::rel_err(fit_one_step(stay, 0.3), oracle::ridge_qr(stay.leftCols(9), stay.rightCols(9), 0.3)) <= 1e-8);
  CHECK(fit_one_step(stay, 1e14).norm() <= 1e-10);
}

TEST_CASE("projection coefficients") {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd c = oracle::random_matrix(rng, 2, 15);
  const HarmonicBasis b = harmonic_basis(manifold_kernel(c, 1.0), 15, 1.0);
  CHECK(project_coefficients(Eigen::MatrixXd::Zero(2, 2), c, b).norm() == 0.0);

  // Complete basis reconstructs the image H = W Phi.
  const Eigen::MatrixXd w = oracle::random_matrix(rng, 2, 2);
  const Eigen::MatrixXd coeff = project_coefficients(w, c, b);
  CHECK((coeff * b.harmonics.transpose() - w * c).norm() <= 1e-8 * (w * c).norm());

  // Rows of H equal to v_2 give unit coefficients on harmonic 2 only.
  Eigen::MatrixXd h(2, 15);
  h.row(0) = b.harmonics.col(1).transpose();
  h.row(1) = b.harmonics.col(1).transpose();
  const Eigen::MatrixXd unit = project_coefficients(Eigen::MatrixXd::Identity(2, 2), h, b);
  CHECK(std::abs(unit(0, 1) - 1.0) <= 1e-8);
  CHECK(std::abs(unit(1, 1) - 1.0) <= 1e-8);
  // Projection of v_2 onto the other (degree-orthogonal) harmonics vanishes.
  Eigen::MatrixXd others = unit;
  others.col(1).setZero();
  CHECK(others.cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("Nystrom extension reproduces harmonics at training points") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd c = oracle::random_matrix(rng, 2, 30);
  const HarmonicBasis b = harmonic_basis(manifold_kernel(c, 0.8), 12, 0.8);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < 30; ++i) {
    const Eigen::VectorXd v = latent_harmonic(b, c, c.col(i));
    for (Eigen::Index j = 0; j < 12; ++j) worst = std::max(worst, std::abs(v[j] - b.harmonics(i, j)));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("unnormalized Nystrom weights break the in-sample identity") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd c = oracle::random_matrix(rng, 2, 30);
  const HarmonicBasis b = harmonic_basis(manifold_kernel(c, 0.8), 4, 0.8);
  const Eigen::VectorXd raw = latent_harmonic(b, c, c.col(0), false);
  CHECK(std::abs(raw[0] - b.degrees[0] * b.harmonics(0, 0)) <= 1e-8 * std::abs(raw[0]));
}

TEST_CASE("trivial harmonic extends to a constant") {
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd c = oracle::random_matrix(rng, 2, 20);
  const HarmonicBasis b = harmonic_basis(manifold_kernel(c, 1.0), 3, 1.0);
  const double value = b.harmonics(0, 0);
  for (int k = 0; k < 5; ++k) {
    const Eigen::VectorXd p = oracle::random_matrix(rng, 2, 1);
    CHECK(std::abs(latent_harmonic(b, c, p)[0] - value) <= 1e-10 * std::abs(value));
  }
}

TEST_CASE("far points cannot be extended") {
  std::mt19937_64 rng(7);
  const Eigen::MatrixXd c = oracle::random_matrix(rng, 2, 10);
  const HarmonicBasis b = harmonic_basis(manifold_kernel(c, 0.5), 3, 0.5);
  CHECK_THROWS_AS(latent_harmonic(b, c, Eigen::Vector2d(1e3, 1e3)), ExtrapolationError);
}

TEST_CASE("harmonics at or below the floor extend to zero") {
  const HarmonicBasis b = harmonic_basis(Eigen::MatrixXd::Ones(4, 4), 4, 1.0);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(1, 4);
  const Eigen::VectorXd v = latent_harmonic(b, c, Eigen::VectorXd::Zero(1));
  CHECK(v.tail(3) == Eigen::VectorXd::Zero(3));
}

TEST_CASE("complete basis: harmonic prediction equals the direct map in sample") {
  const Eigen::MatrixXd c = circle_orbit(24, 2.0 * std::numbers::pi / 24.0 * 1.1);
  const NonlinearPredictor h = fit_nonlinear_predictor(c, 1e-8, 24, 0.4);
  REQUIRE(h.basis.eigenvalues.cwiseAbs().minCoeff() > kSigmaFloor);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < 24; ++i) {
    const Eigen::VectorXd direct = h.one_step * c.col(i);
    worst = std::max(worst, (predict_next(h, c.col(i)) - direct).norm() / direct.norm());
  }
  CHECK(worst <= 1e-6);
  NonlinearPredictor d = h;
  d.mode = NonlinearMode::Direct;
  CHECK(predict_next(d, c.col(3)) == h.one_step * c.col(3));
}

TEST_CASE("zero one-step map predicts zero") {
  const Eigen::MatrixXd c = circle_orbit(10, 0.5);
  NonlinearPredictor p = fit_nonlinear_predictor(c, 1e-8, 5, 0.7);
  p.one_step.setZero();
  p.coefficients = project_coefficients(p.one_step, c, p.basis);
  CHECK(predict_next(p, Eigen::Vector2d(0.3, 0.1)) == Eigen::Vector2d::Zero());
}

TEST_CASE("rollout") {
  const Eigen::MatrixXd c = circle_orbit(40, 0.3);
  const NonlinearPredictor p = fit_nonlinear_predictor(c, 1e-10, 20, 0.5);
  const Eigen::MatrixXd one = rollout(p, c.col(39), 1);
  CHECK(one.col(0) == predict_next(p, c.col(39)));
  const Eigen::MatrixXd long_run = rollout(p, c.col(39), 40);
  for (Eigen::Index k = 0; k < 40; ++k) CHECK(long_run.col(k).norm() <= 2.0);
  CHECK_THROWS_AS(rollout(p, c.col(0), 0), ShapeError);

  // Fixed point of the direct map stays put.
  NonlinearPredictor fixed = p;
  fixed.mode = NonlinearMode::Direct;
  fixed.one_step = Eigen::Matrix2d::Identity();
  const Eigen::MatrixXd still = rollout(fixed, Eigen::Vector2d(0.2, 0.4), 5);
  for (Eigen::Index k = 0; k < 5; ++k) CHECK(still.col(k) == Eigen::Vector2d(0.2, 0.4));
}

TEST_CASE("rollout reports the failing step") {
  const Eigen::MatrixXd c = circle_orbit(20, 0.3);
  NonlinearPredictor p = fit_nonlinear_predictor(c, 1e-8, 5, 0.5);
  try {
    rollout(p, Eigen::Vector2d(1e4, 0.0), 3);
    FAIL("expected ExtrapolationError");
  } catch (const ExtrapolationError& e) {
    CHECK(e.detail() == 1);
  }
}

TEST_CASE("contracting linear fixture decays under the direct map") {
  Eigen::MatrixXd c(2, 30);
  c.col(0) << 1.0, 0.5;
  Eigen::Matrix2d m;
  m << 0.8 * std::cos(0.4), -0.8 * std::sin(0.4), 0.8 * std::sin(0.4), 0.8 * std::cos(0.4);
  for (Eigen::Index i = 1; i < 30; ++i) c.col(i) = m * c.col(i - 1);
  const NonlinearPredictor p = fit_nonlinear_predictor(c, 0.0, 10, 0.3, NonlinearMode::Direct);
  const Eigen::MatrixXd run = rollout(p, c.col(29), 10);
  for (Eigen::Index k = 1; k < 10; ++k) CHECK(run.col(k).norm() < run.col(k - 1).norm());
}
