#include "oracles.hpp"

#include "pmd/errors.hpp"
#include "pmd/linear_reduce.hpp"

#include <doctest.h>

using namespace pmd;

TEST_CASE("diagonal matrix truncation") {
  const Eigen::MatrixXd u = Eigen::Vector3d(3, 2, 1).asDiagonal();
  const LinearReduction red = svd_truncate(u, RankCriterion::fixed(2));
  REQUIRE(red.rank() == 2);
  CHECK(red.Sr[0] == doctest::Approx(3.0));
  CHECK(red.Sr[1] == doctest::Approx(2.0));
  CHECK(residual(u, red).norm() == doctest::Approx(1.0));
  CHECK(red.full_spectrum.size() == 3);
}

TEST_CASE("energy fraction on a rank-one outer product") {
  std::mt19937_64 rng(1);
  const Eigen::MatrixXd u = oracle::random_matrix(rng, 7, 1) * oracle::random_matrix(rng, 1, 5);
  const LinearReduction red = svd_truncate(u, RankCriterion::energy(0.05));
  CHECK(red.rank() == 1);
}

TEST_CASE("energy fraction sums singular values, not squares") {
  // sigma = (3, 2, 1): sum = 6. r = 2 keeps 5/6 ~ 0.833; squares would keep 13/14.
  const Eigen::MatrixXd u = Eigen::Vector3d(3, 2, 1).asDiagonal();
  CHECK(svd_truncate(u, RankCriterion::energy(0.1)).rank() == 3);
  CHECK(svd_truncate(u, RankCriterion::energy(0.2)).rank() == 2);
}

TEST_CASE("truncation matches a Jacobi SVD oracle") {
  std::mt19937_64 rng(7);
  const Eigen::MatrixXd u = oracle::random_matrix(rng, 20, 12);
  for (Eigen::Index r : {1, 3, 6, 12}) {
    const LinearReduction red = svd_truncate(u, RankCriterion::fixed(r));
    const Eigen::MatrixXd approx = red.Qr * red.Sr.asDiagonal() * red.Vr.transpose();
    CHECK((approx - oracle::jacobi_truncation(u, r)).norm() <= 1e-10 * u.norm());
  }
}

TEST_CASE("factors are orthonormal and sorted") {
  std::mt19937_64 rng(9);
  const Eigen::MatrixXd u = oracle::random_matrix(rng, 15, 9);
  const LinearReduction red = svd_truncate(u, RankCriterion::fixed(5));
  CHECK((red.Qr.transpose() * red.Qr - Eigen::MatrixXd::Identity(5, 5)).norm() <= 1e-10);
  CHECK((red.Vr.transpose() * red.Vr - Eigen::MatrixXd::Identity(5, 5)).norm() <= 1e-10);
  for (Eigen::Index i = 1; i < 5; ++i) CHECK(red.Sr[i] <= red.Sr[i - 1]);
  CHECK(red.Sr.minCoeff() >= 0.0);
}

TEST_CASE("sign convention: first significant entry of each Qr column is nonnegative") {
  std::mt19937_64 rng(10);
  const Eigen::MatrixXd u = oracle::random_matrix(rng, 8, 6);
  const LinearReduction red = svd_truncate(u, RankCriterion::fixed(4));
  for (Eigen::Index j = 0; j < 4; ++j) {
    Eigen::Index i = 0;
    while (std::abs(red.Qr(i, j)) < 1e-12) ++i;
    CHECK(red.Qr(i, j) > 0.0);
  }
  const LinearReduction again = svd_truncate(u, RankCriterion::fixed(4));
  CHECK(again.Qr == red.Qr);
  CHECK(again.Vr == red.Vr);
  CHECK(again.Sr == red.Sr);
}

TEST_CASE("complete basis leaves no residual") {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd u = oracle::random_matrix(rng, 6, 9);
  const LinearReduction red = svd_truncate(u, RankCriterion::fixed(6));
  CHECK(residual(u, red).norm() <= 1e-10 * u.norm());
}

TEST_CASE("residual energy equals the trailing spectrum and is orthogonal to Qr") {
  std::mt19937_64 rng(12);
  const Eigen::MatrixXd u = oracle::random_matrix(rng, 10, 8);
  const Eigen::VectorXd sv = oracle::singular_values_eig(u);
  const LinearReduction red = svd_truncate(u, RankCriterion::fixed(3));
  const Eigen::MatrixXd x = residual(u, red);
  const double tail = sv.tail(sv.size() - 3).squaredNorm();
  CHECK(std::abs(x.squaredNorm() - tail) <= 1e-8 * tail);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    if (x.col(j).norm() > 0.0) CHECK((red.Qr.transpose() * x.col(j)).norm() <= 1e-8 * x.col(j).norm());
  }
}

TEST_CASE("Eckart-Young: truncation beats any other choice of r singular triplets") {
  std::mt19937_64 rng(13);
  const Eigen::MatrixXd u = oracle::random_matrix(rng, 9, 7);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(u, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::Index r = 3;
  const double best = residual(u, svd_truncate(u, RankCriterion::fixed(r))).norm();
  // Every 3-subset of the 7 triplets.
  for (int a = 0; a < 7; ++a)
    for (int b = a + 1; b < 7; ++b)
      for (int c = b + 1; c < 7; ++c) {
        Eigen::MatrixXd approx = Eigen::MatrixXd::Zero(9, 7);
        for (int idx : {a, b, c})
          approx += svd.singularValues()[idx] * svd.matrixU().col(idx) *
                    svd.matrixV().col(idx).transpose();
        CHECK(best <= (u - approx).norm() + 1e-12);
      }
}

TEST_CASE("reduced coordinates") {
  const Eigen::MatrixXd u = Eigen::Vector2d(3, 2).asDiagonal();
  const LinearReduction red = svd_truncate(u, RankCriterion::fixed(2));
  const Eigen::MatrixXd c = reduced_coordinates(red);
  CHECK(c.cwiseAbs().isApprox(Eigen::Matrix2d(Eigen::Vector2d(3, 2).asDiagonal())));

  std::mt19937_64 rng(14);
  const Eigen::MatrixXd v = oracle::random_matrix(rng, 12, 10);
  const LinearReduction rv = svd_truncate(v, RankCriterion::fixed(4));
  const Eigen::MatrixXd cv = reduced_coordinates(rv);
  CHECK(rv.Qr * cv == rv.Qr * (rv.Sr.asDiagonal() * rv.Vr.transpose()));
  for (Eigen::Index i = 0; i < 4; ++i) CHECK(std::abs(cv.row(i).norm() - rv.Sr[i]) <= 1e-10 * rv.Sr[0]);
}

TEST_CASE("pod energy") {
  CHECK(pod_energy(Eigen::Vector4d(1, 1, 1, 1), 2) == doctest::Approx(0.5));
  CHECK(pod_energy(Eigen::Vector4d(4, 3, 2, 1), 4) == doctest::Approx(1.0));
  CHECK(pod_energy(Eigen::Vector3d(3, 2, 1), 1) == doctest::Approx(9.0 / 14.0));
  CHECK_THROWS_AS(pod_energy(Eigen::Vector3d::Zero(), 1), DataError);
  CHECK_THROWS_AS(pod_energy(Eigen::Vector3d(3, 2, 1), 4), ShapeError);
}

TEST_CASE("svd_truncate errors") {
  CHECK_THROWS_AS(svd_truncate(Eigen::MatrixXd::Zero(3, 3), RankCriterion::fixed(1)), DataError);
  CHECK_THROWS_AS(svd_truncate(Eigen::MatrixXd::Identity(3, 3), RankCriterion::fixed(4)), ShapeError);
  CHECK_THROWS_AS(svd_truncate(Eigen::MatrixXd::Identity(3, 3), RankCriterion::fixed(0)), ShapeError);
  const LinearReduction red = svd_truncate(Eigen::MatrixXd::Identity(3, 3), RankCriterion::fixed(2));
  CHECK_THROWS_AS(residual(Eigen::MatrixXd::Identity(4, 3), red), ShapeError);
}
