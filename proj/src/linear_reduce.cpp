#include "pmd/linear_reduce.hpp"

#include "pmd/errors.hpp"

#include <cmath>
#include <string>

namespace pmd {

namespace {

// Index of the first entry that is significant relative to the column norm.
Eigen::Index first_significant(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double tol = 1e-12 * v.norm();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (std::abs(v[i]) > tol) return i;
  return 0;
}

}  // namespace

LinearReduction svd_truncate(const Eigen::MatrixXd& normalized, const RankCriterion& criterion) {
  if (!normalized.allFinite()) throw DataError("svd_truncate: matrix has non-finite entries");
  if (normalized.size() == 0 || normalized.cwiseAbs().maxCoeff() == 0.0)
    throw DataError("svd_truncate: matrix is identically zero");

  const Eigen::Index full = std::min(normalized.rows(), normalized.cols());
  Eigen::BDCSVD<Eigen::MatrixXd> svd(normalized, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();

  Eigen::Index r = 0;
  if (criterion.kind == RankCriterion::Kind::FixedRank) {
    r = criterion.rank;
    if (r < 1 || r > full) {
      throw ShapeError("svd_truncate: rank " + std::to_string(r) + " outside [1, " +
                       std::to_string(full) + "]");
    }
  } else {
    if (!(criterion.epsilon > 0.0 && criterion.epsilon < 1.0))
      throw ShapeError("svd_truncate: energy fraction must lie in (0, 1)");
    const double total = sigma.sum();
    double running = 0.0;
    r = full;
    for (Eigen::Index i = 0; i < full; ++i) {
      running += sigma[i];
      if (running > (1.0 - criterion.epsilon) * total) {
        r = i + 1;
        break;
      }
    }
  }

  LinearReduction out;
  out.full_spectrum = sigma;
  out.Sr = sigma.head(r);
  out.Qr = svd.matrixU().leftCols(r);
  out.Vr = svd.matrixV().leftCols(r);
  for (Eigen::Index j = 0; j < r; ++j) {
    if (out.Qr(first_significant(out.Qr.col(j)), j) < 0.0) {
      out.Qr.col(j) *= -1.0;
      out.Vr.col(j) *= -1.0;
    }
  }
  return out;
}

LinearReduction zero_reduction(Eigen::Index rows, Eigen::Index cols) {
  LinearReduction out;
  out.Qr = Eigen::MatrixXd::Zero(rows, 1);
  out.Qr(0, 0) = 1.0;
  out.Vr = Eigen::MatrixXd::Zero(cols, 1);
  out.Vr(0, 0) = 1.0;
  out.Sr = Eigen::VectorXd::Zero(1);
  out.full_spectrum = Eigen::VectorXd::Zero(std::min(rows, cols));
  return out;
}

Eigen::MatrixXd residual(const Eigen::MatrixXd& normalized, const LinearReduction& reduction) {
  if (normalized.rows() != reduction.Qr.rows() || normalized.cols() != reduction.Vr.rows()) {
    throw ShapeError("residual: matrix is " + std::to_string(normalized.rows()) + "x" +
                     std::to_string(normalized.cols()) + " but reduction expects " +
                     std::to_string(reduction.Qr.rows()) + "x" +
                     std::to_string(reduction.Vr.rows()));
  }
  return normalized - reduction.Qr * (reduction.Sr.asDiagonal() * reduction.Vr.transpose());
}

Eigen::MatrixXd reduced_coordinates(const LinearReduction& reduction) {
  return reduction.Sr.asDiagonal() * reduction.Vr.transpose();
}

double pod_energy(const Eigen::VectorXd& spectrum, Eigen::Index k) {
  if (k < 1 || k > spectrum.size())
    throw ShapeError("pod_energy: k must lie in [1, " + std::to_string(spectrum.size()) + "]");
  const double total = spectrum.squaredNorm();
  if (total == 0.0) throw DataError("pod_energy: spectrum is identically zero");
  return spectrum.head(k).squaredNorm() / total;
}

}  // namespace pmd
