#pragma once

#include <Eigen/Dense>

namespace pmd {

/// Rank selection rule for the truncated SVD.
struct RankCriterion {
  enum class Kind { FixedRank, EnergyFraction };
  Kind kind = Kind::FixedRank;
  Eigen::Index rank = 1;
  double epsilon = 0.05;  // EnergyFraction: keep sum(sigma_1..r) > (1 - epsilon) sum(sigma)

  static RankCriterion fixed(Eigen::Index r) { return {Kind::FixedRank, r, 0.0}; }
  static RankCriterion energy(double eps) { return {Kind::EnergyFraction, 0, eps}; }
};

/// Truncated SVD factors. Columns of Qr have a nonnegative first significant
/// entry; the matching column of Vr carries the compensating sign.
struct LinearReduction {
  Eigen::MatrixXd Qr;             // n x r
  Eigen::VectorXd Sr;             // r, descending
  Eigen::MatrixXd Vr;             // m x r
  Eigen::VectorXd full_spectrum;  // min(n, m), descending
  Eigen::Index rank() const { return Sr.size(); }
};

LinearReduction svd_truncate(const Eigen::MatrixXd& normalized, const RankCriterion& criterion);

/// Reduction of an all-zero matrix: rank 1 with a zero singular value.
LinearReduction zero_reduction(Eigen::Index rows, Eigen::Index cols);

/// Part of the normalized data outside the retained subspace:
/// X = U - Qr diag(Sr) Vr^T.
Eigen::MatrixXd residual(const Eigen::MatrixXd& normalized, const LinearReduction& reduction);

/// diag(Sr) Vr^T, the r x m reduced linear coordinates.
Eigen::MatrixXd reduced_coordinates(const LinearReduction& reduction);

/// Fraction of squared spectrum captured by the first k entries.
double pod_energy(const Eigen::VectorXd& spectrum, Eigen::Index k);

}  // namespace pmd
