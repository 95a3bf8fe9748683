#pragma once

#include <Eigen/Dense>

#include <complex>
#include <utility>

namespace pmd {

/// One-step linear operator on reduced coordinates and its modal expansion
/// about an anchor state.
struct LinearPredictor {
  Eigen::MatrixXd A1;             // r x r
  Eigen::MatrixXcd modes;         // r x r, columns z_j
  Eigen::VectorXcd eigenvalues;   // d_j
  Eigen::VectorXcd amplitudes;    // b_j
  double lambda = 0.0;
  Eigen::Index anchor_index = 0;  // time level of the initial condition

  Eigen::Index rank() const { return A1.rows(); }

  /// A predictor with no dynamics: every prediction is the zero vector.
  static LinearPredictor zero(Eigen::Index r, Eigen::Index anchor);
};

/// (columns 0..m-2, columns 1..m-1).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> split_sequential(const Eigen::MatrixXd& coords);

/// A1 = U2 U1^T (U1 U1^T + lambda I)^{-1}.
Eigen::MatrixXd fit_operator(const Eigen::MatrixXd& current, const Eigen::MatrixXd& next,
                             double lambda);

struct SpectralModes {
  Eigen::MatrixXcd modes;
  Eigen::VectorXcd eigenvalues;
};

/// Eigenpairs ordered by descending |d|, then descending real part, then
/// positive imaginary part first. Conjugate pairs are stored as exact
/// conjugates; each mode is scaled to unit norm with its largest component
/// real and positive.
SpectralModes spectral_modes(const Eigen::MatrixXd& A1);

/// B = (Z^H Z + lambda I)^{-1} Z^H u.
Eigen::VectorXcd amplitudes(const Eigen::MatrixXcd& modes, const Eigen::VectorXd& anchor,
                            double lambda);

/// Runs split, fit, modal decomposition and projection of column `anchor`.
LinearPredictor fit_linear_predictor(const Eigen::MatrixXd& coords, double lambda,
                                     Eigen::Index anchor);

/// u(i + k) = sum_j b_j d_j^k z_j (real part).
Eigen::VectorXd predict(const LinearPredictor& predictor, Eigen::Index steps_ahead);

/// Columns are predictions for k = first..first+count-1.
Eigen::MatrixXd predict_range(const LinearPredictor& predictor, Eigen::Index first,
                              Eigen::Index count);

}  // namespace pmd
