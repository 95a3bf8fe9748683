#pragma once

#include <Eigen/Dense>

#include <string>

namespace pmd {

inline constexpr double kSigmaFloor = 1e-10;

/// Eigenvectors of the row-normalized manifold kernel D^{-1} K, including the
/// trivial pair. Harmonics are orthonormal under v^T diag(degrees) v.
struct HarmonicBasis {
  double bandwidth = 1.0;
  Eigen::VectorXd eigenvalues;  // sigma_1 = 1 >= sigma_2 >= ...
  Eigen::MatrixXd harmonics;    // m x r_h
  Eigen::VectorXd degrees;      // m

  Eigen::Index size() const { return eigenvalues.size(); }
};

enum class NonlinearMode { Harmonic, Direct };

const char* to_string(NonlinearMode mode);
NonlinearMode nonlinear_mode_from_string(const std::string& name);

struct NonlinearPredictor {
  HarmonicBasis basis;
  Eigen::MatrixXd one_step;      // W, r x r
  Eigen::MatrixXd coefficients;  // C, r x r_h
  Eigen::MatrixXd train_coords;  // r x m
  double lambda = 0.0;
  NonlinearMode mode = NonlinearMode::Harmonic;
  bool row_normalize = true;
};

/// K(i, j) = exp(-|phi_i - phi_j|^2 / eps^2) over embedding columns.
Eigen::MatrixXd manifold_kernel(const Eigen::MatrixXd& coords, double bandwidth);

/// Kernel row between one point and every training column.
Eigen::VectorXd manifold_kernel_row(const Eigen::MatrixXd& coords, const Eigen::VectorXd& point,
                                    double bandwidth);

/// Median pairwise Euclidean distance between embedding columns.
double median_pairwise_distance(const Eigen::MatrixXd& coords);

HarmonicBasis harmonic_basis(const Eigen::MatrixXd& kernel, Eigen::Index count, double bandwidth);

/// W = Phi2 Phi1^T (Phi1 Phi1^T + lambda I)^{-1}.
Eigen::MatrixXd fit_one_step(const Eigen::MatrixXd& coords, double lambda);

/// C(:, j) = (W Phi) diag(degrees) v_j.
Eigen::MatrixXd project_coefficients(const Eigen::MatrixXd& one_step, const Eigen::MatrixXd& coords,
                                     const HarmonicBasis& basis);

/// Nystrom extension of each harmonic to a new point. Harmonics whose
/// eigenvalue magnitude is at or below kSigmaFloor extend to zero.
Eigen::VectorXd latent_harmonic(const HarmonicBasis& basis, const Eigen::MatrixXd& coords,
                                const Eigen::VectorXd& point, bool row_normalize = true);

NonlinearPredictor fit_nonlinear_predictor(const Eigen::MatrixXd& coords, double lambda,
                                           Eigen::Index harmonics, double bandwidth,
                                           NonlinearMode mode = NonlinearMode::Harmonic);

/// g(phi) = sum_j C(:, j) V_j(phi), or W phi in direct mode.
Eigen::VectorXd predict_next(const NonlinearPredictor& predictor, const Eigen::VectorXd& point);

/// Iterates predict_next; column s holds the state s + 1 steps after start.
Eigen::MatrixXd rollout(const NonlinearPredictor& predictor, const Eigen::VectorXd& start,
                        Eigen::Index steps);

}  // namespace pmd
