#include "pmd/predict_nonlinear.hpp"

#include "pmd/errors.hpp"
#include "pmd/manifold.hpp"
#include "ridge.hpp"

#include <cmath>
#include <limits>

namespace pmd {

const char* to_string(NonlinearMode mode) {
  return mode == NonlinearMode::Harmonic ? "harmonic" : "direct";
}

NonlinearMode nonlinear_mode_from_string(const std::string& name) {
  if (name == "harmonic") return NonlinearMode::Harmonic;
  if (name == "direct") return NonlinearMode::Direct;
  throw ConfigError("unknown nonlinear mode '" + name + "' (expected harmonic or direct)");
}

Eigen::MatrixXd manifold_kernel(const Eigen::MatrixXd& coords, double bandwidth) {
  return gaussian_weights(pairwise_distances(coords), bandwidth);
}

Eigen::VectorXd manifold_kernel_row(const Eigen::MatrixXd& coords, const Eigen::VectorXd& point,
                                    double bandwidth) {
  if (point.size() != coords.rows()) {
    throw ShapeError("manifold kernel: point has dimension " + std::to_string(point.size()) +
                     ", embedding has " + std::to_string(coords.rows()));
  }
  if (!(bandwidth > 0.0)) throw DataError("manifold kernel: bandwidth must be positive");
  const double inv = 1.0 / (bandwidth * bandwidth);
  Eigen::VectorXd row(coords.cols());
  for (Eigen::Index i = 0; i < coords.cols(); ++i) {
    const double d = (coords.col(i) - point).norm();
    row[i] = std::exp(-d * d * inv);
  }
  return row;
}

double median_pairwise_distance(const Eigen::MatrixXd& coords) {
  return median_bandwidth(pairwise_distances(coords));
}

HarmonicBasis harmonic_basis(const Eigen::MatrixXd& kernel, Eigen::Index count, double bandwidth) {
  const Eigen::Index m = kernel.rows();
  if (count < 1 || count > m) {
    throw ShapeError("harmonic_basis: harmonic count " + std::to_string(count) +
                     " must lie in [1, " + std::to_string(m) + "]");
  }
  const TransitionMatrix transition = transition_matrix(kernel);
  const MarkovSpectrum spectrum = markov_spectrum(transition);
  HarmonicBasis basis;
  basis.bandwidth = bandwidth;
  basis.degrees = transition.degrees;
  basis.eigenvalues = spectrum.values.head(count);
  basis.harmonics = spectrum.vectors.leftCols(count);
  return basis;
}

Eigen::MatrixXd fit_one_step(const Eigen::MatrixXd& coords, double lambda) {
  if (coords.cols() < 2) throw ShapeError("fit_one_step: need at least two embedding columns");
  const Eigen::Index n = coords.cols() - 1;
  return detail::ridge_solve(coords.leftCols(n), coords.rightCols(n), lambda, "fit_one_step");
}

Eigen::MatrixXd project_coefficients(const Eigen::MatrixXd& one_step, const Eigen::MatrixXd& coords,
                                     const HarmonicBasis& basis) {
  if (one_step.cols() != coords.rows() || basis.harmonics.rows() != coords.cols()) {
    throw ShapeError("project_coefficients: one-step map, coordinates and basis disagree");
  }
  const Eigen::MatrixXd image = one_step * coords;  // r x m
  return image * basis.degrees.asDiagonal() * basis.harmonics;
}

Eigen::VectorXd latent_harmonic(const HarmonicBasis& basis, const Eigen::MatrixXd& coords,
                                const Eigen::VectorXd& point, bool row_normalize) {
  if (basis.harmonics.rows() != coords.cols())
    throw ShapeError("latent_harmonic: basis and training coordinates disagree");
  Eigen::VectorXd weights = manifold_kernel_row(coords, point, basis.bandwidth);
  const double total = weights.sum();
  if (!(total >= std::numeric_limits<double>::min())) {
    throw ExtrapolationError("latent_harmonic: every kernel weight underflows; the point is too "
                             "far from the training manifold");
  }
  if (row_normalize) weights /= total;
  Eigen::VectorXd out = basis.harmonics.transpose() * weights;
  for (Eigen::Index j = 0; j < out.size(); ++j) {
    const double sigma = basis.eigenvalues[j];
    out[j] = std::abs(sigma) > kSigmaFloor ? out[j] / sigma : 0.0;
  }
  return out;
}

NonlinearPredictor fit_nonlinear_predictor(const Eigen::MatrixXd& coords, double lambda,
                                           Eigen::Index harmonics, double bandwidth,
                                           NonlinearMode mode) {
  NonlinearPredictor p;
  p.mode = mode;
  p.lambda = lambda;
  p.train_coords = coords;
  p.one_step = fit_one_step(coords, lambda);
  p.basis = harmonic_basis(manifold_kernel(coords, bandwidth), harmonics, bandwidth);
  p.coefficients = project_coefficients(p.one_step, coords, p.basis);
  return p;
}

Eigen::VectorXd predict_next(const NonlinearPredictor& predictor, const Eigen::VectorXd& point) {
  if (point.size() != predictor.one_step.cols())
    throw ShapeError("predict_next: point has the wrong dimension");
  if (predictor.mode == NonlinearMode::Direct) return predictor.one_step * point;
  return predictor.coefficients *
         latent_harmonic(predictor.basis, predictor.train_coords, point, predictor.row_normalize);
}

Eigen::MatrixXd rollout(const NonlinearPredictor& predictor, const Eigen::VectorXd& start,
                        Eigen::Index steps) {
  if (steps < 1) throw ShapeError("rollout: steps must be >= 1");
  Eigen::MatrixXd out(start.size(), steps);
  Eigen::VectorXd state = start;
  for (Eigen::Index s = 0; s < steps; ++s) {
    try {
      state = predict_next(predictor, state);
    } catch (const ExtrapolationError& e) {
      throw ExtrapolationError("rollout step " + std::to_string(s + 1) + ": " + e.what(), s + 1);
    }
    out.col(s) = state;
  }
  return out;
}

}  // namespace pmd
