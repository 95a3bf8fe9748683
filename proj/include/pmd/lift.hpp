#pragma once

#include <Eigen/Dense>

#include <string>

namespace pmd {

enum class LiftKind { Ridge, KernelRidge };

const char* to_string(LiftKind kind);
LiftKind lift_kind_from_string(const std::string& name);

/// Map from embedding coordinates back to residual space.
///
/// Ridge stores the n x r matrix K_lift. KernelRidge stores the training
/// coordinates and the n x m dual coefficients of the polynomial kernel
/// (phi^T phi' + c)^d; `neighbors` > 0 restricts the kernel sum at apply time
/// to that many nearest training coordinates.
struct LiftMap {
  LiftKind kind = LiftKind::Ridge;
  Eigen::MatrixXd K_lift;
  Eigen::MatrixXd train_coords;
  Eigen::MatrixXd dual;
  double lambda = 0.0;
  double offset = 1.0;
  int degree = 1;
  Eigen::Index neighbors = 0;

  Eigen::Index input_dim() const;
  Eigen::Index output_dim() const;
};

/// K_lift = R C^T (C C^T + lambda I)^{-1}.
LiftMap fit_ridge(const Eigen::MatrixXd& coords, const Eigen::MatrixXd& residuals, double lambda);

/// Gram G(i, j) = (c_i^T c_j + offset)^degree; dual = R (G + lambda I)^{-1}.
LiftMap fit_kernel_ridge(const Eigen::MatrixXd& coords, const Eigen::MatrixXd& residuals,
                         double lambda, double offset, int degree, Eigen::Index neighbors = 0);

Eigen::VectorXd lift_apply(const LiftMap& map, const Eigen::VectorXd& phi);

/// Applies the map to every column of `coords`.
Eigen::MatrixXd lift_apply_columns(const LiftMap& map, const Eigen::MatrixXd& coords);

/// Polynomial Gram matrix between the columns of a and b.
Eigen::MatrixXd polynomial_gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                double offset, int degree);

}  // namespace pmd
