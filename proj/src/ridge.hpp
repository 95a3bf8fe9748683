#pragma once

#include <Eigen/Dense>

namespace pmd::detail {

/// Closed-form minimizer of ||K X - Y||_F^2 + lambda ||K||_F^2:
/// K = Y X^T (X X^T + lambda I)^{-1}. With lambda = 0 the Gram matrix must be
/// well conditioned (cond < 1e12) or NumericalError is raised.
Eigen::MatrixXd ridge_solve(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                            double lambda, const char* context);

}  // namespace pmd::detail
