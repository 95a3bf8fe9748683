#include "ridge.hpp"

#include "pmd/errors.hpp"

#include <string>

namespace pmd::detail {

Eigen::MatrixXd ridge_solve(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                            double lambda, const char* context) {
  if (inputs.cols() != targets.cols()) {
    throw ShapeError(std::string(context) + ": inputs have " + std::to_string(inputs.cols()) +
                     " samples, targets " + std::to_string(targets.cols()));
  }
  if (!(lambda >= 0.0)) throw ConfigError(std::string(context) + ": lambda must be >= 0");

  Eigen::MatrixXd gram = inputs * inputs.transpose();
  gram.diagonal().array() += lambda;

  if (lambda == 0.0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo >= 1e12) {
      throw NumericalError(std::string(context) +
                           ": normal equations are singular with lambda = 0; use lambda > 0");
    }
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > 0.0))
    throw NumericalError(std::string(context) + ": regularized normal equations failed");
  const Eigen::MatrixXd solved = ldlt.solve(inputs * targets.transpose());  // r x n
  if (!solved.allFinite()) throw NumericalError(std::string(context) + ": non-finite solution");
  return solved.transpose();
}

}  // namespace pmd::detail
