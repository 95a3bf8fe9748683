#include "pmd/lift.hpp"

#include "pmd/errors.hpp"
#include "ridge.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace pmd {

const char* to_string(LiftKind kind) {
  return kind == LiftKind::Ridge ? "ridge" : "kernel";
}

LiftKind lift_kind_from_string(const std::string& name) {
  if (name == "ridge") return LiftKind::Ridge;
  if (name == "kernel" || name == "kernel_ridge") return LiftKind::KernelRidge;
  throw ConfigError("unknown lift kind '" + name + "' (expected ridge or kernel)");
}

Eigen::Index LiftMap::input_dim() const {
  return kind == LiftKind::Ridge ? K_lift.cols() : train_coords.rows();
}

Eigen::Index LiftMap::output_dim() const {
  return kind == LiftKind::Ridge ? K_lift.rows() : dual.rows();
}

Eigen::MatrixXd polynomial_gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                double offset, int degree) {
  Eigen::MatrixXd gram = a.transpose() * b;
  gram.array() += offset;
  if (degree != 1) gram = gram.array().pow(static_cast<double>(degree)).matrix();
  return gram;
}

LiftMap fit_ridge(const Eigen::MatrixXd& coords, const Eigen::MatrixXd& residuals, double lambda) {
  LiftMap map;
  map.kind = LiftKind::Ridge;
  map.lambda = lambda;
  map.K_lift = detail::ridge_solve(coords, residuals, lambda, "fit_ridge");
  return map;
}

LiftMap fit_kernel_ridge(const Eigen::MatrixXd& coords, const Eigen::MatrixXd& residuals,
                         double lambda, double offset, int degree, Eigen::Index neighbors) {
  if (!(lambda > 0.0)) throw ConfigError("fit_kernel_ridge: lambda must be > 0");
  if (degree < 1) throw ConfigError("fit_kernel_ridge: degree must be >= 1");
  if (neighbors < 0) throw ConfigError("fit_kernel_ridge: neighbor count must be >= 0");
  if (coords.cols() != residuals.cols()) {
    throw ShapeError("fit_kernel_ridge: " + std::to_string(coords.cols()) + " coordinates but " +
                     std::to_string(residuals.cols()) + " residual columns");
  }
  Eigen::MatrixXd gram = polynomial_gram(coords, coords, offset, degree);
  gram.diagonal().array() += lambda;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  if (ldlt.info() != Eigen::Success) throw NumericalError("fit_kernel_ridge: factorization failed");

  LiftMap map;
  map.kind = LiftKind::KernelRidge;
  map.lambda = lambda;
  map.offset = offset;
  map.degree = degree;
  map.neighbors = neighbors;
  map.train_coords = coords;
  map.dual = ldlt.solve(residuals.transpose()).transpose();
  if (!map.dual.allFinite()) throw NumericalError("fit_kernel_ridge: non-finite dual coefficients");
  return map;
}

Eigen::VectorXd lift_apply(const LiftMap& map, const Eigen::VectorXd& phi) {
  if (phi.size() != map.input_dim()) {
    throw ShapeError("lift_apply: expected a " + std::to_string(map.input_dim()) +
                     "-vector, got " + std::to_string(phi.size()));
  }
  if (map.kind == LiftKind::Ridge) return map.K_lift * phi;

  const Eigen::Index m = map.train_coords.cols();
  const Eigen::VectorXd kvec = polynomial_gram(map.train_coords, phi, map.offset, map.degree);
  if (map.neighbors <= 0 || map.neighbors >= m) return map.dual * kvec;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Eigen::VectorXd dist2(m);
  for (Eigen::Index j = 0; j < m; ++j) dist2[j] = (map.train_coords.col(j) - phi).squaredNorm();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return dist2[a] < dist2[b]; });
  Eigen::VectorXd out = Eigen::VectorXd::Zero(map.dual.rows());
  for (Eigen::Index n = 0; n < map.neighbors; ++n) {
    const Eigen::Index j = order[static_cast<std::size_t>(n)];
    out += kvec[j] * map.dual.col(j);
  }
  return out;
}

Eigen::MatrixXd lift_apply_columns(const LiftMap& map, const Eigen::MatrixXd& coords) {
  if (map.kind == LiftKind::Ridge) {
    if (coords.rows() != map.K_lift.cols()) throw ShapeError("lift_apply: dimension mismatch");
    return map.K_lift * coords;
  }
  Eigen::MatrixXd out(map.output_dim(), coords.cols());
  for (Eigen::Index j = 0; j < coords.cols(); ++j) out.col(j) = lift_apply(map, coords.col(j));
  return out;
}

}  // namespace pmd
