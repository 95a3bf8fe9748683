#include "pmd/predict_linear.hpp"

#include "pmd/errors.hpp"
#include "ridge.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace pmd {

namespace {

using cplx = std::complex<double>;

cplx int_pow(cplx base, Eigen::Index exponent) {
  cplx result(1.0, 0.0);
  while (exponent > 0) {
    if (exponent & 1) result *= base;
    base *= base;
    exponent >>= 1;
  }
  return result;
}

}  // namespace

LinearPredictor LinearPredictor::zero(Eigen::Index r, Eigen::Index anchor) {
  LinearPredictor p;
  p.A1 = Eigen::MatrixXd::Zero(r, r);
  p.modes = Eigen::MatrixXcd::Identity(r, r);
  p.eigenvalues = Eigen::VectorXcd::Zero(r);
  p.amplitudes = Eigen::VectorXcd::Zero(r);
  p.anchor_index = anchor;
  return p;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> split_sequential(const Eigen::MatrixXd& coords) {
  if (coords.cols() < 2) throw ShapeError("split_sequential: need at least two time levels");
  const Eigen::Index n = coords.cols() - 1;
  return {coords.leftCols(n), coords.rightCols(n)};
}

Eigen::MatrixXd fit_operator(const Eigen::MatrixXd& current, const Eigen::MatrixXd& next,
                             double lambda) {
  if (current.rows() != next.rows())
    throw ShapeError("fit_operator: sequential and shifted matrices differ in row count");
  return detail::ridge_solve(current, next, lambda, "fit_operator");
}

SpectralModes spectral_modes(const Eigen::MatrixXd& A1) {
  if (A1.rows() != A1.cols()) throw ShapeError("spectral_modes: operator must be square");
  if (!A1.allFinite()) throw NumericalError("spectral_modes: operator has non-finite entries");
  const Eigen::Index r = A1.rows();
  Eigen::EigenSolver<Eigen::MatrixXd> es(A1, true);
  if (es.info() != Eigen::Success) throw NumericalError("spectral_modes: eigensolver failed");

  const Eigen::VectorXcd values = es.eigenvalues();
  const Eigen::MatrixXcd vectors = es.eigenvectors();
  const double tol = 1e-12 * std::max(1.0, values.cwiseAbs().maxCoeff());

  auto before = [&](Eigen::Index a, Eigen::Index b) {
    const cplx da = values[a];
    const cplx db = values[b];
    if (std::abs(std::abs(da) - std::abs(db)) > tol) return std::abs(da) > std::abs(db);
    if (std::abs(da.real() - db.real()) > tol) return da.real() > db.real();
    return da.imag() > db.imag();
  };
  // Insertion sort: the tolerance-based comparison is not a strict weak order.
  std::vector<Eigen::Index> order;
  for (Eigen::Index j = 0; j < r; ++j) {
    auto pos = order.begin();
    while (pos != order.end() && !before(j, *pos)) ++pos;
    order.insert(pos, j);
  }

  SpectralModes out;
  out.modes.resize(r, r);
  out.eigenvalues.resize(r);
  for (Eigen::Index j = 0; j < r; ++j) {
    const Eigen::Index src = order[static_cast<std::size_t>(j)];
    out.eigenvalues[j] = values[src];
    Eigen::VectorXcd z = vectors.col(src).normalized();
    Eigen::Index pivot = 0;
    z.cwiseAbs().maxCoeff(&pivot);
    z *= std::conj(z[pivot]) / std::abs(z[pivot]);
    z[pivot] = cplx(z[pivot].real(), 0.0);
    out.modes.col(j) = z;
  }
  for (Eigen::Index j = 0; j + 1 < r; ++j) {
    const cplx d = out.eigenvalues[j];
    if (d.imag() > tol && std::abs(out.eigenvalues[j + 1] - std::conj(d)) <= 1e-9 * std::max(1.0, std::abs(d))) {
      out.eigenvalues[j + 1] = std::conj(d);
      out.modes.col(j + 1) = out.modes.col(j).conjugate();
      ++j;
    }
  }
  for (Eigen::Index j = 0; j < r; ++j) {
    if (out.eigenvalues[j].imag() == 0.0) out.modes.col(j) = out.modes.col(j).real().cast<cplx>();
  }
  return out;
}

Eigen::VectorXcd amplitudes(const Eigen::MatrixXcd& modes, const Eigen::VectorXd& anchor,
                            double lambda) {
  if (modes.rows() != anchor.size()) throw ShapeError("amplitudes: anchor has the wrong length");
  if (!(lambda >= 0.0)) throw ConfigError("amplitudes: lambda must be >= 0");
  Eigen::MatrixXcd gram = modes.adjoint() * modes;
  gram.diagonal().array() += lambda;
  const Eigen::VectorXcd rhs = modes.adjoint() * anchor.cast<cplx>();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(gram);
  if (qr.rank() < gram.rows())
    throw NumericalError("amplitudes: mode Gram matrix is singular; use lambda > 0");
  Eigen::VectorXcd b = qr.solve(rhs);
  if (!b.allFinite()) throw NumericalError("amplitudes: non-finite solution");
  return b;
}

LinearPredictor fit_linear_predictor(const Eigen::MatrixXd& coords, double lambda,
                                     Eigen::Index anchor) {
  if (anchor < 0 || anchor >= coords.cols())
    throw ShapeError("fit_linear_predictor: anchor index outside the training window");
  auto [current, next] = split_sequential(coords);
  LinearPredictor p;
  p.lambda = lambda;
  p.anchor_index = anchor;
  p.A1 = fit_operator(current, next, lambda);
  SpectralModes sm = spectral_modes(p.A1);
  p.modes = std::move(sm.modes);
  p.eigenvalues = std::move(sm.eigenvalues);
  p.amplitudes = amplitudes(p.modes, coords.col(anchor), lambda);
  return p;
}

Eigen::VectorXd predict(const LinearPredictor& predictor, Eigen::Index steps_ahead) {
  if (steps_ahead < 0) throw ShapeError("predict: steps ahead must be >= 0");
  const Eigen::Index r = predictor.rank();
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(r);
  for (Eigen::Index j = 0; j < r; ++j) {
    acc += (predictor.amplitudes[j] * int_pow(predictor.eigenvalues[j], steps_ahead)) *
           predictor.modes.col(j);
  }
  if (!acc.allFinite()) {
    throw DataError("linear prediction overflowed at " + std::to_string(steps_ahead) +
                    " steps ahead");
  }
  const double re = acc.real().cwiseAbs().maxCoeff();
  const double im = acc.imag().cwiseAbs().maxCoeff();
  if (im > 1e-8 * re && im > 1e-300) {
    throw NumericalError("linear prediction has imaginary residue " + std::to_string(im));
  }
  return acc.real();
}

Eigen::MatrixXd predict_range(const LinearPredictor& predictor, Eigen::Index first,
                              Eigen::Index count) {
  Eigen::MatrixXd out(predictor.rank(), count);
  for (Eigen::Index k = 0; k < count; ++k) out.col(k) = predict(predictor, first + k);
  return out;
}

}  // namespace pmd
