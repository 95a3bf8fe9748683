#include "pmd/manifold.hpp"

#include "pmd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>
#include <vector>

namespace pmd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::Index count_components(const Eigen::MatrixXd& dist) {
  const Eigen::Index m = dist.rows();
  std::vector<bool> seen(static_cast<std::size_t>(m), false);
  Eigen::Index components = 0;
  for (Eigen::Index s = 0; s < m; ++s) {
    if (seen[static_cast<std::size_t>(s)]) continue;
    ++components;
    std::queue<Eigen::Index> frontier;
    frontier.push(s);
    seen[static_cast<std::size_t>(s)] = true;
    while (!frontier.empty()) {
      const Eigen::Index u = frontier.front();
      frontier.pop();
      for (Eigen::Index v = 0; v < m; ++v) {
        if (!seen[static_cast<std::size_t>(v)] && std::isfinite(dist(u, v))) {
          seen[static_cast<std::size_t>(v)] = true;
          frontier.push(v);
        }
      }
    }
  }
  return components;
}

struct SplitSpectrum {
  double trivial_value = 1.0;
  Eigen::VectorXd trivial_vector;  // eigenvector of P, degree-normalized
  Eigen::VectorXd values;          // nontrivial, descending
  Eigen::MatrixXd vectors;         // eigenvectors of P, degree-normalized
  double trivial_residual = 0.0;
};

// The trivial eigenvector of S is known in closed form (sqrt of degrees), so
// the rest of the spectrum is taken on its orthogonal complement. This keeps
// the split exact even when eigenvalue 1 is repeated.
SplitSpectrum split_spectrum(const TransitionMatrix& transition) {
  const Eigen::MatrixXd& P = transition.P;
  const Eigen::Index m = P.rows();
  if (P.cols() != m || transition.degrees.size() != m)
    throw ShapeError("transition matrix and degree vector disagree in size");
  if ((transition.degrees.array() <= 0.0).any())
    throw DataError("transition matrix has a nonpositive degree");

  const Eigen::ArrayXd sqrt_deg = transition.degrees.array().sqrt();
  Eigen::MatrixXd S = sqrt_deg.matrix().asDiagonal() * P * sqrt_deg.inverse().matrix().asDiagonal();
  S = (0.5 * (S + S.transpose())).eval();

  SplitSpectrum out;
  const Eigen::VectorXd psi0 = sqrt_deg.matrix().normalized();
  out.trivial_value = psi0.dot(S * psi0);
  out.trivial_residual = (P * Eigen::VectorXd::Ones(m) - Eigen::VectorXd::Ones(m)).cwiseAbs().maxCoeff();
  if (std::abs(out.trivial_value - 1.0) > 1e-8 || out.trivial_residual > 1e-8) {
    throw NumericalError("transition matrix does not have the trivial eigenpair (1, constant): "
                         "lambda_0 = " + std::to_string(out.trivial_value));
  }
  out.trivial_vector = (psi0.array() / sqrt_deg).matrix();

  if (m == 1) {
    out.values.resize(0);
    out.vectors.resize(1, 0);
    return out;
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(psi0);
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(m, m);
  const Eigen::MatrixXd basis = Q.rightCols(m - 1);
  Eigen::MatrixXd T = basis.transpose() * S * basis;
  T = (0.5 * (T + T.transpose())).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(T);
  if (eig.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");
  out.values = eig.eigenvalues().reverse();
  const Eigen::MatrixXd psi = basis * eig.eigenvectors().rowwise().reverse();
  out.vectors = sqrt_deg.inverse().matrix().asDiagonal() * psi;
  fix_column_signs(out.vectors);
  return out;
}

}  // namespace

void fix_column_signs(Eigen::MatrixXd& columns) {
  for (Eigen::Index j = 0; j < columns.cols(); ++j) {
    const double tol = 1e-12 * columns.col(j).norm();
    for (Eigen::Index i = 0; i < columns.rows(); ++i) {
      if (std::abs(columns(i, j)) > tol) {
        if (columns(i, j) < 0.0) columns.col(j) *= -1.0;
        break;
      }
    }
  }
}

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points) {
  const Eigen::Index m = points.cols();
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = j + 1; i < m; ++i) {
      const double d = (points.col(i) - points.col(j)).norm();
      dist(i, j) = d;
      dist(j, i) = d;
    }
  return dist;
}

Eigen::Index default_knn(Eigen::Index m) {
  const auto k = std::max<Eigen::Index>(2, static_cast<Eigen::Index>(std::ceil(std::log2(static_cast<double>(m)))));
  return std::min(k, m - 1);
}

DistanceGraph knn_distance_graph(const Eigen::MatrixXd& residuals, Eigen::Index k) {
  const Eigen::Index m = residuals.cols();
  if (k < 1 || k >= m) {
    throw ShapeError("knn_distance_graph: k = " + std::to_string(k) + " must lie in [1, " +
                     std::to_string(m - 1) + "]");
  }
  const Eigen::MatrixXd full = pairwise_distances(residuals);
  DistanceGraph graph;
  graph.k = k;
  graph.dist = Eigen::MatrixXd::Constant(m, m, kInf);
  graph.dist.diagonal().setZero();

  std::vector<Eigen::Index> order;
  for (Eigen::Index i = 0; i < m; ++i) {
    order.resize(static_cast<std::size_t>(m));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::erase(order, i);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return full(i, a) < full(i, b);
    });
    for (Eigen::Index n = 0; n < k; ++n) {
      const Eigen::Index j = order[static_cast<std::size_t>(n)];
      graph.dist(i, j) = full(i, j);
      graph.dist(j, i) = full(i, j);
    }
  }

  const Eigen::Index components = count_components(graph.dist);
  if (components > 1) {
    throw GraphError("kNN graph with k = " + std::to_string(k) + " has " +
                         std::to_string(components) + " connected components; increase k",
                     components);
  }
  return graph;
}

Eigen::MatrixXd floyd_warshall(const DistanceGraph& graph) {
  Eigen::MatrixXd D = graph.dist;
  const Eigen::Index m = D.rows();
  if (D.cols() != m) throw ShapeError("floyd_warshall: distance matrix must be square");
  if ((D.array() < 0.0).any()) throw GraphError("floyd_warshall: negative edge weight");

  // Column-major storage: iterate j outer, i inner.
  for (Eigen::Index k = 0; k < m; ++k) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double dkj = D(k, j);
      if (dkj == kInf) continue;
      for (Eigen::Index i = 0; i < m; ++i) {
        const double through = D(i, k) + dkj;
        if (through < D(i, j)) D(i, j) = through;
      }
    }
  }
  if (!D.allFinite()) {
    throw GraphError("floyd_warshall: graph is disconnected", count_components(graph.dist));
  }
  return D;
}

Eigen::MatrixXd gaussian_weights(const Eigen::MatrixXd& distances, double bandwidth) {
  if (!(bandwidth > 0.0)) throw DataError("gaussian_weights: bandwidth must be positive");
  const double inv = 1.0 / (bandwidth * bandwidth);
  return (-(distances.array().square() * inv)).exp().matrix();
}

double median_bandwidth(const Eigen::MatrixXd& distances) {
  const Eigen::Index m = distances.rows();
  if (m < 2) throw ShapeError("median_bandwidth: need at least two points");
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(m * (m - 1) / 2));
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < j; ++i) values.push_back(distances(i, j));
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

TransitionMatrix transition_matrix(const Eigen::MatrixXd& weights) {
  if (weights.rows() != weights.cols()) throw ShapeError("transition_matrix: W must be square");
  if ((weights.array() < 0.0).any()) throw DataError("transition_matrix: negative weight");
  TransitionMatrix out;
  out.degrees = weights.rowwise().sum();
  for (Eigen::Index i = 0; i < out.degrees.size(); ++i) {
    if (!(out.degrees[i] > 0.0))
      throw DataError("transition_matrix: row " + std::to_string(i) + " has zero weight");
  }
  out.P = out.degrees.cwiseInverse().asDiagonal() * weights;
  return out;
}

MarkovSpectrum markov_spectrum(const TransitionMatrix& transition) {
  SplitSpectrum split = split_spectrum(transition);
  const Eigen::Index m = transition.P.rows();
  MarkovSpectrum out;
  out.values.resize(m);
  out.vectors.resize(m, m);
  out.values[0] = split.trivial_value;
  out.values.tail(m - 1) = split.values;
  out.vectors.col(0) = split.trivial_vector;
  out.vectors.rightCols(m - 1) = split.vectors;
  return out;
}

ManifoldEmbedding spectral_embedding(const TransitionMatrix& transition, int t, Eigen::Index r) {
  const Eigen::Index m = transition.P.rows();
  if (t < 1) throw ShapeError("spectral_embedding: t must be >= 1");
  if (r < 1 || r >= m) {
    throw ShapeError("spectral_embedding: r = " + std::to_string(r) + " must lie in [1, " +
                     std::to_string(m - 1) + "]");
  }
  SplitSpectrum split = split_spectrum(transition);

  ManifoldEmbedding out;
  out.t = t;
  out.trivial_eigenvalue = split.trivial_value;
  out.trivial_residual = split.trivial_residual;
  out.full_spectrum = split.values;
  out.eigenvalues = split.values.head(r);
  out.eigenvectors = split.vectors.leftCols(r);
  out.coords.resize(r, m);
  for (Eigen::Index j = 0; j < r; ++j) {
    const double scale = std::pow(out.eigenvalues[j], t);
    out.coords.row(j) = scale * out.eigenvectors.col(j).transpose();
  }
  return out;
}

Eigen::Index spectral_gap_rank(const Eigen::VectorXd& eigenvalues, int t) {
  if (eigenvalues.size() < 2) throw ShapeError("spectral_gap_rank: need at least two eigenvalues");
  Eigen::Index best = 0;
  double best_gap = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j + 1 < eigenvalues.size(); ++j) {
    const double gap = std::pow(eigenvalues[j], t) - std::pow(eigenvalues[j + 1], t);
    if (gap > best_gap) {
      best_gap = gap;
      best = j;
    }
  }
  return best + 1;
}

}  // namespace pmd
