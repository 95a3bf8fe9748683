#pragma once

#include <Eigen/Dense>

namespace pmd {

/// Symmetric kNN graph over snapshot columns. Finite entries are edge lengths,
/// +inf marks non-edges; the diagonal is zero.
struct DistanceGraph {
  Eigen::MatrixXd dist;
  Eigen::Index k = 0;
};

struct TransitionMatrix {
  Eigen::MatrixXd P;        // row-stochastic
  Eigen::VectorXd degrees;  // row sums of the similarity matrix
};

/// Nontrivial spectrum of a Markov operator and the t-step diffusion
/// coordinates built from it.
struct ManifoldEmbedding {
  Eigen::VectorXd eigenvalues;    // retained, descending, trivial pair excluded
  Eigen::MatrixXd eigenvectors;   // m x r, phi_j^T diag(deg) phi_k = delta_jk
  Eigen::VectorXd full_spectrum;  // all m-1 nontrivial eigenvalues, descending
  Eigen::MatrixXd coords;         // r x m, coords(j, i) = lambda_j^t phi_j(i)
  int t = 1;
  double bandwidth = 0.0;
  double trivial_eigenvalue = 1.0;   // lambda_0 as verified
  double trivial_residual = 0.0;     // ||P 1 - 1||_inf

  Eigen::Index rank() const { return eigenvalues.size(); }
};

/// Pairwise Euclidean distances between the columns of X.
Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& points);

/// Edge (i, j) iff j is among the k nearest columns of i or vice versa.
/// Throws GraphError (detail = component count) when disconnected.
DistanceGraph knn_distance_graph(const Eigen::MatrixXd& residuals, Eigen::Index k);

/// Default neighbor count max(2, ceil(log2 m)), capped at m - 1.
Eigen::Index default_knn(Eigen::Index m);

/// All-pairs shortest paths by the Floyd-Warshall recurrence.
Eigen::MatrixXd floyd_warshall(const DistanceGraph& graph);

/// W(i, j) = exp(-D(i, j)^2 / eps^2).
Eigen::MatrixXd gaussian_weights(const Eigen::MatrixXd& distances, double bandwidth);

/// Median of the strictly upper triangle of a distance matrix.
double median_bandwidth(const Eigen::MatrixXd& distances);

TransitionMatrix transition_matrix(const Eigen::MatrixXd& weights);

/// Eigenpairs of P through S = D^{1/2} P D^{-1/2}. The trivial pair
/// (1, constant) is checked and split off before the top r are kept.
ManifoldEmbedding spectral_embedding(const TransitionMatrix& transition, int t, Eigen::Index r);

/// argmax_j (lambda_j^t - lambda_{j+1}^t), returned as a 1-based rank;
/// ties go to the smallest j.
Eigen::Index spectral_gap_rank(const Eigen::VectorXd& eigenvalues, int t);

/// Symmetric eigendecomposition of D^{1/2} P D^{-1/2}, every pair included,
/// descending. Columns of `vectors` are eigenvectors of P normalized so that
/// v^T diag(deg) v = 1.
struct MarkovSpectrum {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};
MarkovSpectrum markov_spectrum(const TransitionMatrix& transition);

/// Flips each column so its first significant entry is positive.
void fix_column_signs(Eigen::MatrixXd& columns);

}  // namespace pmd
