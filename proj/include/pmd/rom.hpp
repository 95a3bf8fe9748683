#pragma once

#include "pmd/lift.hpp"
#include "pmd/linear_reduce.hpp"
#include "pmd/manifold.hpp"
#include "pmd/predict_linear.hpp"
#include "pmd/predict_nonlinear.hpp"
#include "pmd/snapshot.hpp"

#include <Eigen/Dense>

#include <map>
#include <string>

namespace pmd {

struct ManifoldRank {
  enum class Kind { Fixed, SpectralGap };
  Kind kind = Kind::Fixed;
  Eigen::Index rank = 2;
};

/// Every tunable of the pipeline. Zero for knn_graph, bandwidth and
/// phi_bandwidth selects the automatic choice (log2 rule, median distance).
struct PmdConfig {
  RankCriterion linear_rank = RankCriterion::fixed(4);
  ManifoldRank manifold_rank;
  int t = 1;
  Eigen::Index knn_graph = 0;
  double bandwidth = 0.0;
  LiftKind lift = LiftKind::KernelRidge;
  double lift_lambda = 1e-6;
  double lift_offset = 1.0;
  int lift_degree = 3;
  Eigen::Index lift_neighbors = 0;
  double lambda_dmd = 0.0;
  double lambda_w = 1e-8;
  Eigen::Index harmonics = 20;
  NormMode normalization = NormMode::PerRow;
  double energy_target = 0.95;
  NonlinearMode nonlinear_mode = NonlinearMode::Harmonic;
  double phi_bandwidth = 0.0;

  /// Throws ConfigError on any out-of-range field.
  void validate() const;
};

/// Flat key=value view of a config, the format of config files and of the
/// model manifest.
std::map<std::string, std::string> config_to_map(const PmdConfig& cfg);
/// Sets one field; unknown keys and malformed values raise ConfigError.
void apply_config_value(PmdConfig& cfg, const std::string& key, const std::string& value);
PmdConfig config_from_map(const std::map<std::string, std::string>& values);
/// Parses `key = value` lines with '#' comments.
std::map<std::string, std::string> parse_config_text(const std::string& text);

struct Provenance {
  std::string input_sha256;
  std::string created_at;
  std::string tool_version;
};

struct PmdModel {
  PmdConfig config;
  NormalizationStats stats;
  LinearReduction linear;
  ManifoldEmbedding manifold;
  LiftMap lift;
  LinearPredictor linear_predictor;
  NonlinearPredictor nonlinear_predictor;
  Provenance provenance;
  Eigen::Index dofs = 0;
  Eigen::Index steps = 0;
  double dt = 1.0;
  double t0 = 0.0;
  Eigen::Index knn_used = 0;
  bool manifold_degenerate = false;

  Eigen::Index linear_rank() const { return linear.rank(); }
  Eigen::Index manifold_rank() const { return manifold.rank(); }

  /// Throws ShapeError when component shapes disagree.
  void check_consistency() const;
};

const char* library_version();

/// SHA-256 of the snapshot payload (f64 encoding, then dt and t0).
std::string snapshot_digest(const SnapshotMatrix& snapshots);

/// normalize -> SVD -> residual -> kNN graph -> geodesics -> Gaussian weights
/// -> Markov matrix -> embedding -> lift -> linear and nonlinear predictors.
/// provenance.created_at is left empty.
PmdModel fit(const SnapshotMatrix& snapshots, const PmdConfig& cfg);

/// State at training time index i (0-based), original units.
Eigen::VectorXd reconstruct(const PmdModel& model, Eigen::Index index);
/// Every training column.
Eigen::MatrixXd reconstruct_all(const PmdModel& model);

/// States at time indices m..m+steps-1, original units.
Eigen::MatrixXd predict(const PmdModel& model, Eigen::Index steps);

// The POD baseline shares the truncated SVD and the linear predictor, without
// the manifold correction.
Eigen::MatrixXd pod_reconstruct_all(const PmdModel& model);
Eigen::MatrixXd pod_predict(const PmdModel& model, Eigen::Index steps);

/// Linear energy of the first r modes plus the manifold share of the
/// remaining linear energy. `manifold` holds eigenvalue magnitudes.
double pmd_energy(const Eigen::VectorXd& linear, const Eigen::VectorXd& manifold, Eigen::Index r);

struct RankSelection {
  Eigen::Index rank = 1;
  bool reached = true;  // false when no rank meets the target
};
RankSelection select_rank(const Eigen::VectorXd& linear, const Eigen::VectorXd& manifold,
                          double target);

/// |lambda_j^t| over the full nontrivial manifold spectrum.
Eigen::VectorXd manifold_energy_spectrum(const ManifoldEmbedding& embedding);

struct ErrorReport {
  double relative_frobenius = 0.0;
  Eigen::VectorXd relative_l2;  // per time step
  Eigen::VectorXd max_abs;      // per time step
  double max_abs_error = 0.0;
};

ErrorReport error_report(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& approx);
/// Columns step,relative_l2,max_abs_error plus a final `total` row.
void write_error_report(const std::string& path, const ErrorReport& report);

}  // namespace pmd
