#include "pmd/rom.hpp"

#include "hash.hpp"
#include "pmd/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <vector>

#ifndef PMD_VERSION
#define PMD_VERSION "0.0.0"
#endif

namespace pmd {

namespace {

// Relative residual size below which the manifold branch is treated as empty.
constexpr double kDegenerateResidual = 1e-10;

std::vector<Eigen::Index> index_range(Eigen::Index first, Eigen::Index count) {
  std::vector<Eigen::Index> out(static_cast<std::size_t>(count));
  std::iota(out.begin(), out.end(), first);
  return out;
}

LiftMap zero_lift(const PmdConfig& cfg, Eigen::Index n, Eigen::Index r, Eigen::Index m) {
  LiftMap map;
  map.kind = cfg.lift;
  map.lambda = cfg.lift_lambda;
  map.offset = cfg.lift_offset;
  map.degree = cfg.lift_degree;
  map.neighbors = cfg.lift_neighbors;
  if (cfg.lift == LiftKind::Ridge) {
    map.K_lift = Eigen::MatrixXd::Zero(n, r);
  } else {
    map.train_coords = Eigen::MatrixXd::Zero(r, m);
    map.dual = Eigen::MatrixXd::Zero(n, m);
  }
  return map;
}

}  // namespace

const char* library_version() { return PMD_VERSION; }

std::string snapshot_digest(const SnapshotMatrix& snapshots) {
  std::vector<std::uint8_t> bytes = encode_f64(snapshots.data);
  const auto extra = encode_f64(Eigen::Vector2d(snapshots.dt, snapshots.t0));
  bytes.insert(bytes.end(), extra.begin(), extra.end());
  return detail::sha256_hex(bytes);
}

void PmdModel::check_consistency() const {
  const Eigen::Index r = linear.rank();
  const Eigen::Index q = manifold.rank();
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ShapeError(std::string("inconsistent model: ") + what);
  };
  require(linear.Qr.rows() == dofs && linear.Qr.cols() == r, "Qr shape");
  require(linear.Vr.rows() == steps && linear.Vr.cols() == r, "Vr shape");
  require(manifold.coords.rows() == q && manifold.coords.cols() == steps, "embedding shape");
  require(manifold.eigenvectors.rows() == steps, "embedding eigenvectors");
  require(lift.input_dim() == q && lift.output_dim() == dofs, "lift shape");
  require(linear_predictor.rank() == r, "linear predictor rank");
  require(nonlinear_predictor.one_step.rows() == q &&
              nonlinear_predictor.train_coords.cols() == steps,
          "nonlinear predictor shape");
  require(nonlinear_predictor.coefficients.cols() == nonlinear_predictor.basis.size(),
          "harmonic coefficients");
  const Eigen::Index stat_len = stats.mode == NormMode::PerSnapshot ? steps
                                : stats.mode == NormMode::PerRow  ? dofs
                                                                  : 1;
  require(stats.means.size() == stat_len && stats.stds.size() == stat_len, "normalization stats");
}

PmdModel fit(const SnapshotMatrix& snapshots, const PmdConfig& cfg) {
  cfg.validate();
  const Eigen::Index n = snapshots.data.rows();
  const Eigen::Index m = snapshots.data.cols();
  if (n < 1 || m < 2)
    throw ShapeError("fit: need at least one row and two time levels, got " + std::to_string(n) +
                     "x" + std::to_string(m));
  staged("input", [&] { snapshots.validate(); });

  const Eigen::Index full = std::min(n, m);
  if (cfg.linear_rank.kind == RankCriterion::Kind::FixedRank &&
      (cfg.linear_rank.rank > full || cfg.linear_rank.rank + 1 > m)) {
    throw ShapeError("fit: r_linear = " + std::to_string(cfg.linear_rank.rank) +
                     " is too large for a " + std::to_string(n) + "x" + std::to_string(m) +
                     " snapshot matrix");
  }
  if (cfg.manifold_rank.kind == ManifoldRank::Kind::Fixed && cfg.manifold_rank.rank + 1 > m) {
    throw ShapeError("fit: r_manifold = " + std::to_string(cfg.manifold_rank.rank) +
                     " needs at least " + std::to_string(cfg.manifold_rank.rank + 1) +
                     " time levels");
  }

  PmdModel model;
  model.config = cfg;
  model.dofs = n;
  model.steps = m;
  model.dt = snapshots.dt;
  model.t0 = snapshots.t0;
  model.provenance.input_sha256 = snapshot_digest(snapshots);
  model.provenance.tool_version = library_version();

  Normalized normalized = staged("normalize", [&] { return normalize(snapshots.data, cfg.normalization); });
  model.stats = normalized.stats;
  const Eigen::MatrixXd& U = normalized.values;
  const double u_norm = U.norm();

  model.linear = staged("svd", [&] {
    return u_norm == 0.0 ? zero_reduction(n, m) : svd_truncate(U, cfg.linear_rank);
  });
  Eigen::MatrixXd X = staged("residual", [&] { return residual(U, model.linear); });
  if (X.norm() <= kDegenerateResidual * u_norm) {
    X.setZero();
    model.manifold_degenerate = true;
  }

  const Eigen::Index k = cfg.knn_graph > 0 ? cfg.knn_graph : default_knn(m);
  model.knn_used = k;
  const Eigen::MatrixXd geodesic = staged("geodesic", [&] {
    return floyd_warshall(knn_distance_graph(X, k));
  });
  double eps = cfg.bandwidth > 0.0 ? cfg.bandwidth : median_bandwidth(geodesic);
  if (!(eps > 0.0) || !std::isfinite(eps)) eps = 1.0;
  const TransitionMatrix transition = staged("transition", [&] {
    return transition_matrix(gaussian_weights(geodesic, eps));
  });

  Eigen::Index q = cfg.manifold_rank.rank;
  if (cfg.manifold_rank.kind == ManifoldRank::Kind::SpectralGap) {
    const MarkovSpectrum spectrum = staged("embedding", [&] { return markov_spectrum(transition); });
    q = m >= 3 ? spectral_gap_rank(spectrum.values.tail(m - 1), cfg.t) : 1;
  }
  model.manifold = staged("embedding", [&] { return spectral_embedding(transition, cfg.t, q); });
  model.manifold.bandwidth = eps;
  if (model.manifold_degenerate) model.manifold.coords.setZero();
  const Eigen::MatrixXd& phi = model.manifold.coords;

  model.lift = staged("lift", [&] {
    if (model.manifold_degenerate) return zero_lift(cfg, n, q, m);
    return cfg.lift == LiftKind::Ridge
               ? fit_ridge(phi, X, cfg.lift_lambda)
               : fit_kernel_ridge(phi, X, cfg.lift_lambda, cfg.lift_offset, cfg.lift_degree,
                                  cfg.lift_neighbors);
  });

  const Eigen::MatrixXd coords = reduced_coordinates(model.linear);
  model.linear_predictor = staged("linear predictor", [&] {
    if (coords.cwiseAbs().maxCoeff() == 0.0) return LinearPredictor::zero(coords.rows(), m - 1);
    return fit_linear_predictor(coords, cfg.lambda_dmd, m - 1);
  });

  model.nonlinear_predictor = staged("nonlinear predictor", [&] {
    double eps_phi = cfg.phi_bandwidth > 0.0 ? cfg.phi_bandwidth : median_pairwise_distance(phi);
    if (!(eps_phi > 0.0) || !std::isfinite(eps_phi)) eps_phi = 1.0;
    const Eigen::Index count = std::min(cfg.harmonics, m);
    if (model.manifold_degenerate) {
      NonlinearPredictor p;
      p.mode = cfg.nonlinear_mode;
      p.lambda = cfg.lambda_w;
      p.train_coords = phi;
      p.one_step = Eigen::MatrixXd::Zero(q, q);
      p.basis = harmonic_basis(manifold_kernel(phi, eps_phi), count, eps_phi);
      p.coefficients = Eigen::MatrixXd::Zero(q, count);
      return p;
    }
    return fit_nonlinear_predictor(phi, cfg.lambda_w, count, eps_phi, cfg.nonlinear_mode);
  });

  model.check_consistency();
  return model;
}

Eigen::VectorXd reconstruct(const PmdModel& model, Eigen::Index index) {
  if (index < 0 || index >= model.steps) {
    throw ShapeError("reconstruct: time index " + std::to_string(index) +
                     " outside the training range [0, " + std::to_string(model.steps) + ")");
  }
  const Eigen::VectorXd coord = model.linear.Sr.cwiseProduct(model.linear.Vr.row(index).transpose());
  const Eigen::VectorXd state = model.linear.Qr * coord +
                                lift_apply(model.lift, model.manifold.coords.col(index));
  const Eigen::Index idx[] = {index};
  return denormalize(state, model.stats, idx);
}

Eigen::MatrixXd reconstruct_all(const PmdModel& model) {
  Eigen::MatrixXd out(model.dofs, model.steps);
  for (Eigen::Index i = 0; i < model.steps; ++i) out.col(i) = reconstruct(model, i);
  return out;
}

Eigen::MatrixXd pod_reconstruct_all(const PmdModel& model) {
  const Eigen::MatrixXd state = model.linear.Qr * reduced_coordinates(model.linear);
  const auto idx = index_range(0, model.steps);
  return denormalize(state, model.stats, idx);
}

namespace {

void require_predictable(const PmdModel& model, Eigen::Index steps) {
  if (steps < 1) throw ShapeError("predict: steps must be >= 1");
  if (model.stats.mode == NormMode::PerSnapshot) {
    throw ModeError("predict: per-snapshot normalization cannot be inverted at future times; "
                    "refit with normalization = global or per_row");
  }
}

Eigen::MatrixXd linear_part(const PmdModel& model, Eigen::Index steps) {
  const Eigen::Index lead = model.steps - 1 - model.linear_predictor.anchor_index;
  return model.linear.Qr * predict_range(model.linear_predictor, lead + 1, steps);
}

}  // namespace

Eigen::MatrixXd predict(const PmdModel& model, Eigen::Index steps) {
  require_predictable(model, steps);
  Eigen::MatrixXd state = linear_part(model, steps);
  const Eigen::MatrixXd future = rollout(model.nonlinear_predictor,
                                         model.manifold.coords.col(model.steps - 1), steps);
  state += lift_apply_columns(model.lift, future);
  const auto idx = index_range(model.steps, steps);
  return denormalize(state, model.stats, idx);
}

Eigen::MatrixXd pod_predict(const PmdModel& model, Eigen::Index steps) {
  require_predictable(model, steps);
  const auto idx = index_range(model.steps, steps);
  return denormalize(linear_part(model, steps), model.stats, idx);
}

double pmd_energy(const Eigen::VectorXd& linear, const Eigen::VectorXd& manifold, Eigen::Index r) {
  if (linear.size() == 0 || manifold.size() == 0)
    throw ShapeError("pmd_energy: spectra must be nonempty");
  if (r < 1 || r > linear.size() || r > manifold.size())
    throw ShapeError("pmd_energy: r = " + std::to_string(r) + " exceeds a spectrum length");
  const double lin_total = linear.squaredNorm();
  if (lin_total == 0.0) throw DataError("pmd_energy: linear spectrum is identically zero");
  const double captured = linear.head(r).squaredNorm() / lin_total;
  const double remaining = linear.tail(linear.size() - r).squaredNorm() / lin_total;
  const double man_total = manifold.squaredNorm();
  const double share = man_total == 0.0 ? 0.0 : manifold.head(r).squaredNorm() / man_total;
  return captured + share * remaining;
}

RankSelection select_rank(const Eigen::VectorXd& linear, const Eigen::VectorXd& manifold,
                          double target) {
  if (!(target > 0.0 && target < 1.0)) throw ConfigError("select_rank: target must lie in (0, 1)");
  const Eigen::Index limit = std::min(linear.size(), manifold.size());
  for (Eigen::Index r = 1; r <= limit; ++r)
    if (pmd_energy(linear, manifold, r) >= target) return {r, true};
  return {limit, false};
}

Eigen::VectorXd manifold_energy_spectrum(const ManifoldEmbedding& embedding) {
  Eigen::VectorXd out(embedding.full_spectrum.size());
  for (Eigen::Index j = 0; j < out.size(); ++j)
    out[j] = std::abs(std::pow(embedding.full_spectrum[j], embedding.t));
  return out;
}

ErrorReport error_report(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& approx) {
  if (truth.rows() != approx.rows() || truth.cols() != approx.cols()) {
    throw ShapeError("error_report: truth is " + std::to_string(truth.rows()) + "x" +
                     std::to_string(truth.cols()) + ", approximation " +
                     std::to_string(approx.rows()) + "x" + std::to_string(approx.cols()));
  }
  auto relative = [](double err, double ref) {
    if (ref > 0.0) return err / ref;
    return err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  };
  const Eigen::MatrixXd diff = approx - truth;
  ErrorReport report;
  report.relative_frobenius = relative(diff.norm(), truth.norm());
  report.relative_l2.resize(truth.cols());
  report.max_abs.resize(truth.cols());
  for (Eigen::Index j = 0; j < truth.cols(); ++j) {
    report.relative_l2[j] = relative(diff.col(j).norm(), truth.col(j).norm());
    report.max_abs[j] = diff.col(j).cwiseAbs().maxCoeff();
  }
  report.max_abs_error = diff.size() ? diff.cwiseAbs().maxCoeff() : 0.0;
  return report;
}

void write_error_report(const std::string& path, const ErrorReport& report) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  char buf[64];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  out << "step,relative_l2,max_abs_error\n";
  for (Eigen::Index j = 0; j < report.relative_l2.size(); ++j)
    out << j + 1 << ',' << fmt(report.relative_l2[j]) << ',' << fmt(report.max_abs[j]) << '\n';
  out << "total," << fmt(report.relative_frobenius) << ',' << fmt(report.max_abs_error) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace pmd
