#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace pmd {

struct RateEstimate {
  std::string experiment;
  std::vector<Eigen::Index> sample_sizes;
  Eigen::VectorXd errors;      // mean over trials
  Eigen::VectorXd std_errors;  // sample standard deviation over trials
  double fitted_slope = 0.0;
  double theoretical_slope = 0.0;
  double slope_ci = 0.0;  // half-width of the 95% interval
  double band = 0.15;     // accepted |fitted - theoretical|
  int trials = 0;

  bool pass() const;
  /// Throws DataError if sizes are not increasing, fewer than 4, or errors
  /// are not finite and positive.
  void validate() const;
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci = 0.0;
};

/// Ordinary least squares of log(errors) against log(sizes).
SlopeFit fit_log_slope(const std::vector<Eigen::Index>& sizes, const Eigen::VectorXd& errors);

/// 100, 200, ..., doubling `count` times from `first`.
std::vector<Eigen::Index> doubling_sizes(Eigen::Index first, int count);

/// Spectral-norm error of the sample covariance of N(0, I_n).
RateEstimate covariance_rate(Eigen::Index n, const std::vector<Eigen::Index>& ms, int trials,
                             std::uint64_t seed);

/// Leading eigenvalue and sign-aligned eigenvector errors for N(0, diag(spectrum)).
std::pair<RateEstimate, RateEstimate> eigen_rate(const Eigen::VectorXd& spectrum,
                                                 const std::vector<Eigen::Index>& ms, int trials,
                                                 std::uint64_t seed);

/// Mean sign-aligned leading-eigenvector error at a single sample size.
double eigenvector_error(const Eigen::VectorXd& spectrum, Eigen::Index m, int trials,
                         std::uint64_t seed);

/// Gaussian kernel density estimate at `point`; samples are d x m columns.
double kde_at(const Eigen::MatrixXd& samples, const Eigen::VectorXd& point, double bandwidth);

/// Mean squared KDE error at fixed probes for a standard normal in d = 1 or 2.
RateEstimate kde_rate(int d, const std::vector<Eigen::Index>& ms, int trials, std::uint64_t seed);

/// Markov averaging on the unit circle with a Gaussian kernel in the plane:
/// sum_i k(x, x_i) f(x_i) / sum_i k(x, x_i).
double circle_markov_apply(const Eigen::VectorXd& angles, double probe, double bandwidth,
                           const std::function<double(double)>& f);
/// The same operator under the uniform density, by periodic trapezoid rule.
double circle_markov_continuum(double probe, double bandwidth,
                               const std::function<double(double)>& f, int nodes = 4096);

RateEstimate operator_rate(const std::vector<Eigen::Index>& ms, int trials, std::uint64_t seed,
                           double bandwidth = 0.5,
                           const std::function<double(double)>& f = [](double x) {
                             return std::cos(x);
                           });

/// Diffusion distance between samples a and b from the first `rank`
/// nontrivial eigenpairs of the circle Markov matrix; rank < 0 uses all.
/// Eigenvectors are normalized against the stationary distribution.
double circle_diffusion_distance(const Eigen::VectorXd& angles, Eigen::Index a, Eigen::Index b,
                                 double bandwidth, int t, Eigen::Index rank);

struct DistancePlan {
  double bandwidth = 0.5;
  int t = 1;
  Eigen::Index rank = 4;
  double probe_a = 0.0;
  double probe_b = 1.5707963267948966;
};

/// Deviation of the probe-pair diffusion distance from a single reference run
/// at four times the largest sample size.
RateEstimate manifold_distance_rate(const std::vector<Eigen::Index>& ms, int trials,
                                    std::uint64_t seed, const DistancePlan& plan = {});

/// Mean |D_full - D_rank| over trials at a fixed sample size, per rank.
Eigen::VectorXd distance_truncation_gaps(Eigen::Index m, const std::vector<Eigen::Index>& ranks,
                                         int trials, std::uint64_t seed,
                                         const DistancePlan& plan = {});

/// Experiment names accepted by run_experiment.
const std::vector<std::string>& experiment_names();
/// Runs a named experiment with its default plan.
std::vector<RateEstimate> run_experiment(const std::string& name, std::uint64_t seed);

/// Columns m,mean_error,std_error.
void write_rate_csv(const std::filesystem::path& path, const RateEstimate& estimate);
/// Columns experiment,theoretical_slope,fitted_slope,ci,pass.
void write_summary_csv(const std::filesystem::path& path, const std::vector<RateEstimate>& rows);

}  // namespace pmd
