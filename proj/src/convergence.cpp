#include "pmd/convergence.hpp"

#include "pmd/errors.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

namespace pmd {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Per-trial values for one sample size, reduced to mean and sample std.
struct Moments {
  double mean = 0.0;
  double std = 0.0;
};

Moments moments(const std::vector<double>& values) {
  Moments out;
  const double n = static_cast<double>(values.size());
  for (double v : values) out.mean += v;
  out.mean /= n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / (n - 1.0));
  }
  return out;
}

RateEstimate make_estimate(std::string name, const std::vector<Eigen::Index>& ms,
                           const std::vector<Moments>& stats, double theoretical, double band,
                           int trials) {
  RateEstimate est;
  est.experiment = std::move(name);
  est.sample_sizes = ms;
  est.errors.resize(static_cast<Eigen::Index>(ms.size()));
  est.std_errors.resize(est.errors.size());
  for (std::size_t i = 0; i < ms.size(); ++i) {
    est.errors[static_cast<Eigen::Index>(i)] = stats[i].mean;
    est.std_errors[static_cast<Eigen::Index>(i)] = stats[i].std;
  }
  est.theoretical_slope = theoretical;
  est.band = band;
  est.trials = trials;
  est.validate();
  const SlopeFit fit = fit_log_slope(ms, est.errors);
  est.fitted_slope = fit.slope;
  est.slope_ci = fit.ci;
  return est;
}

void check_plan(const std::vector<Eigen::Index>& ms, int trials) {
  if (ms.size() < 4) throw ConfigError("convergence: need at least 4 sample sizes");
  if (trials < 1) throw ConfigError("convergence: trials must be >= 1");
}

Eigen::MatrixXd gaussian_samples(std::mt19937_64& rng, const Eigen::VectorXd& scale,
                                 Eigen::Index m) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(scale.size(), m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < scale.size(); ++i) x(i, j) = scale[i] * normal(rng);
  return x;
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& x) {
  return x * x.transpose() / static_cast<double>(x.cols());
}

Eigen::VectorXd circle_angles(std::mt19937_64& rng, Eigen::Index m, const DistancePlan& plan) {
  std::uniform_real_distribution<double> uniform(0.0, kTwoPi);
  Eigen::VectorXd angles(m);
  angles[0] = plan.probe_a;
  angles[1] = plan.probe_b;
  for (Eigen::Index i = 2; i < m; ++i) angles[i] = uniform(rng);
  return angles;
}

double chord_sq(double a, double b) { return 2.0 - 2.0 * std::cos(a - b); }

// Nontrivial eigenpairs of the circle Markov matrix, descending, with
// eigenvectors normalized against the stationary distribution.
std::pair<Eigen::VectorXd, Eigen::MatrixXd> circle_spectrum(const Eigen::VectorXd& angles,
                                                            double bandwidth) {
  const Eigen::Index m = angles.size();
  Eigen::MatrixXd w(m, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < m; ++i)
      w(i, j) = std::exp(-chord_sq(angles[i], angles[j]) / (bandwidth * bandwidth));
  const Eigen::VectorXd deg = w.rowwise().sum();
  const Eigen::VectorXd inv_sqrt = deg.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd s = inv_sqrt.asDiagonal() * w * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  if (eig.info() != Eigen::Success) throw NumericalError("circle spectrum failed to converge");
  const double scale = std::sqrt(deg.sum());
  Eigen::VectorXd values(m - 1);
  Eigen::MatrixXd vectors(m, m - 1);
  for (Eigen::Index j = 0; j < m - 1; ++j) {
    const Eigen::Index src = m - 2 - j;  // skip the top (trivial) pair
    values[j] = eig.eigenvalues()[src];
    vectors.col(j) = scale * inv_sqrt.cwiseProduct(eig.eigenvectors().col(src));
  }
  return {values, vectors};
}

double diffusion_distance(const Eigen::VectorXd& values, const Eigen::MatrixXd& vectors,
                          Eigen::Index a, Eigen::Index b, int t, Eigen::Index rank) {
  const Eigen::Index r = rank < 0 ? values.size() : std::min(rank, values.size());
  double sum = 0.0;
  for (Eigen::Index j = 0; j < r; ++j) {
    const double lt = std::pow(values[j], t);
    const double diff = vectors(a, j) - vectors(b, j);
    sum += lt * lt * diff * diff;
  }
  return std::sqrt(sum);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

bool RateEstimate::pass() const {
  return std::abs(fitted_slope - theoretical_slope) <= band;
}

void RateEstimate::validate() const {
  if (sample_sizes.size() < 4) throw DataError("rate estimate needs at least 4 sample sizes");
  for (std::size_t i = 1; i < sample_sizes.size(); ++i)
    if (sample_sizes[i] <= sample_sizes[i - 1])
      throw DataError("sample sizes must be strictly increasing");
  if (errors.size() != static_cast<Eigen::Index>(sample_sizes.size()))
    throw ShapeError("one error per sample size required");
  for (Eigen::Index i = 0; i < errors.size(); ++i)
    if (!(std::isfinite(errors[i]) && errors[i] > 0.0))
      throw DataError("errors must be finite and positive", i);
}

SlopeFit fit_log_slope(const std::vector<Eigen::Index>& sizes, const Eigen::VectorXd& errors) {
  const Eigen::Index n = errors.size();
  if (n < 3 || static_cast<Eigen::Index>(sizes.size()) != n)
    throw ShapeError("fit_log_slope: need matching series of length >= 3");
  Eigen::VectorXd x(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = std::log(static_cast<double>(sizes[static_cast<std::size_t>(i)]));
    y[i] = std::log(errors[i]);
  }
  const double xm = x.mean(), ym = y.mean();
  const double sxx = (x.array() - xm).square().sum();
  const double sxy = ((x.array() - xm) * (y.array() - ym)).sum();
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = ym - fit.slope * xm;
  const double sse = (y.array() - fit.intercept - fit.slope * x.array()).square().sum();
  const double se = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
  const boost::math::students_t dist(static_cast<double>(n - 2));
  fit.ci = boost::math::quantile(boost::math::complement(dist, 0.025)) * se;
  return fit;
}

std::vector<Eigen::Index> doubling_sizes(Eigen::Index first, int count) {
  std::vector<Eigen::Index> out;
  for (int i = 0; i < count; ++i) out.push_back(first << i);
  return out;
}

RateEstimate covariance_rate(Eigen::Index n, const std::vector<Eigen::Index>& ms, int trials,
                             std::uint64_t seed) {
  check_plan(ms, trials);
  const Eigen::VectorXd scale = Eigen::VectorXd::Ones(n);
  const Eigen::MatrixXd truth = Eigen::MatrixXd::Identity(n, n);
  std::vector<Moments> stats;
  for (Eigen::Index m : ms) {
    if (m < n) throw ConfigError("covariance_rate: every m must be >= n");
    std::vector<double> errs;
    for (int trial = 0; trial < trials; ++trial) {
      std::mt19937_64 rng(seed + static_cast<std::uint64_t>(trial));
      const Eigen::MatrixXd diff = sample_covariance(gaussian_samples(rng, scale, m)) - truth;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(diff, Eigen::EigenvaluesOnly);
      errs.push_back(eig.eigenvalues().cwiseAbs().maxCoeff());
    }
    stats.push_back(moments(errs));
  }
  return make_estimate("cov", ms, stats, -0.5, 0.15, trials);
}

namespace {

std::pair<double, double> leading_errors(const Eigen::VectorXd& spectrum, std::mt19937_64& rng,
                                         Eigen::Index m) {
  const Eigen::Index n = spectrum.size();
  const Eigen::MatrixXd cov =
      sample_covariance(gaussian_samples(rng, spectrum.cwiseSqrt(), m));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  Eigen::Index top = 0;
  spectrum.maxCoeff(&top);
  const double value_err = std::abs(eig.eigenvalues()[n - 1] - spectrum[top]);
  const Eigen::VectorXd v = eig.eigenvectors().col(n - 1);
  const Eigen::VectorXd e = Eigen::VectorXd::Unit(n, top);
  const double vec_err = std::min((v - e).norm(), (v + e).norm());
  return {value_err, vec_err};
}

}  // namespace

std::pair<RateEstimate, RateEstimate> eigen_rate(const Eigen::VectorXd& spectrum,
                                                 const std::vector<Eigen::Index>& ms, int trials,
                                                 std::uint64_t seed) {
  check_plan(ms, trials);
  std::vector<Moments> value_stats, vector_stats;
  for (Eigen::Index m : ms) {
    std::vector<double> ve, we;
    for (int trial = 0; trial < trials; ++trial) {
      std::mt19937_64 rng(seed + static_cast<std::uint64_t>(trial));
      const auto [a, b] = leading_errors(spectrum, rng, m);
      ve.push_back(a);
      we.push_back(b);
    }
    value_stats.push_back(moments(ve));
    vector_stats.push_back(moments(we));
  }
  return {make_estimate("eig_value", ms, value_stats, -0.5, 0.15, trials),
          make_estimate("eig_vector", ms, vector_stats, -0.5, 0.15, trials)};
}

double eigenvector_error(const Eigen::VectorXd& spectrum, Eigen::Index m, int trials,
                         std::uint64_t seed) {
  double sum = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(trial));
    sum += leading_errors(spectrum, rng, m).second;
  }
  return sum / trials;
}

double kde_at(const Eigen::MatrixXd& samples, const Eigen::VectorXd& point, double bandwidth) {
  const double d = static_cast<double>(samples.rows());
  const double norm = std::pow(2.0 * std::numbers::pi * bandwidth * bandwidth, -d / 2.0);
  const double inv = 1.0 / (2.0 * bandwidth * bandwidth);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < samples.cols(); ++j)
    sum += std::exp(-(samples.col(j) - point).squaredNorm() * inv);
  return norm * sum / static_cast<double>(samples.cols());
}

RateEstimate kde_rate(int d, const std::vector<Eigen::Index>& ms, int trials, std::uint64_t seed) {
  if (d != 1 && d != 2) throw ConfigError("kde_rate: d must be 1 or 2");
  check_plan(ms, trials);
  // Probes at the peak and in the tail, away from zeros of the density's Laplacian.
  std::vector<Eigen::VectorXd> probes;
  probes.push_back(Eigen::VectorXd::Zero(d));
  probes.push_back(Eigen::VectorXd::Unit(d, 0) * 2.0);
  auto density = [d](const Eigen::VectorXd& x) {
    return std::pow(2.0 * std::numbers::pi, -d / 2.0) * std::exp(-0.5 * x.squaredNorm());
  };
  const Eigen::VectorXd scale = Eigen::VectorXd::Ones(d);
  std::vector<Moments> stats;
  for (Eigen::Index m : ms) {
    const double eps = std::pow(static_cast<double>(m), -1.0 / (d + 4.0));
    std::vector<double> errs;
    for (int trial = 0; trial < trials; ++trial) {
      std::mt19937_64 rng(seed + static_cast<std::uint64_t>(trial));
      const Eigen::MatrixXd x = gaussian_samples(rng, scale, m);
      double se = 0.0;
      for (const auto& p : probes) {
        const double e = kde_at(x, p, eps) - density(p);
        se += e * e;
      }
      errs.push_back(se / static_cast<double>(probes.size()));
    }
    stats.push_back(moments(errs));
  }
  return make_estimate("kde" + std::to_string(d), ms, stats, -4.0 / (d + 4.0), 0.2, trials);
}

double circle_markov_apply(const Eigen::VectorXd& angles, double probe, double bandwidth,
                           const std::function<double(double)>& f) {
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < angles.size(); ++i) {
    const double k = std::exp(-chord_sq(probe, angles[i]) / (bandwidth * bandwidth));
    num += k * f(angles[i]);
    den += k;
  }
  if (!(den > 0.0)) throw ExtrapolationError("circle_markov_apply: kernel weights vanish");
  return num / den;
}

double circle_markov_continuum(double probe, double bandwidth,
                               const std::function<double(double)>& f, int nodes) {
  double num = 0.0, den = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double theta = kTwoPi * i / nodes;
    const double k = std::exp(-chord_sq(probe, theta) / (bandwidth * bandwidth));
    num += k * f(theta);
    den += k;
  }
  return num / den;
}

RateEstimate operator_rate(const std::vector<Eigen::Index>& ms, int trials, std::uint64_t seed,
                           double bandwidth, const std::function<double(double)>& f) {
  check_plan(ms, trials);
  const double probes[] = {0.3, 1.7, 4.0};
  double reference[3];
  for (int p = 0; p < 3; ++p) reference[p] = circle_markov_continuum(probes[p], bandwidth, f);
  std::uniform_real_distribution<double> uniform(0.0, kTwoPi);
  std::vector<Moments> stats;
  for (Eigen::Index m : ms) {
    std::vector<double> errs;
    for (int trial = 0; trial < trials; ++trial) {
      std::mt19937_64 rng(seed + static_cast<std::uint64_t>(trial));
      Eigen::VectorXd angles(m);
      for (Eigen::Index i = 0; i < m; ++i) angles[i] = uniform(rng);
      double err = 0.0;
      for (int p = 0; p < 3; ++p)
        err += std::abs(circle_markov_apply(angles, probes[p], bandwidth, f) - reference[p]);
      errs.push_back(err / 3.0);
    }
    stats.push_back(moments(errs));
  }
  return make_estimate("operator", ms, stats, -0.5, 0.15, trials);
}

double circle_diffusion_distance(const Eigen::VectorXd& angles, Eigen::Index a, Eigen::Index b,
                                 double bandwidth, int t, Eigen::Index rank) {
  if (angles.size() < 3) throw ShapeError("circle_diffusion_distance: need at least 3 samples");
  const auto [values, vectors] = circle_spectrum(angles, bandwidth);
  return diffusion_distance(values, vectors, a, b, t, rank);
}

RateEstimate manifold_distance_rate(const std::vector<Eigen::Index>& ms, int trials,
                                    std::uint64_t seed, const DistancePlan& plan) {
  check_plan(ms, trials);
  std::mt19937_64 ref_rng(seed ^ 0x9e3779b97f4a7c15ULL);
  const Eigen::VectorXd ref_angles = circle_angles(ref_rng, 4 * ms.back(), plan);
  const double reference =
      circle_diffusion_distance(ref_angles, 0, 1, plan.bandwidth, plan.t, plan.rank);
  std::vector<Moments> stats;
  for (Eigen::Index m : ms) {
    std::vector<double> errs;
    for (int trial = 0; trial < trials; ++trial) {
      std::mt19937_64 rng(seed + static_cast<std::uint64_t>(trial));
      const Eigen::VectorXd angles = circle_angles(rng, m, plan);
      errs.push_back(std::abs(
          circle_diffusion_distance(angles, 0, 1, plan.bandwidth, plan.t, plan.rank) - reference));
    }
    stats.push_back(moments(errs));
  }
  return make_estimate("distance", ms, stats, -0.5, 0.2, trials);
}

Eigen::VectorXd distance_truncation_gaps(Eigen::Index m, const std::vector<Eigen::Index>& ranks,
                                         int trials, std::uint64_t seed,
                                         const DistancePlan& plan) {
  Eigen::VectorXd gaps = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ranks.size()));
  for (int trial = 0; trial < trials; ++trial) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(trial));
    const auto [values, vectors] = circle_spectrum(circle_angles(rng, m, plan), plan.bandwidth);
    const double full = diffusion_distance(values, vectors, 0, 1, plan.t, -1);
    for (std::size_t i = 0; i < ranks.size(); ++i) {
      gaps[static_cast<Eigen::Index>(i)] +=
          std::abs(full - diffusion_distance(values, vectors, 0, 1, plan.t, ranks[i]));
    }
  }
  return gaps / trials;
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"cov",      "eig",      "kde1", "kde2",
                                                 "operator", "distance", "all"};
  return names;
}

std::vector<RateEstimate> run_experiment(const std::string& name, std::uint64_t seed) {
  const auto ms = doubling_sizes(100, 8);  // 100 .. 12800
  if (name == "cov") return {covariance_rate(5, ms, 20, seed)};
  if (name == "eig") {
    auto [value, vector] = eigen_rate(Eigen::Vector3d(4.0, 2.0, 1.0), ms, 20, seed);
    return {value, vector};
  }
  if (name == "kde1") return {kde_rate(1, ms, 200, seed)};
  if (name == "kde2") return {kde_rate(2, ms, 200, seed)};
  if (name == "operator") return {operator_rate(ms, 50, seed)};
  if (name == "distance") return {manifold_distance_rate(doubling_sizes(16, 6), 20, seed)};
  if (name == "all") {
    std::vector<RateEstimate> out;
    for (const auto& n : experiment_names()) {
      if (n == "all") continue;
      auto part = run_experiment(n, seed);
      out.insert(out.end(), part.begin(), part.end());
    }
    return out;
  }
  std::string valid;
  for (const auto& n : experiment_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw ConfigError("unknown experiment '" + name + "' (valid: " + valid + ")");
}

void write_rate_csv(const std::filesystem::path& path, const RateEstimate& estimate) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "m,mean_error,std_error\n";
  for (std::size_t i = 0; i < estimate.sample_sizes.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    out << estimate.sample_sizes[i] << ',' << format_double(estimate.errors[k]) << ','
        << format_double(estimate.std_errors[k]) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<RateEstimate>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "experiment,theoretical_slope,fitted_slope,ci,pass\n";
  for (const auto& r : rows) {
    out << r.experiment << ',' << format_double(r.theoretical_slope) << ','
        << format_double(r.fitted_slope) << ',' << format_double(r.slope_ci) << ','
        << (r.pass() ? "true" : "false") << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace pmd
