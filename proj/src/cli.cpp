#include "pmd/cli.hpp"

#include "pmd/convergence.hpp"
#include "pmd/errors.hpp"
#include "pmd/model_store.hpp"
#include "pmd/rom.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>

namespace pmd {

namespace fs = std::filesystem;

namespace {

constexpr int kUsage = 2;
constexpr int kFailure = 1;

// Signals a usage problem detected after CLI11 parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v, const char* pattern = "%.17g") {
  char buf[48];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::string timestamp_utc() {
  std::time_t now = std::time(nullptr);
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH")) now = std::strtoll(epoch, nullptr, 10);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Config-file path plus one `--key-name` flag per config key.
struct ConfigFlags {
  std::string file;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", file, "key = value config file")->check(CLI::ExistingFile);
    for (const auto& [key, value] : config_to_map(PmdConfig{})) {
      std::string flag = key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      cmd->add_option_function<std::string>(
          "--" + flag, [this, key](const std::string& v) { overrides[key] = v; },
          "override " + key + " (default " + value + ")");
    }
  }

  PmdConfig resolve() const {
    std::map<std::string, std::string> values;
    if (!file.empty()) values = parse_config_text(read_text(file));
    for (const auto& [k, v] : overrides) values[k] = v;
    return config_from_map(values);
  }
};

std::vector<Eigen::Index> parse_ranks(const std::string& text) {
  std::vector<Eigen::Index> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const long long r = std::stoll(item, &used);
      if (used != item.size() || r < 1) throw std::invalid_argument(item);
      out.push_back(r);
    } catch (const std::exception&) {
      throw UsageError("--ranks: '" + item + "' is not a positive integer");
    }
  }
  if (out.empty()) throw UsageError("--ranks must list at least one rank");
  return out;
}

void print_fit_summary(const PmdModel& model, double seconds) {
  const Eigen::Index r = model.linear_rank();
  const Eigen::VectorXd lambda = manifold_energy_spectrum(model.manifold);
  const Eigen::VectorXd& sigma = model.linear.full_spectrum;
  const bool energy_ok = sigma.squaredNorm() > 0.0 && r <= lambda.size();
  std::cout << "quantity            value\n";
  std::cout << "dofs                " << model.dofs << "\n";
  std::cout << "steps               " << model.steps << "\n";
  std::cout << "r_linear            " << r << "\n";
  std::cout << "r_manifold          " << model.manifold_rank() << "\n";
  std::cout << "knn_graph           " << model.knn_used << "\n";
  std::cout << "bandwidth           " << fmt(model.manifold.bandwidth, "%.6g") << "\n";
  if (energy_ok) {
    std::cout << "pod_energy          " << fmt(pod_energy(sigma, r), "%.6f") << "\n";
    std::cout << "pmd_energy          " << fmt(pmd_energy(sigma, lambda, r), "%.6f") << "\n";
    const RankSelection sel = select_rank(sigma, lambda, model.config.energy_target);
    std::cout << "energy_target       " << fmt(model.config.energy_target, "%.6g") << "\n";
    std::cout << "suggested_rank      " << sel.rank << (sel.reached ? "" : " (target not reached)")
              << "\n";
  } else {
    std::cout << "energy_target       " << fmt(model.config.energy_target, "%.6g") << "\n";
  }
  if (model.manifold_degenerate) std::cout << "manifold            degenerate (residual ~ 0)\n";
  std::cout << "fit_seconds         " << fmt(seconds, "%.3f") << "\n";
}

int cmd_fit(const std::string& input, const ConfigFlags& flags, const std::string& out) {
  const PmdConfig cfg = flags.resolve();
  const SnapshotMatrix data = staged("input", [&] { return load_csv(input); });
  const auto start = std::chrono::steady_clock::now();
  PmdModel model = fit(data, cfg);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  model.provenance.created_at = timestamp_utc();
  staged("save", [&] { save_model(model, out); });
  print_fit_summary(model, seconds);
  std::cout << "model written to " << out << "\n";
  return 0;
}

int cmd_predict(const std::string& model_dir, long long steps, const std::string& truth_path,
                const std::string& out, const std::string& errors_path) {
  if (steps < 1) throw UsageError("--steps must be >= 1");
  const PmdModel model = staged("load", [&] { return load_model(model_dir); });
  SnapshotMatrix prediction;
  prediction.data = predict(model, steps);
  prediction.dt = model.dt;
  prediction.t0 = model.t0 + model.dt * static_cast<double>(model.steps);
  save_csv(out, prediction);
  std::cout << "wrote " << prediction.data.rows() << "x" << steps << " prediction to " << out
            << "\n";
  if (!truth_path.empty()) {
    const SnapshotMatrix truth = staged("truth", [&] { return load_csv(truth_path); });
    const ErrorReport report = staged("truth", [&] { return error_report(truth.data, prediction.data); });
    const std::string path =
        errors_path.empty() ? fs::path(out).replace_extension().string() + "_errors.csv" : errors_path;
    write_error_report(path, report);
    std::cout << "relative_frobenius " << fmt(report.relative_frobenius, "%.6e") << "\n";
    std::cout << "max_relative_l2    " << fmt(report.relative_l2.maxCoeff(), "%.6e") << "\n";
    std::cout << "errors written to " << path << "\n";
  }
  return 0;
}

void write_gnuplot(const fs::path& dir, const std::vector<Eigen::Index>& ranks) {
  std::ostringstream gp;
  gp << "set datafile separator ','\n"
     << "set terminal pngcairo size 1000,420\n"
     << "set output 'benchmark.png'\n"
     << "set multiplot layout 1,2\n"
     << "set logscale y\n"
     << "set xlabel 'rank'\nset ylabel 'relative error'\n"
     << "set title 'reconstruction and prediction error'\n"
     << "plot 'benchmark.csv' using 1:(stringcolumn(2) eq 'pmd' ? $3 : 1/0) skip 1 with linespoints "
        "title 'PMD reconstruct', \\\n"
     << "     '' using 1:(stringcolumn(2) eq 'pod' ? $3 : 1/0) skip 1 with linespoints "
        "title 'POD reconstruct', \\\n"
     << "     '' using 1:(stringcolumn(2) eq 'pmd' ? $4 : 1/0) skip 1 with linespoints "
        "title 'PMD predict', \\\n"
     << "     '' using 1:(stringcolumn(2) eq 'pod' ? $4 : 1/0) skip 1 with linespoints "
        "title 'POD predict'\n"
     << "set xlabel 'steps ahead'\nset title 'prediction error per step'\nplot ";
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    const std::string file = "predict_r" + std::to_string(ranks[i]) + ".csv";
    gp << (i ? ", \\\n     " : "") << "'" << file << "' using 1:2 skip 1 with lines title 'PMD r="
       << ranks[i] << "', '" << file << "' using 1:3 skip 1 with lines dt 2 title 'POD r="
       << ranks[i] << "'";
  }
  gp << "\nunset multiplot\n";
  write_text(dir / "benchmark.gp", gp.str());
}

int cmd_benchmark(const std::string& input, double train_frac, const std::string& ranks_text,
                  const ConfigFlags& flags, const std::string& out) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw UsageError("--train-frac must lie in (0, 1)");
  const std::vector<Eigen::Index> ranks = parse_ranks(ranks_text);
  const PmdConfig base = flags.resolve();
  const SnapshotMatrix data = staged("input", [&] { return load_csv(input); });
  const Eigen::Index m = data.steps();
  const auto train_m = static_cast<Eigen::Index>(std::floor(train_frac * static_cast<double>(m)));
  if (train_m < 2 || train_m >= m)
    throw ShapeError("--train-frac leaves " + std::to_string(train_m) + " training and " +
                     std::to_string(m - train_m) + " test columns");
  SnapshotMatrix train = data;
  train.data = data.data.leftCols(train_m);
  const Eigen::MatrixXd test = data.data.rightCols(m - train_m);
  ensure_dir(out);

  std::ostringstream table;
  table << "rank,method,reconstruct_err,predict_err\n";
  std::cout << "rank  method  reconstruct_err  predict_err\n";
  for (Eigen::Index r : ranks) {
    PmdConfig cfg = base;
    cfg.linear_rank = RankCriterion::fixed(r);
    const PmdModel model = fit(train, cfg);
    const ErrorReport pmd_rec = error_report(train.data, reconstruct_all(model));
    const ErrorReport pod_rec = error_report(train.data, pod_reconstruct_all(model));
    const ErrorReport pmd_pred = error_report(test, predict(model, test.cols()));
    const ErrorReport pod_pred = error_report(test, pod_predict(model, test.cols()));
    for (const auto& [name, rec, pred] : {std::tuple{"pmd", &pmd_rec, &pmd_pred},
                                          std::tuple{"pod", &pod_rec, &pod_pred}}) {
      table << r << ',' << name << ',' << fmt(rec->relative_frobenius) << ','
            << fmt(pred->relative_frobenius) << '\n';
      std::cout << r << "     " << name << "     " << fmt(rec->relative_frobenius, "%.6e") << "     "
                << fmt(pred->relative_frobenius, "%.6e") << "\n";
    }
    std::ostringstream series;
    series << "step,pmd_relative_l2,pod_relative_l2\n";
    for (Eigen::Index k = 0; k < test.cols(); ++k)
      series << k + 1 << ',' << fmt(pmd_pred.relative_l2[k]) << ',' << fmt(pod_pred.relative_l2[k])
             << '\n';
    write_text(fs::path(out) / ("predict_r" + std::to_string(r) + ".csv"), series.str());
  }
  write_text(fs::path(out) / "benchmark.csv", table.str());
  write_gnuplot(out, ranks);
  std::cout << "wrote " << (fs::path(out) / "benchmark.csv").string() << "\n";
  return 0;
}

int cmd_converge(const std::string& experiment, std::uint64_t seed, const std::string& out) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), experiment) == names.end()) {
    std::string valid;
    for (const auto& n : names) valid += (valid.empty() ? "" : ", ") + n;
    throw UsageError("unknown experiment '" + experiment + "' (valid: " + valid + ")");
  }
  ensure_dir(out);
  const std::vector<RateEstimate> rows = run_experiment(experiment, seed);
  for (const auto& r : rows) {
    write_rate_csv(fs::path(out) / (r.experiment + ".csv"), r);
    std::cout << (r.pass() ? "PASS " : "FAIL ") << r.experiment << ": slope "
              << fmt(r.fitted_slope, "%.4f") << " +/- " << fmt(r.slope_ci, "%.4f")
              << " (theoretical " << fmt(r.theoretical_slope, "%.4f") << ", band +/- "
              << fmt(r.band, "%.2f") << ")\n";
  }
  write_summary_csv(fs::path(out) / "summary.csv", rows);
  return 0;
}

// Block-diagonal damped rotations (plus one real mode for odd rank) lifted by
// a Gaussian matrix.
SnapshotMatrix generate_linear(Eigen::Index n, Eigen::Index m, Eigen::Index rank, double noise,
                               std::uint64_t seed) {
  if (n < 1 || rank < 1 || m < 2) throw UsageError("generate linear: need n, rank >= 1, m >= 2");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rank, rank);
  for (Eigen::Index b = 0; b + 1 < rank; b += 2) {
    const double radius = 0.99 - 0.02 * static_cast<double>(b / 2);
    const double angle = 0.15 * static_cast<double>(b / 2 + 1);
    a(b, b) = a(b + 1, b + 1) = radius * std::cos(angle);
    a(b, b + 1) = -radius * std::sin(angle);
    a(b + 1, b) = radius * std::sin(angle);
  }
  if (rank % 2 == 1) a(rank - 1, rank - 1) = 0.95;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd lift(n, rank);
  for (Eigen::Index j = 0; j < rank; ++j)
    for (Eigen::Index i = 0; i < n; ++i) lift(i, j) = normal(rng);
  return gen_linear_system(a, Eigen::VectorXd::Ones(rank), lift, m, noise, seed + 1);
}

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Probabilistic manifold decomposition reduced-order models"};
  app.set_version_flag("--version", std::string(library_version()));
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  std::string input, out, config_file, model_dir, truth, errors, ranks = "2,6", experiment;
  long long steps = 0;
  double train_frac = 0.75;
  std::uint64_t seed = 0;
  ConfigFlags fit_flags, bench_flags;

  CLI::App* fit_cmd = app.add_subcommand("fit", "fit a model and save it");
  fit_cmd->add_option("--input", input, "snapshot CSV")->required();
  fit_cmd->add_option("--out", out, "model directory")->required();
  fit_flags.attach(fit_cmd);

  CLI::App* predict_cmd = app.add_subcommand("predict", "extrapolate a saved model");
  predict_cmd->add_option("--model", model_dir, "model directory")->required();
  predict_cmd->add_option("--steps", steps, "number of future steps")->required();
  predict_cmd->add_option("--truth", truth, "reference CSV for the predicted steps");
  predict_cmd->add_option("--out", out, "prediction CSV")->required();
  predict_cmd->add_option("--errors", errors, "error report CSV (default <out>_errors.csv)");

  CLI::App* bench_cmd = app.add_subcommand("benchmark", "compare PMD with the POD baseline");
  bench_cmd->add_option("--input", input, "snapshot CSV")->required();
  bench_cmd->add_option("--train-frac", train_frac, "leading fraction of columns used to fit");
  bench_cmd->add_option("--ranks", ranks, "comma-separated linear ranks");
  bench_cmd->add_option("--out", out, "output directory")->required();
  bench_flags.attach(bench_cmd);

  CLI::App* conv_cmd = app.add_subcommand("converge", "run a convergence-rate experiment");
  conv_cmd->add_option("--experiment", experiment, "cov, eig, kde1, kde2, operator, distance, all")
      ->required();
  conv_cmd->add_option("--seed", seed, "master seed");
  conv_cmd->add_option("--out", out, "output directory")->required();

  CLI::App* gen_cmd = app.add_subcommand("generate", "write a synthetic snapshot CSV");
  gen_cmd->require_subcommand(1);
  long long gn = 128, gm = 160, grank = 4;
  double speed = 0.01, width = 0.1, dt = 1.0, noise = 0.0;
  CLI::App* pulse_cmd = gen_cmd->add_subcommand("pulse", "periodic advecting Gaussian pulse");
  pulse_cmd->add_option("--n", gn, "grid size");
  pulse_cmd->add_option("--m", gm, "snapshots");
  pulse_cmd->add_option("--speed", speed, "domain lengths per unit time");
  pulse_cmd->add_option("--width", width, "pulse width");
  pulse_cmd->add_option("--dt", dt, "snapshot spacing");
  pulse_cmd->add_option("--out", out, "CSV path")->required();
  CLI::App* linear_cmd = gen_cmd->add_subcommand("linear", "lifted linear system");
  linear_cmd->add_option("--n", gn, "state dimension");
  linear_cmd->add_option("--m", gm, "snapshots");
  linear_cmd->add_option("--rank", grank, "latent dimension");
  linear_cmd->add_option("--noise", noise, "Gaussian noise level");
  linear_cmd->add_option("--seed", seed, "seed");
  linear_cmd->add_option("--out", out, "CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*fit_cmd) return cmd_fit(input, fit_flags, out);
    if (*predict_cmd) return cmd_predict(model_dir, steps, truth, out, errors);
    if (*bench_cmd) return cmd_benchmark(input, train_frac, ranks, bench_flags, out);
    if (*conv_cmd) return cmd_converge(experiment, seed, out);
    if (*pulse_cmd) {
      if (gn < 16 || gm < 8) throw UsageError("generate pulse: need --n >= 16 and --m >= 8");
      save_csv(out, gen_advecting_pulse(gn, gm, speed, width, dt));
    } else if (*linear_cmd) {
      save_csv(out, generate_linear(gn, gm, grank, noise, seed));
    }
    return 0;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
    return kFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace pmd
