#include "pmd/snapshot.hpp"

#include "pmd/errors.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

namespace pmd {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& token, std::size_t line) {
  const std::string t = trim(token);
  double value = 0.0;
  const auto* begin = t.data();
  const auto* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (t.empty() || ec != std::errc() || ptr != end) {
    // from_chars rejects "inf"/"nan" spellings on some libstdc++ versions.
    if (t == "nan" || t == "NaN" || t == "inf" || t == "-inf" || t == "Inf" || t == "-Inf") {
      throw DataError("non-finite entry '" + t + "' on line " + std::to_string(line));
    }
    throw ParseError("cannot parse '" + t + "' as a number on line " + std::to_string(line));
  }
  return value;
}

template <class T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
  out.insert(out.end(), raw, raw + sizeof(T));
}

template <class T>
T get_le(const std::uint8_t* src) {
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, src, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(T));
  T value;
  std::memcpy(&value, raw, sizeof(T));
  return value;
}

double population_std(const Eigen::Ref<const Eigen::ArrayXd>& v, double mean) {
  return std::sqrt((v - mean).square().mean());
}

}  // namespace

void SnapshotMatrix::validate() const {
  if (data.rows() < 1) throw DataError("snapshot matrix needs at least one row");
  if (data.cols() < 2) throw DataError("snapshot matrix needs at least two columns (time levels)");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw DataError("dt must be positive and finite");
  if (!data.allFinite()) throw DataError("snapshot matrix contains non-finite entries");
}

const char* to_string(NormMode mode) {
  switch (mode) {
    case NormMode::PerSnapshot: return "per_snapshot";
    case NormMode::Global: return "global";
    case NormMode::PerRow: return "per_row";
  }
  return "per_row";
}

NormMode norm_mode_from_string(const std::string& name) {
  if (name == "per_snapshot") return NormMode::PerSnapshot;
  if (name == "global") return NormMode::Global;
  if (name == "per_row") return NormMode::PerRow;
  throw ConfigError("unknown normalization mode '" + name +
                    "' (expected per_snapshot, global or per_row)");
}

SnapshotMatrix parse_csv(const std::string& text) {
  SnapshotMatrix out;
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty()) continue;
    if (body.front() == '#') {
      std::istringstream header(body.substr(1));
      std::string pair;
      while (header >> pair) {
        const auto eq = pair.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = pair.substr(0, eq);
        if (key == "dt") out.dt = parse_double(pair.substr(eq + 1), line_no);
        else if (key == "t0") out.t0 = parse_double(pair.substr(eq + 1), line_no);
      }
      continue;
    }
    std::vector<double> row;
    std::stringstream cells(body);
    std::string cell;
    while (std::getline(cells, cell, ',')) row.push_back(parse_double(cell, line_no));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError("ragged CSV: line " + std::to_string(line_no) + " has " +
                       std::to_string(row.size()) + " columns, expected " +
                       std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("CSV contains no data rows");

  out.data.resize(static_cast<Eigen::Index>(rows.size()),
                  static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      out.data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  out.validate();
  return out;
}

SnapshotMatrix load_csv(const std::filesystem::path& path) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open " + path.string());
  std::stringstream buffer;
  buffer << file.rdbuf();
  return parse_csv(buffer.str());
}

void save_csv(const std::filesystem::path& path, const SnapshotMatrix& snapshots) {
  std::ofstream file(path);
  if (!file) throw IoError("cannot write " + path.string());
  file << std::setprecision(17);
  file << "# dt=" << snapshots.dt << " t0=" << snapshots.t0 << "\n";
  for (Eigen::Index i = 0; i < snapshots.data.rows(); ++i) {
    for (Eigen::Index j = 0; j < snapshots.data.cols(); ++j) {
      if (j) file << ',';
      file << snapshots.data(i, j);
    }
    file << '\n';
  }
  if (!file) throw IoError("write failed for " + path.string());
}

std::vector<std::uint8_t> encode_f64(const Eigen::MatrixXd& array) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + sizeof(double) * static_cast<std::size_t>(array.size()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(array.rows()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(array.cols()));
  for (Eigen::Index k = 0; k < array.size(); ++k) put_le<double>(out, array.data()[k]);
  return out;
}

Eigen::MatrixXd decode_f64(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 16) throw ParseError("f64 array shorter than its 16-byte header");
  const auto rows = get_le<std::uint64_t>(bytes.data());
  const auto cols = get_le<std::uint64_t>(bytes.data() + 8);
  if (bytes.size() != 16 + rows * cols * sizeof(double)) {
    throw ParseError("f64 payload size does not match header " + std::to_string(rows) + "x" +
                     std::to_string(cols));
  }
  Eigen::MatrixXd array(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index k = 0; k < array.size(); ++k)
    array.data()[k] = get_le<double>(bytes.data() + 16 + sizeof(double) * k);
  return array;
}

void write_f64(const std::filesystem::path& path, const Eigen::MatrixXd& array) {
  const auto bytes = encode_f64(array);
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot write " + path.string());
  file.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!file) throw IoError("write failed for " + path.string());
}

Eigen::MatrixXd read_f64(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(file)),
                                  std::istreambuf_iterator<char>());
  return decode_f64(bytes);
}

Normalized normalize(const Eigen::MatrixXd& data, NormMode mode) {
  Normalized out;
  out.stats.mode = mode;
  out.values.resize(data.rows(), data.cols());
  auto floor = [](double s) { return s < kStdFloor ? kStdFloor : s; };

  switch (mode) {
    case NormMode::PerSnapshot: {
      out.stats.means.resize(data.cols());
      out.stats.stds.resize(data.cols());
      for (Eigen::Index j = 0; j < data.cols(); ++j) {
        const Eigen::ArrayXd col = data.col(j).array();
        const double mu = col.mean();
        const double sd = floor(population_std(col, mu));
        out.stats.means[j] = mu;
        out.stats.stds[j] = sd;
        out.values.col(j) = (col - mu) / sd;
      }
      break;
    }
    case NormMode::Global: {
      const Eigen::ArrayXd all = data.reshaped().array();
      const double mu = all.mean();
      const double sd = floor(population_std(all, mu));
      out.stats.means = Eigen::VectorXd::Constant(1, mu);
      out.stats.stds = Eigen::VectorXd::Constant(1, sd);
      out.values = (data.array() - mu) / sd;
      break;
    }
    case NormMode::PerRow: {
      out.stats.means.resize(data.rows());
      out.stats.stds.resize(data.rows());
      for (Eigen::Index i = 0; i < data.rows(); ++i) {
        const Eigen::ArrayXd row = data.row(i).transpose().array();
        const double mu = row.mean();
        const double sd = floor(population_std(row, mu));
        out.stats.means[i] = mu;
        out.stats.stds[i] = sd;
        out.values.row(i) = ((row - mu) / sd).transpose();
      }
      break;
    }
  }
  return out;
}

Eigen::MatrixXd denormalize(const Eigen::MatrixXd& values, const NormalizationStats& stats,
                            std::span<const Eigen::Index> column_indices) {
  if (static_cast<Eigen::Index>(column_indices.size()) != values.cols()) {
    throw ShapeError("denormalize: " + std::to_string(values.cols()) + " columns but " +
                     std::to_string(column_indices.size()) + " indices");
  }
  Eigen::MatrixXd out(values.rows(), values.cols());
  switch (stats.mode) {
    case NormMode::PerSnapshot: {
      const Eigen::Index m = stats.means.size();
      for (Eigen::Index j = 0; j < values.cols(); ++j) {
        const Eigen::Index idx = column_indices[static_cast<std::size_t>(j)];
        if (idx < 0 || idx >= m) {
          throw ModeError("per-snapshot normalization has no statistics for time index " +
                          std::to_string(idx) + " (training has " + std::to_string(m) +
                          " columns); use global or per_row normalization for prediction");
        }
        out.col(j) = values.col(j).array() * stats.stds[idx] + stats.means[idx];
      }
      break;
    }
    case NormMode::Global:
      out = values.array() * stats.stds[0] + stats.means[0];
      break;
    case NormMode::PerRow:
      if (stats.means.size() != values.rows())
        throw ShapeError("denormalize: per-row stats do not match row count");
      out = (values.array().colwise() * stats.stds.array()).colwise() + stats.means.array();
      break;
  }
  return out;
}

SnapshotMatrix gen_linear_system(const Eigen::MatrixXd& dynamics, const Eigen::VectorXd& x0,
                                 const Eigen::MatrixXd& lift, Eigen::Index steps, double noise,
                                 std::uint64_t seed) {
  if (steps < 2) throw DataError("gen_linear_system needs m >= 2");
  if (!(noise >= 0.0)) throw DataError("noise must be nonnegative");
  if (dynamics.rows() != dynamics.cols() || dynamics.rows() != x0.size() ||
      lift.cols() != x0.size()) {
    throw ShapeError("gen_linear_system: A must be r x r, x0 length r, lift n x r");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  SnapshotMatrix out;
  out.data.resize(lift.rows(), steps);
  Eigen::VectorXd state = x0;
  for (Eigen::Index k = 0; k < steps; ++k) {
    if (!state.allFinite()) {
      throw DataError("state overflow at step " + std::to_string(k) + " of gen_linear_system");
    }
    out.data.col(k) = lift * state;
    if (noise > 0.0)
      for (Eigen::Index i = 0; i < out.data.rows(); ++i) out.data(i, k) += noise * gauss(rng);
    state = dynamics * state;
  }
  if (!out.data.allFinite()) throw DataError("gen_linear_system produced non-finite values");
  return out;
}

SnapshotMatrix gen_advecting_pulse(Eigen::Index n, Eigen::Index m, double speed, double width,
                                   double dt, double center) {
  if (n < 16 || m < 8) throw DataError("gen_advecting_pulse needs n >= 16 and m >= 8");
  if (!(width > 0.0)) throw DataError("pulse width must be positive");
  SnapshotMatrix out;
  out.dt = dt;
  out.data.resize(n, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    double c = center + speed * static_cast<double>(k) * dt;
    c -= std::floor(c);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = static_cast<double>(i) / static_cast<double>(n);
      double value = 0.0;
      // Periodic images; beyond |image| = 3 the terms underflow for any width < 0.5.
      for (int image = -3; image <= 3; ++image) {
        const double d = x - c - image;
        value += std::exp(-d * d / (width * width));
      }
      out.data(i, k) = value;
    }
  }
  return out;
}

}  // namespace pmd
