#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace pmd {

/// Column-per-timestep state archive: rows are spatial degrees of freedom,
/// columns are uniformly spaced time levels starting at t0.
struct SnapshotMatrix {
  Eigen::MatrixXd data;
  double dt = 1.0;
  double t0 = 0.0;

  Eigen::Index dofs() const { return data.rows(); }
  Eigen::Index steps() const { return data.cols(); }

  /// Throws DataError unless n >= 1, m >= 2, dt > 0 and every entry is finite.
  void validate() const;
};

enum class NormMode { PerSnapshot, Global, PerRow };

const char* to_string(NormMode mode);
NormMode norm_mode_from_string(const std::string& name);

inline constexpr double kStdFloor = 1e-12;

struct NormalizationStats {
  NormMode mode = NormMode::PerRow;
  Eigen::VectorXd means;
  Eigen::VectorXd stds;

  bool floored(Eigen::Index i) const { return stds[i] <= kStdFloor; }
};

struct Normalized {
  Eigen::MatrixXd values;
  NormalizationStats stats;
};

// CSV: rows = DOF, columns = time. Lines starting with '#' carry
// space-separated key=value pairs; dt and t0 are recognised.
SnapshotMatrix load_csv(const std::filesystem::path& path);
SnapshotMatrix parse_csv(const std::string& text);
void save_csv(const std::filesystem::path& path, const SnapshotMatrix& snapshots);

// .f64 arrays: two little-endian uint64 (rows, cols) then column-major
// little-endian float64 payload.
void write_f64(const std::filesystem::path& path, const Eigen::MatrixXd& array);
Eigen::MatrixXd read_f64(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_f64(const Eigen::MatrixXd& array);
Eigen::MatrixXd decode_f64(std::span<const std::uint8_t> bytes);

/// Population mean/std per column, per row, or over all entries; std values
/// below kStdFloor are replaced by the floor.
Normalized normalize(const Eigen::MatrixXd& data, NormMode mode);

/// Inverse of normalize for the given columns. `column_indices` name the time
/// levels of each column of `values`; PerSnapshot stats only cover training
/// columns, so any index >= m raises ModeError.
Eigen::MatrixXd denormalize(const Eigen::MatrixXd& values, const NormalizationStats& stats,
                            std::span<const Eigen::Index> column_indices);

/// u_k = lift * A^k * x0 + noise * N(0, 1), k = 0..m-1.
SnapshotMatrix gen_linear_system(const Eigen::MatrixXd& dynamics, const Eigen::VectorXd& x0,
                                 const Eigen::MatrixXd& lift, Eigen::Index steps, double noise,
                                 std::uint64_t seed = 0);

/// Gaussian pulse exp(-(x - x0 - speed*k*dt)^2 / width^2) on the periodic unit
/// grid x_i = i/n.
SnapshotMatrix gen_advecting_pulse(Eigen::Index n, Eigen::Index m, double speed, double width,
                                   double dt = 1.0, double center = 0.5);

}  // namespace pmd
