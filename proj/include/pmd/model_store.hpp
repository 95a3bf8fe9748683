#pragma once

#include "pmd/rom.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace pmd {

inline constexpr int kModelFormatVersion = 1;

struct ArrayEntry {
  std::string name;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::string file;
  std::string checksum;  // SHA-256 of the file bytes
};

struct ModelManifest {
  int format_version = kModelFormatVersion;
  std::vector<ArrayEntry> arrays;
  std::map<std::string, std::string> config;
  Provenance provenance;
};

/// Writes manifest.json plus one .f64 file per array into `dir`.
ModelManifest save_model(const PmdModel& model, const std::filesystem::path& dir);

/// Reads and verifies a model directory. Raises VersionError, ChecksumError,
/// or IoError naming the offending file.
PmdModel load_model(const std::filesystem::path& dir);

ModelManifest read_manifest(const std::filesystem::path& dir);

}  // namespace pmd
