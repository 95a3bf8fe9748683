#include "oracles.hpp"

#include "pmd/errors.hpp"
#include "pmd/model_store.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>

using namespace pmd;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pmd_test_store_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

PmdModel pulse_model(LiftKind kind = LiftKind::KernelRidge) {
  PmdConfig cfg;
  cfg.lift = kind;
  return fit(gen_advecting_pulse(48, 40, 0.02, 0.1), cfg);
}

bool same_bits(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

TEST_CASE("save then load is bitwise identical") {
  for (LiftKind kind : {LiftKind::KernelRidge, LiftKind::Ridge}) {
    const PmdModel model = pulse_model(kind);
    const fs::path dir = fresh_dir(std::string("roundtrip_") + to_string(kind));
    save_model(model, dir);
    const PmdModel back = load_model(dir);
    CHECK(same_bits(back.linear.Qr, model.linear.Qr));
    CHECK(same_bits(back.manifold.coords, model.manifold.coords));
    CHECK(same_bits(back.lift.dual, model.lift.dual));
    CHECK(same_bits(back.lift.K_lift, model.lift.K_lift));
    CHECK(same_bits(back.nonlinear_predictor.coefficients, model.nonlinear_predictor.coefficients));
    CHECK(back.manifold.bandwidth == model.manifold.bandwidth);
    CHECK(back.nonlinear_predictor.basis.bandwidth == model.nonlinear_predictor.basis.bandwidth);
    CHECK(back.linear_predictor.eigenvalues == model.linear_predictor.eigenvalues);
    CHECK(config_to_map(back.config) == config_to_map(model.config));
    CHECK(back.provenance.input_sha256 == model.provenance.input_sha256);
    CHECK(same_bits(predict(back, 10), predict(model, 10)));
    CHECK(same_bits(reconstruct_all(back), reconstruct_all(model)));
    fs::remove_all(dir);
  }
}

TEST_CASE("manifest lists exactly the stored arrays") {
  const PmdModel model = pulse_model();
  const fs::path dir = fresh_dir("listing");
  const ModelManifest manifest = save_model(model, dir);
  std::set<std::string> listed;
  for (const auto& a : manifest.arrays) listed.insert(a.file);
  std::set<std::string> on_disk;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".f64") on_disk.insert(entry.path().filename().string());
  CHECK(listed == on_disk);
  CHECK(listed.count("lift_dual.f64") == 1);
  CHECK(listed.count("lift_K.f64") == 0);
  const ModelManifest read = read_manifest(dir);
  CHECK(read.arrays.size() == manifest.arrays.size());
  CHECK(read.format_version == kModelFormatVersion);
  fs::remove_all(dir);
}

TEST_CASE("corrupted array fails its checksum") {
  const fs::path dir = fresh_dir("corrupt");
  save_model(pulse_model(), dir);
  {
    std::fstream f(dir / "linear_Qr.f64", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(40);
    f.put('\x7f');
  }
  CHECK_THROWS_AS(load_model(dir), ChecksumError);
  fs::remove_all(dir);
}

TEST_CASE("missing array file names the file") {
  const fs::path dir = fresh_dir("missing");
  save_model(pulse_model(), dir);
  fs::remove(dir / "gh_harmonics.f64");
  try {
    load_model(dir);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("gh_harmonics.f64") != std::string::npos);
  }
  fs::remove_all(dir);
  CHECK_THROWS_AS(load_model(dir), IoError);
}

TEST_CASE("unknown format version") {
  const fs::path dir = fresh_dir("version");
  save_model(pulse_model(), dir);
  std::string text = file_bytes(dir / "manifest.json");
  const auto pos = text.find("\"format_version\": 1");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 19, "\"format_version\": 9");
  std::ofstream(dir / "manifest.json") << text;
  CHECK_THROWS_AS(load_model(dir), VersionError);
  fs::remove_all(dir);
}

TEST_CASE("fitting twice serializes to identical bytes") {
  const fs::path a = fresh_dir("det_a");
  const fs::path b = fresh_dir("det_b");
  save_model(pulse_model(), a);
  save_model(pulse_model(), b);
  for (const auto& entry : fs::directory_iterator(a))
    CHECK(file_bytes(entry.path()) == file_bytes(b / entry.path().filename()));
  fs::remove_all(a);
  fs::remove_all(b);
}
