#include "pmd/model_store.hpp"

#include "hash.hpp"
#include "pmd/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <iterator>

namespace pmd {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kManifestName = "manifest.json";

Eigen::MatrixXd column(const Eigen::VectorXd& v) { return v; }

// Complex arrays are stored as separate real and imaginary parts.
void put_complex(std::vector<std::pair<std::string, Eigen::MatrixXd>>& out,
                 const std::string& name, const Eigen::MatrixXcd& value) {
  out.emplace_back(name + "_re", value.real());
  out.emplace_back(name + "_im", value.imag());
}

// Floating scalars travel as a binary array so they round-trip bitwise.
Eigen::VectorXd pack_scalars(const PmdModel& model) {
  Eigen::VectorXd s(10);
  s << model.dt, model.t0, model.manifold.bandwidth, model.manifold.trivial_eigenvalue,
      model.manifold.trivial_residual, model.lift.lambda, model.lift.offset,
      model.linear_predictor.lambda, model.nonlinear_predictor.basis.bandwidth,
      model.nonlinear_predictor.lambda;
  return s;
}

std::vector<std::pair<std::string, Eigen::MatrixXd>> collect_arrays(const PmdModel& model) {
  std::vector<std::pair<std::string, Eigen::MatrixXd>> out;
  out.emplace_back("scalars", column(pack_scalars(model)));
  out.emplace_back("norm_means", column(model.stats.means));
  out.emplace_back("norm_stds", column(model.stats.stds));
  out.emplace_back("linear_Qr", model.linear.Qr);
  out.emplace_back("linear_Sr", column(model.linear.Sr));
  out.emplace_back("linear_Vr", model.linear.Vr);
  out.emplace_back("linear_spectrum", column(model.linear.full_spectrum));
  out.emplace_back("manifold_eigenvalues", column(model.manifold.eigenvalues));
  out.emplace_back("manifold_eigenvectors", model.manifold.eigenvectors);
  out.emplace_back("manifold_spectrum", column(model.manifold.full_spectrum));
  out.emplace_back("manifold_coords", model.manifold.coords);
  if (model.lift.kind == LiftKind::Ridge) {
    out.emplace_back("lift_K", model.lift.K_lift);
  } else {
    out.emplace_back("lift_train_coords", model.lift.train_coords);
    out.emplace_back("lift_dual", model.lift.dual);
  }
  const LinearPredictor& lp = model.linear_predictor;
  out.emplace_back("dmd_A1", lp.A1);
  put_complex(out, "dmd_modes", lp.modes);
  put_complex(out, "dmd_eigenvalues", lp.eigenvalues);
  put_complex(out, "dmd_amplitudes", lp.amplitudes);
  const NonlinearPredictor& np = model.nonlinear_predictor;
  out.emplace_back("gh_eigenvalues", column(np.basis.eigenvalues));
  out.emplace_back("gh_harmonics", np.basis.harmonics);
  out.emplace_back("gh_degrees", column(np.basis.degrees));
  out.emplace_back("gh_one_step", np.one_step);
  out.emplace_back("gh_coefficients", np.coefficients);
  out.emplace_back("gh_train_coords", np.train_coords);
  return out;
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

json manifest_json(const ModelManifest& manifest, const PmdModel& model) {
  json j;
  j["format_version"] = manifest.format_version;
  j["arrays"] = json::array();
  for (const auto& a : manifest.arrays) {
    j["arrays"].push_back({{"name", a.name},
                           {"rows", a.rows},
                           {"cols", a.cols},
                           {"file", a.file},
                           {"checksum", a.checksum}});
  }
  j["config"] = manifest.config;
  j["provenance"] = {{"input_sha256", manifest.provenance.input_sha256},
                     {"created_at", manifest.provenance.created_at},
                     {"tool_version", manifest.provenance.tool_version}};
  j["model"] = {{"dofs", model.dofs},
                {"steps", model.steps},
                {"knn_used", model.knn_used},
                {"manifold_degenerate", model.manifold_degenerate},
                {"normalization", to_string(model.stats.mode)},
                {"t", model.manifold.t},
                {"lift", to_string(model.lift.kind)},
                {"lift_degree", model.lift.degree},
                {"lift_neighbors", model.lift.neighbors},
                {"anchor_index", model.linear_predictor.anchor_index},
                {"nonlinear_mode", to_string(model.nonlinear_predictor.mode)},
                {"row_normalize", model.nonlinear_predictor.row_normalize},
                {"dt", model.dt},
                {"t0", model.t0}};
  return j;
}

template <class T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("manifest.json: missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("manifest.json: bad field '") + key + "': " + e.what());
  }
}

Eigen::MatrixXcd join_complex(const Eigen::MatrixXd& re, const Eigen::MatrixXd& im) {
  if (re.rows() != im.rows() || re.cols() != im.cols())
    throw ShapeError("complex array parts disagree in shape");
  Eigen::MatrixXcd out(re.rows(), re.cols());
  out.real() = re;
  out.imag() = im;
  return out;
}

}  // namespace

ModelManifest save_model(const PmdModel& model, const fs::path& dir) {
  model.check_consistency();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  ModelManifest manifest;
  manifest.config = config_to_map(model.config);
  manifest.provenance = model.provenance;
  for (const auto& [name, array] : collect_arrays(model)) {
    const std::vector<std::uint8_t> bytes = encode_f64(array);
    const std::string file = name + ".f64";
    write_bytes(dir / file, bytes);
    manifest.arrays.push_back({name, array.rows(), array.cols(), file, detail::sha256_hex(bytes)});
  }
  const std::string text = manifest_json(manifest, model).dump(2) + "\n";
  write_bytes(dir / kManifestName, std::vector<std::uint8_t>(text.begin(), text.end()));
  return manifest;
}

ModelManifest read_manifest(const fs::path& dir) {
  const fs::path path = dir / kManifestName;
  if (!fs::exists(path)) throw IoError("missing file " + path.string());
  const auto bytes = read_bytes(path);
  json j;
  try {
    j = json::parse(bytes.begin(), bytes.end());
  } catch (const json::exception& e) {
    throw ParseError("manifest.json: " + std::string(e.what()));
  }
  ModelManifest m;
  m.format_version = field<int>(j, "format_version");
  if (m.format_version != kModelFormatVersion) {
    throw VersionError("manifest.json: format_version " + std::to_string(m.format_version) +
                           " is not supported (expected " +
                           std::to_string(kModelFormatVersion) + ")",
                       m.format_version);
  }
  for (const auto& a : field<json>(j, "arrays")) {
    m.arrays.push_back({field<std::string>(a, "name"), field<Eigen::Index>(a, "rows"),
                        field<Eigen::Index>(a, "cols"), field<std::string>(a, "file"),
                        field<std::string>(a, "checksum")});
  }
  m.config = field<std::map<std::string, std::string>>(j, "config");
  const json prov = field<json>(j, "provenance");
  m.provenance = {field<std::string>(prov, "input_sha256"), field<std::string>(prov, "created_at"),
                  field<std::string>(prov, "tool_version")};
  return m;
}

PmdModel load_model(const fs::path& dir) {
  const ModelManifest manifest = read_manifest(dir);
  const auto text = read_bytes(dir / kManifestName);
  const json meta = field<json>(json::parse(text.begin(), text.end()), "model");

  std::map<std::string, Eigen::MatrixXd> arrays;
  for (const auto& entry : manifest.arrays) {
    const fs::path path = dir / entry.file;
    if (!fs::exists(path)) throw IoError("missing array file " + path.string());
    const auto bytes = read_bytes(path);
    if (detail::sha256_hex(bytes) != entry.checksum)
      throw ChecksumError("checksum mismatch for " + path.string());
    Eigen::MatrixXd array = decode_f64(bytes);
    if (array.rows() != entry.rows || array.cols() != entry.cols)
      throw ShapeError("array " + entry.name + " does not match its manifest shape");
    arrays.emplace(entry.name, std::move(array));
  }
  auto take = [&](const std::string& name) -> Eigen::MatrixXd {
    auto it = arrays.find(name);
    if (it == arrays.end()) throw ParseError("manifest.json: array '" + name + "' not listed");
    return it->second;
  };
  auto vec = [&](const std::string& name) -> Eigen::VectorXd {
    Eigen::MatrixXd a = take(name);
    if (a.cols() != 1 && a.size() != 0) throw ShapeError("array " + name + " must be a column");
    return Eigen::Map<const Eigen::VectorXd>(a.data(), a.size());
  };

  PmdModel model;
  model.config = staged("config", [&] { return config_from_map(manifest.config); });
  model.provenance = manifest.provenance;
  model.dofs = field<Eigen::Index>(meta, "dofs");
  model.steps = field<Eigen::Index>(meta, "steps");
  model.knn_used = field<Eigen::Index>(meta, "knn_used");
  model.manifold_degenerate = field<bool>(meta, "manifold_degenerate");

  const Eigen::VectorXd s = vec("scalars");
  if (s.size() != 10) throw ShapeError("scalars array must hold 10 values");
  model.dt = s[0];
  model.t0 = s[1];

  model.stats.mode = norm_mode_from_string(field<std::string>(meta, "normalization"));
  model.stats.means = vec("norm_means");
  model.stats.stds = vec("norm_stds");

  model.linear.Qr = take("linear_Qr");
  model.linear.Sr = vec("linear_Sr");
  model.linear.Vr = take("linear_Vr");
  model.linear.full_spectrum = vec("linear_spectrum");

  model.manifold.eigenvalues = vec("manifold_eigenvalues");
  model.manifold.eigenvectors = take("manifold_eigenvectors");
  model.manifold.full_spectrum = vec("manifold_spectrum");
  model.manifold.coords = take("manifold_coords");
  model.manifold.t = field<int>(meta, "t");
  model.manifold.bandwidth = s[2];
  model.manifold.trivial_eigenvalue = s[3];
  model.manifold.trivial_residual = s[4];

  model.lift.kind = lift_kind_from_string(field<std::string>(meta, "lift"));
  model.lift.lambda = s[5];
  model.lift.offset = s[6];
  model.lift.degree = field<int>(meta, "lift_degree");
  model.lift.neighbors = field<Eigen::Index>(meta, "lift_neighbors");
  if (model.lift.kind == LiftKind::Ridge) {
    model.lift.K_lift = take("lift_K");
  } else {
    model.lift.train_coords = take("lift_train_coords");
    model.lift.dual = take("lift_dual");
  }

  LinearPredictor& lp = model.linear_predictor;
  lp.A1 = take("dmd_A1");
  lp.modes = join_complex(take("dmd_modes_re"), take("dmd_modes_im"));
  lp.eigenvalues = join_complex(take("dmd_eigenvalues_re"), take("dmd_eigenvalues_im"));
  lp.amplitudes = join_complex(take("dmd_amplitudes_re"), take("dmd_amplitudes_im"));
  lp.lambda = s[7];
  lp.anchor_index = field<Eigen::Index>(meta, "anchor_index");

  NonlinearPredictor& np = model.nonlinear_predictor;
  np.basis.bandwidth = s[8];
  np.basis.eigenvalues = vec("gh_eigenvalues");
  np.basis.harmonics = take("gh_harmonics");
  np.basis.degrees = vec("gh_degrees");
  np.one_step = take("gh_one_step");
  np.coefficients = take("gh_coefficients");
  np.train_coords = take("gh_train_coords");
  np.lambda = s[9];
  np.mode = nonlinear_mode_from_string(field<std::string>(meta, "nonlinear_mode"));
  np.row_normalize = field<bool>(meta, "row_normalize");

  model.check_consistency();
  return model;
}

}  // namespace pmd
