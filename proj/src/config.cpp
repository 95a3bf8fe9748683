#include "pmd/errors.hpp"
#include "pmd/rom.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

namespace pmd {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const std::string t = trim(text);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
  return value;
}

double parse_auto_double(const std::string& key, const std::string& text) {
  return trim(text) == "median" || trim(text) == "auto" ? 0.0 : parse_number<double>(key, text);
}

}  // namespace

void PmdConfig::validate() const {
  if (linear_rank.kind == RankCriterion::Kind::FixedRank && linear_rank.rank < 1)
    throw ConfigError("r_linear must be >= 1");
  if (linear_rank.kind == RankCriterion::Kind::EnergyFraction &&
      !(linear_rank.epsilon > 0.0 && linear_rank.epsilon < 1.0))
    throw ConfigError("r_linear energy fraction must lie in (0, 1)");
  if (manifold_rank.kind == ManifoldRank::Kind::Fixed && manifold_rank.rank < 1)
    throw ConfigError("r_manifold must be >= 1");
  if (t < 1) throw ConfigError("t must be >= 1");
  if (knn_graph < 0) throw ConfigError("knn_graph must be >= 0");
  if (bandwidth < 0.0 || phi_bandwidth < 0.0) throw ConfigError("bandwidths must be >= 0");
  if (!(lift_lambda >= 0.0) || !(lambda_dmd >= 0.0) || !(lambda_w >= 0.0))
    throw ConfigError("regularization parameters must be >= 0");
  if (lift == LiftKind::KernelRidge && !(lift_lambda > 0.0))
    throw ConfigError("kernel lift requires lift_lambda > 0");
  if (lift_degree < 1) throw ConfigError("lift_d must be >= 1");
  if (lift_neighbors < 0) throw ConfigError("lift_knn must be >= 0");
  if (harmonics < 1) throw ConfigError("r_h must be >= 1");
  if (!(energy_target > 0.0 && energy_target < 1.0))
    throw ConfigError("energy_target must lie in (0, 1)");
}

std::map<std::string, std::string> config_to_map(const PmdConfig& cfg) {
  std::map<std::string, std::string> out;
  out["r_linear"] = cfg.linear_rank.kind == RankCriterion::Kind::FixedRank
                        ? std::to_string(cfg.linear_rank.rank)
                        : "energy:" + format_double(cfg.linear_rank.epsilon);
  out["r_manifold"] = cfg.manifold_rank.kind == ManifoldRank::Kind::Fixed
                          ? std::to_string(cfg.manifold_rank.rank)
                          : "gap";
  out["t"] = std::to_string(cfg.t);
  out["knn_graph"] = std::to_string(cfg.knn_graph);
  out["bandwidth"] = cfg.bandwidth == 0.0 ? "median" : format_double(cfg.bandwidth);
  out["lift"] = to_string(cfg.lift);
  out["lift_lambda"] = format_double(cfg.lift_lambda);
  out["lift_c"] = format_double(cfg.lift_offset);
  out["lift_d"] = std::to_string(cfg.lift_degree);
  out["lift_knn"] = std::to_string(cfg.lift_neighbors);
  out["lambda_dmd"] = format_double(cfg.lambda_dmd);
  out["lambda_w"] = format_double(cfg.lambda_w);
  out["r_h"] = std::to_string(cfg.harmonics);
  out["normalization"] = to_string(cfg.normalization);
  out["energy_target"] = format_double(cfg.energy_target);
  out["nonlinear_mode"] = to_string(cfg.nonlinear_mode);
  out["phi_bandwidth"] = cfg.phi_bandwidth == 0.0 ? "median" : format_double(cfg.phi_bandwidth);
  return out;
}

void apply_config_value(PmdConfig& cfg, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "r_linear") {
    if (value.rfind("energy:", 0) == 0)
      cfg.linear_rank = RankCriterion::energy(parse_number<double>(key, value.substr(7)));
    else
      cfg.linear_rank = RankCriterion::fixed(parse_number<Eigen::Index>(key, value));
  } else if (key == "r_manifold") {
    if (value == "gap") cfg.manifold_rank = {ManifoldRank::Kind::SpectralGap, 0};
    else cfg.manifold_rank = {ManifoldRank::Kind::Fixed, parse_number<Eigen::Index>(key, value)};
  } else if (key == "t") {
    cfg.t = parse_number<int>(key, value);
  } else if (key == "knn_graph") {
    cfg.knn_graph = value == "auto" ? 0 : parse_number<Eigen::Index>(key, value);
  } else if (key == "bandwidth") {
    cfg.bandwidth = parse_auto_double(key, value);
  } else if (key == "lift") {
    cfg.lift = lift_kind_from_string(value);
  } else if (key == "lift_lambda") {
    cfg.lift_lambda = parse_number<double>(key, value);
  } else if (key == "lift_c") {
    cfg.lift_offset = parse_number<double>(key, value);
  } else if (key == "lift_d") {
    cfg.lift_degree = parse_number<int>(key, value);
  } else if (key == "lift_knn") {
    cfg.lift_neighbors = parse_number<Eigen::Index>(key, value);
  } else if (key == "lambda_dmd") {
    cfg.lambda_dmd = parse_number<double>(key, value);
  } else if (key == "lambda_w") {
    cfg.lambda_w = parse_number<double>(key, value);
  } else if (key == "r_h") {
    cfg.harmonics = parse_number<Eigen::Index>(key, value);
  } else if (key == "normalization") {
    cfg.normalization = norm_mode_from_string(value);
  } else if (key == "energy_target") {
    cfg.energy_target = parse_number<double>(key, value);
  } else if (key == "nonlinear_mode") {
    cfg.nonlinear_mode = nonlinear_mode_from_string(value);
  } else if (key == "phi_bandwidth") {
    cfg.phi_bandwidth = parse_auto_double(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

PmdConfig config_from_map(const std::map<std::string, std::string>& values) {
  PmdConfig cfg;
  for (const auto& [key, value] : values) apply_config_value(cfg, key, value);
  cfg.validate();
  return cfg;
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    PmdConfig probe;
    apply_config_value(probe, key, value);  // rejects unknown keys early
    out[key] = value;
  }
  return out;
}

}  // namespace pmd
