#include "sqrtlasso/io.hpp"

#include "sqrtlasso/applications.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace sqrtlasso {

namespace {

constexpr int kSchemaVersion = 1;

double parse_double(const std::string& token, const std::string& path) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(token, &pos);
  } catch (const std::exception&) {
    throw IoError(path + ": not a number: '" + token + "'");
  }
  if (pos != token.size()) throw IoError(path + ": trailing junk in '" + token + "'");
  return v;
}

std::vector<std::vector<double>> read_csv_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string token;
    while (std::getline(ss, token, ',')) row.push_back(parse_double(token, path));
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError(path + ": ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(path + ": empty file");
  return rows;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

void write_csv(const std::string& path, const Vector& v) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  for (Index i = 0; i < v.size(); ++i) out << format_double(v[i]) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

Matrix read_csv_matrix(const std::string& path) {
  auto rows = read_csv_rows(path);
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return m;
}

Vector read_csv_vector(const std::string& path) {
  auto rows = read_csv_rows(path);
  if (rows.front().size() != 1) throw IoError(path + ": expected a single column");
  Vector v(static_cast<Index>(rows.size()));
  for (Index i = 0; i < v.size(); ++i) v[i] = rows[static_cast<std::size_t>(i)][0];
  return v;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  Json j = Json::parse(in, nullptr, false);
  if (j.is_discarded()) throw IoError(path + ": invalid JSON");
  return j;
}

Json result_to_json(const SolveResult& result, double sigma_hat) {
  Json theta = Json::object();
  for (Index j = 0; j < result.theta_hat.size(); ++j)
    if (result.theta_hat[j] != 0.0) theta[std::to_string(j)] = result.theta_hat[j];
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["theta"] = std::move(theta);
  j["omega"] = result.omega;
  j["objective"] = result.objective;
  j["iterations"] = result.iterations;
  j["status"] = to_string(result.status);
  j["sigma_hat"] = sigma_hat;
  return j;
}

Json path_to_json(const PathResult& result, const Problem& problem) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["lambdas"] = result.lambdas;
  j["eta_lambda"] = result.eta_lambda;
  Json stages = Json::array();
  for (std::size_t k = 0; k < result.stage_results.size(); ++k) {
    const SolveResult& r = result.stage_results[k];
    double sigma_hat = estimate_sigma(problem, r.theta_hat);
    Json s;
    s["lambda"] = result.lambdas[k + 1 < result.lambdas.size() ? k + 1 : k];
    s["omega"] = r.omega;
    s["objective"] = r.objective;
    s["iterations"] = r.iterations;
    s["mse"] = sigma_hat * sigma_hat;
    s["sigma_hat"] = sigma_hat;
    stages.push_back(std::move(s));
  }
  j["stages"] = std::move(stages);
  j["minimal_mse"] = result.minimal_mse;
  j["total_inner_iterations"] = result.total_inner_iterations;
  j["status"] = to_string(result.status);
  j["failed_stage"] = result.failed_stage;
  return j;
}

Json manifest_to_json(const RunManifest& manifest) {
  Json config = Json::object();
  for (const auto& [key, value] : manifest.config) config[key] = value;
  Json j;
  j["command"] = manifest.command;
  j["config"] = std::move(config);
  j["seed"] = manifest.seed;
  j["artifacts"] = manifest.artifacts;
  j["versions"] = manifest.versions;
  return j;
}

RunManifest manifest_from_json(const Json& j) {
  RunManifest m;
  try {
    m.command = j.at("command").get<std::string>();
    for (const auto& [key, value] : j.at("config").items())
      m.config.emplace_back(key, value.get<std::string>());
    m.seed = j.at("seed").get<std::int64_t>();
    m.artifacts = j.at("artifacts").get<std::vector<std::string>>();
    m.versions = j.at("versions").get<std::string>();
  } catch (const Json::exception& e) {
    throw IoError(std::string("bad manifest: ") + e.what());
  }
  return m;
}

void write_manifest(const std::string& out_dir, const RunManifest& manifest) {
  std::string path = out_dir;
  if (!path.empty() && path.back() != '/') path += '/';
  write_text(path + "manifest.json", manifest_to_json(manifest).dump(2) + "\n");
}

}  // namespace sqrtlasso
