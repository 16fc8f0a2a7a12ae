#pragma once

#include "sqrtlasso/path.hpp"
#include "sqrtlasso/solve_result.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace sqrtlasso {

// Field order in emitted JSON is part of the file contract.
using Json = nlohmann::ordered_json;

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// CSV: headerless, comma-separated, 17 significant digits.
std::string format_double(double v);
void write_csv(const std::string& path, const Matrix& m);
void write_csv(const std::string& path, const Vector& v);
Matrix read_csv_matrix(const std::string& path);
Vector read_csv_vector(const std::string& path);

void write_text(const std::string& path, const std::string& text);
Json read_json(const std::string& path);

// result.json: theta as sparse index:value pairs keyed by the decimal index.
Json result_to_json(const SolveResult& result, double sigma_hat);

// path.json: grid, per-stage {lambda, omega, objective, iterations, mse,
// sigma_hat}, minimal_mse, total_inner_iterations.
Json path_to_json(const PathResult& result, const Problem& problem);

// One manifest per output directory; round-trips losslessly.
struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> config;  // flag snapshot
  std::int64_t seed = 0;
  std::vector<std::string> artifacts;
  std::string versions;

  bool operator==(const RunManifest&) const = default;
};

Json manifest_to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const Json& j);
void write_manifest(const std::string& out_dir, const RunManifest& manifest);

}  // namespace sqrtlasso
