#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "pnpkit/core.hpp"
#include "pnpkit/denoisers.hpp"
#include "pnpkit/operators.hpp"
#include "pnpkit/solvers.hpp"

namespace pnpkit::cli {

using Json = nlohmann::json;

/// Invalid or inconsistent configuration (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A requested --assert check failed (exit code 3).
class AssertionFailure : public Error {
 public:
  using Error::Error;
};

struct Context {
  std::filesystem::path base_dir;
  std::uint64_t seed = 0;
};

Json load_config(const std::filesystem::path& path);

/// Rejects keys outside `allowed`.
void check_keys(const Json& obj, std::initializer_list<const char*> allowed, const std::string& where);
void require_object(const Json& j, const std::string& where);

double get_number(const Json& obj, const char* key, double fallback, const std::string& where);
int get_int(const Json& obj, const char* key, int fallback, const std::string& where);
bool get_bool(const Json& obj, const char* key, bool fallback, const std::string& where);
std::string get_string(const Json& obj, const char* key, const std::string& fallback, const std::string& where);
std::vector<double> get_numbers(const Json& obj, const char* key, const std::string& where);

/// FNV-1a over the canonical dump of the config and the seed, as 16 hex digits.
std::string config_hash(const Json& config, std::uint64_t seed);

std::filesystem::path resolve(const Context& ctx, const std::string& path);

/// A builtin name, {"builtin": name, "size": n}, {"path": file} or {"values": [...]}.
Signal load_image_spec(const Json& spec, const Context& ctx);
std::string image_label(const Json& spec);

/// {"type": identity|blur|mask|diagonal|dense, ...}.
LinearOp build_operator(const Json& spec, const Shape& image_shape, const Context& ctx);

/// {"sigma": s} or {"percent": p}; p percent of the unit peak.
double noise_sigma(const Json& spec);

struct DenoiserSpec {
  Denoiser denoiser;
  /// σ handed to the denoiser; NaN means "use the noise level".
  double sigma = std::numeric_limits<double>::quiet_NaN();
};

DenoiserSpec build_denoiser(const Json& spec, const Shape& image_shape, const Context& ctx);

const std::vector<std::string>& algorithm_names();

struct SolverSpec {
  std::string algo;
  std::string label;
  SolverConfig cfg;
  double lambda = 1.0;
  /// RED-GD step; NaN selects 1/(‖K‖² + 2λ/σ²).
  double eta = std::numeric_limits<double>::quiet_NaN();
  double l = 2.0;
  BacktrackingOptions backtracking;
  Json hqs;
  std::optional<Json> denoiser;
};

SolverSpec parse_solver(const Json& spec);

/// Runs one configured algorithm with x0 = Kᵀy.
SolverResult run_algorithm(const SolverSpec& spec, const LinearOp& k, const Signal& y, const DenoiserSpec& den,
                           double noise);

}  // namespace pnpkit::cli
