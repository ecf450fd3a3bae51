#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rbfloi/drivers.hpp"

namespace rbfloi::cli {

enum class ProblemKind { advection, diffusion, cahn_hilliard, fhn, turing };

std::string_view to_string(ProblemKind p);

struct ConfigKey {
  std::string name;
  std::string help;
};

// Every accepted key; the same names are used in config files and as long
// command-line flags.
const std::vector<ConfigKey>& config_keys();

// Raw key/value pairs. Later layers override earlier ones.
using RawConfig = std::map<std::string, std::string>;

// "key = value" per line, '#' starts a comment. Unknown keys are an error.
RawConfig read_config_file(const std::filesystem::path& path);

struct RunConfig {
  std::string command;
  ProblemKind problem = ProblemKind::diffusion;
  SurfaceId surface = SurfaceId::torus;
  std::optional<std::filesystem::path> nodes_file;
  // One entry per refinement: sphere subdivision levels or node counts.
  std::vector<int> levels;
  std::uint64_t node_seed = 1;

  AssemblyConfig assembly;

  double final_time = 0.0;
  double dt = 0.0;
  long snapshot_every = 0;
  long progress_every = 0;
  std::uint64_t ic_seed = 1;
  std::uint64_t center_seed = TorusManufactured::kDefaultSeed;
  bool exact_startup = true;

  std::optional<double> u_max = 1.0;
  std::optional<double> gamma_override;
  bool allow_zero_gamma = false;
  double lambda_tol = 8e-2;

  ReactionParams reaction;

  bool write_gradients = false;
  std::filesystem::path output = "rbfloi_out";

  RawConfig raw;  // as given, for the metadata record
};

// Applies defaults that depend on the problem and validates the result.
RunConfig resolve_config(const std::string& command, const RawConfig& raw);

nlohmann::json config_json(const RunConfig& c);

}  // namespace rbfloi::cli
