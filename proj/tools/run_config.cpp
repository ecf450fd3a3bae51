#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "rbfloi/errors.hpp"

namespace rbfloi::cli {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

bool known_key(const std::string& k) {
  const auto& keys = config_keys();
  return std::any_of(keys.begin(), keys.end(), [&](const ConfigKey& c) { return c.name == k; });
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* want) {
  throw Error(ErrorKind::config, "key '" + key + "': expected " + want + ", got '" + value + "'");
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) bad_value(key, v, "a number");
  return out;
}

long to_long(const std::string& key, const std::string& v) {
  long out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

std::uint64_t to_seed(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) bad_value(key, v, "an unsigned integer");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "a boolean");
}

std::vector<int> to_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  std::stringstream ss(v);
  for (std::string item; std::getline(ss, item, ',');) {
    out.push_back(static_cast<int>(to_long(key, trim(item))));
  }
  if (out.empty()) bad_value(key, v, "a comma-separated list");
  return out;
}

ProblemKind problem_from_string(const std::string& s) {
  if (s == "advection") return ProblemKind::advection;
  if (s == "diffusion") return ProblemKind::diffusion;
  if (s == "cahn_hilliard") return ProblemKind::cahn_hilliard;
  if (s == "fhn") return ProblemKind::fhn;
  if (s == "turing") return ProblemKind::turing;
  throw Error(ErrorKind::config,
              "unknown problem '" + s + "' (advection, diffusion, cahn_hilliard, fhn, turing)");
}

double default_tau(ProblemKind p, int degree) {
  if (p == ProblemKind::advection) {
    if (degree <= 2) return 1e-2;
    if (degree == 3) return 1e-3;
    return 1e-4;
  }
  return degree <= 5 ? 1e-3 : 1e-4;
}

}  // namespace

std::string_view to_string(ProblemKind p) {
  switch (p) {
    case ProblemKind::advection: return "advection";
    case ProblemKind::diffusion: return "diffusion";
    case ProblemKind::cahn_hilliard: return "cahn_hilliard";
    case ProblemKind::fhn: return "fhn";
    case ProblemKind::turing: return "turing";
  }
  return "unknown";
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys{
      {"problem", "advection | diffusion | cahn_hilliard | fhn | turing"},
      {"surface", "sphere | torus | double_torus | external (default follows the problem)"},
      {"nodes_file", "node file \"x y z nx ny nz\" (implies surface = external)"},
      {"level", "sphere subdivision level"},
      {"count", "node count for torus and double torus"},
      {"levels", "comma-separated sphere levels for convergence"},
      {"counts", "comma-separated node counts for convergence"},
      {"node_seed", "seed for torus and double torus node generation"},
      {"order", "target order of accuracy; sets degree = order + 1"},
      {"degree", "polynomial degree"},
      {"stencil_size", "stencil size n (default 2M + 1)"},
      {"basis_size", "polynomial basis size M (default C(degree + 3, 3))"},
      {"phs_exponent", "odd PHS exponent m (default 2 degree + 1)"},
      {"delta", "overlap parameter in (0.2, 1]"},
      {"tau", "LOI tolerance"},
      {"final_time", "final time"},
      {"dt", "time step"},
      {"snapshot_every", "write a snapshot every this many steps (0: first and last only)"},
      {"progress_every", "print field norms every this many steps"},
      {"ic_seed", "seed for random initial conditions"},
      {"center_seed", "seed for the torus manufactured solution centers"},
      {"exact_startup", "seed BDF4 history with the exact solution (diffusion)"},
      {"u_max", "velocity bound in the hyperviscosity coefficient, or 'auto'"},
      {"gamma", "hyperviscosity coefficient override"},
      {"allow_zero_gamma", "permit gamma = 0 (advection may be unstable)"},
      {"lambda_tol", "relative tolerance of the largest-real-part estimate"},
      {"nu", "Cahn-Hilliard mobility"},
      {"ch_gamma", "Cahn-Hilliard interface parameter"},
      {"fhn_delta1", "FitzHugh-Nagumo diffusion coefficient (required)"},
      {"turing_delta1", "Turing diffusion of the first species"},
      {"turing_delta2", "Turing diffusion of the second species"},
      {"turing_tau1", "Turing tau1"},
      {"turing_tau2", "Turing tau2"},
      {"turing_alpha", "Turing alpha"},
      {"turing_beta", "Turing beta"},
      {"turing_gamma1", "Turing gamma1"},
      {"write_gradients", "assemble: also write the gradient operators"},
      {"output", "output directory"},
  };
  return keys;
}

RawConfig read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::parse, "cannot open config file " + path.string());
  RawConfig out;
  int lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::parse, path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    if (!known_key(key)) {
      throw Error(ErrorKind::parse, path.string() + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
    }
    out[key] = trim(t.substr(eq + 1));
  }
  return out;
}

RunConfig resolve_config(const std::string& command, const RawConfig& raw) {
  for (const auto& [k, v] : raw) {
    if (!known_key(k)) throw Error(ErrorKind::config, "unknown key '" + k + "'");
  }
  auto get = [&](const std::string& k) -> const std::string* {
    const auto it = raw.find(k);
    return it == raw.end() ? nullptr : &it->second;
  };

  RunConfig c;
  c.command = command;
  c.raw = raw;
  if (const auto* v = get("problem")) c.problem = problem_from_string(*v);

  switch (c.problem) {
    case ProblemKind::advection: c.surface = SurfaceId::sphere; break;
    case ProblemKind::diffusion: c.surface = SurfaceId::torus; break;
    default: c.surface = SurfaceId::double_torus; break;
  }
  if (const auto* v = get("surface")) c.surface = surface_from_string(*v);
  if (const auto* v = get("nodes_file")) {
    c.nodes_file = *v;
    c.surface = SurfaceId::external;
  }
  if (c.surface == SurfaceId::external && !c.nodes_file) {
    throw Error(ErrorKind::config, "surface = external needs nodes_file");
  }

  if (const auto* v = get("node_seed")) c.node_seed = to_seed("node_seed", *v);
  const bool sphere = c.surface == SurfaceId::sphere;
  const bool multi = command == "convergence";
  if (multi) {
    if (c.nodes_file) throw Error(ErrorKind::config, "convergence needs generated node sets, not nodes_file");
    const char* key = sphere ? "levels" : "counts";
    if (const auto* v = get(key)) {
      c.levels = to_list(key, *v);
    } else if (sphere) {
      c.levels = {2, 3, 4, 5};
    } else if (c.surface == SurfaceId::torus) {
      c.levels = {1000, 2000, 4000, 8000, 16000};
    } else {
      c.levels = {1000, 2000, 4000};
    }
    if (c.levels.size() < 3) throw Error(ErrorKind::config, "convergence needs at least three refinements");
  } else if (!c.nodes_file) {
    const char* key = sphere ? "level" : "count";
    if (const auto* v = get(key)) c.levels = {static_cast<int>(to_long(key, *v))};
    else c.levels = {sphere ? 4 : (c.surface == SurfaceId::torus ? 4000 : 2000)};
  }

  if (get("order") && get("degree")) throw Error(ErrorKind::config, "give either order or degree, not both");
  int degree = 4;
  if (const auto* v = get("degree")) degree = static_cast<int>(to_long("degree", *v));
  if (const auto* v = get("order")) degree = static_cast<int>(to_long("order", *v)) + 1;
  const double tau = get("tau") ? to_double("tau", *get("tau")) : default_tau(c.problem, degree);
  c.assembly = get("order") ? AssemblyConfig::from_order(static_cast<int>(to_long("order", *get("order"))), 2, tau)
                            : AssemblyConfig::from_degree(degree, tau);
  if (const auto* v = get("basis_size")) {
    c.assembly.basis_size = static_cast<int>(to_long("basis_size", *v));
    c.assembly.stencil_size = 2 * c.assembly.basis_size + 1;
  }
  if (const auto* v = get("stencil_size")) c.assembly.stencil_size = static_cast<int>(to_long("stencil_size", *v));
  if (const auto* v = get("phs_exponent")) c.assembly.phs_exponent = static_cast<int>(to_long("phs_exponent", *v));
  if (const auto* v = get("delta")) c.assembly.delta = to_double("delta", *v);
  c.assembly.validate();

  ReactionParams& rp = c.reaction;
  auto set_double = [&](const char* key, double& target) {
    if (const auto* v = get(key)) target = to_double(key, *v);
  };
  set_double("nu", rp.cahn_hilliard.nu);
  set_double("ch_gamma", rp.cahn_hilliard.gamma);
  if (const auto* v = get("fhn_delta1")) rp.fhn.delta1 = to_double("fhn_delta1", *v);
  set_double("turing_delta1", rp.turing.delta1);
  set_double("turing_delta2", rp.turing.delta2);
  set_double("turing_tau1", rp.turing.tau1);
  set_double("turing_tau2", rp.turing.tau2);
  set_double("turing_alpha", rp.turing.alpha);
  set_double("turing_beta", rp.turing.beta);
  set_double("turing_gamma1", rp.turing.gamma1);
  if (c.problem == ProblemKind::fhn && !rp.fhn.delta1 && (command == "solve" || command == "convergence")) {
    throw Error(ErrorKind::config, "fhn needs fhn_delta1; no default is assumed");
  }

  switch (c.problem) {
    case ProblemKind::advection:
      c.final_time = kDeformationPeriod;
      c.dt = kDeformationPeriod / 2400.0;
      break;
    case ProblemKind::diffusion:
      c.final_time = 0.2;
      c.dt = 1e-3;
      break;
    case ProblemKind::cahn_hilliard:
      c.final_time = 1.0;
      c.dt = 1e-4;
      break;
    case ProblemKind::fhn:
      c.final_time = 10.0;
      c.dt = 1e-2;
      break;
    case ProblemKind::turing:
      c.final_time = 50.0;
      c.dt = 1e-2;
      break;
  }
  set_double("final_time", c.final_time);
  set_double("dt", c.dt);
  if (!(c.dt > 0.0) || !(c.final_time >= 0.0)) {
    throw Error(ErrorKind::config, "dt must be positive and final_time nonnegative");
  }
  if (const auto* v = get("snapshot_every")) c.snapshot_every = to_long("snapshot_every", *v);
  if (const auto* v = get("progress_every")) c.progress_every = to_long("progress_every", *v);
  if (const auto* v = get("ic_seed")) c.ic_seed = to_seed("ic_seed", *v);
  if (const auto* v = get("center_seed")) c.center_seed = to_seed("center_seed", *v);
  if (const auto* v = get("exact_startup")) c.exact_startup = to_bool("exact_startup", *v);

  if (const auto* v = get("u_max")) {
    if (*v == "auto") c.u_max.reset();
    else c.u_max = to_double("u_max", *v);
  }
  if (const auto* v = get("gamma")) c.gamma_override = to_double("gamma", *v);
  if (const auto* v = get("allow_zero_gamma")) c.allow_zero_gamma = to_bool("allow_zero_gamma", *v);
  set_double("lambda_tol", c.lambda_tol);
  if (c.gamma_override && *c.gamma_override == 0.0 && !c.allow_zero_gamma && c.problem == ProblemKind::advection) {
    throw Error(ErrorKind::config,
                "gamma = 0 disables hyperviscosity and advection may be unstable; set allow_zero_gamma = true");
  }

  if (const auto* v = get("write_gradients")) c.write_gradients = to_bool("write_gradients", *v);
  if (const auto* v = get("output")) c.output = *v;
  return c;
}

nlohmann::json config_json(const RunConfig& c) {
  nlohmann::json j;
  j["command"] = c.command;
  j["problem"] = std::string(to_string(c.problem));
  j["surface"] = std::string(to_string(c.surface));
  if (c.nodes_file) j["nodes_file"] = c.nodes_file->string();
  j["refinements"] = c.levels;
  j["node_seed"] = c.node_seed;
  const AssemblyConfig& a = c.assembly;
  j["assembly"] = {{"target_order", a.target_order}, {"operator_order", a.operator_order},
                   {"degree", a.degree},             {"basis_size", a.basis_size},
                   {"stencil_size", a.stencil_size}, {"phs_exponent", a.phs_exponent},
                   {"delta", a.delta},               {"tau", a.tau}};
  j["final_time"] = c.final_time;
  j["dt"] = c.dt;
  j["snapshot_every"] = c.snapshot_every;
  j["ic_seed"] = c.ic_seed;
  j["center_seed"] = c.center_seed;
  j["exact_startup"] = c.exact_startup;
  j["u_max"] = c.u_max ? nlohmann::json(*c.u_max) : nlohmann::json("auto");
  j["gamma_override"] = c.gamma_override ? nlohmann::json(*c.gamma_override) : nlohmann::json(nullptr);
  j["allow_zero_gamma"] = c.allow_zero_gamma;
  j["lambda_tol"] = c.lambda_tol;
  const ReactionParams& r = c.reaction;
  j["cahn_hilliard"] = {{"nu", r.cahn_hilliard.nu}, {"gamma", r.cahn_hilliard.gamma}};
  j["fhn"] = {{"delta1", r.fhn.delta1 ? nlohmann::json(*r.fhn.delta1) : nlohmann::json(nullptr)}};
  j["turing"] = {{"delta1", r.turing.delta1}, {"delta2", r.turing.delta2}, {"tau1", r.turing.tau1},
                 {"tau2", r.turing.tau2},     {"alpha", r.turing.alpha},   {"beta", r.turing.beta},
                 {"gamma1", r.turing.gamma1}};
  j["output"] = c.output.string();
  j["given"] = c.raw;
  return j;
}

}  // namespace rbfloi::cli
