#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rbfloi/problems.hpp"

namespace rbfloi {

// Wall-clock seconds per stage.
struct StageTimings {
  double assembly = 0.0;
  double factor = 0.0;
  double solve = 0.0;
};

// Least-squares slope of -log(error) against log(sqrtN).
double convergence_slope(std::span<const double> sqrt_n, std::span<const double> error);

// Builds stencils and assembles; timings.assembly covers both.
GlobalOperators assemble_operators(const NodeSet& nodes, const AssemblyConfig& config,
                                   StageTimings& timings,
                                   Execution execution = Execution::parallel);

struct RunResult {
  int node_count = 0;
  int stencil_count = 0;
  double error = 0.0;  // NaN when no exact solution is known
  StageTimings timings;
  long steps = 0;
  double final_time = 0.0;
  Fields final_fields;
  int factorizations = 0;
  // Advection only.
  double lambda_max = 0.0;
  bool lambda_converged = true;
  HyperviscosityParams hyperviscosity;
  double u_max = 0.0;
};

using SnapshotFunction = std::function<void(const TimeState&)>;

struct TorusDiffusionOptions {
  double final_time = 0.2;
  double dt = 1e-3;
  bool exact_startup = true;  // otherwise BDF1-3 bootstrap
  std::uint64_t center_seed = TorusManufactured::kDefaultSeed;
  long snapshot_every = 0;
};

// Snapshots are taken at the start, every snapshot_every steps and at the end.
RunResult run_torus_diffusion(const NodeSet& nodes, const AssemblyConfig& config,
                              const TorusDiffusionOptions& options,
                              const Progress& progress = {},
                              const SnapshotFunction& snapshot = {});

struct AdvectionOptions {
  double final_time = kDeformationPeriod;
  double dt = kDeformationPeriod / 2400.0;
  // Velocity bound in the hyperviscosity coefficient; unset means the
  // maximum over the nodes at t = 0.
  std::optional<double> u_max = 1.0;
  std::optional<double> gamma_override;
  bool allow_zero_gamma = false;
  double lambda_tol = 8e-2;
  long snapshot_every = 0;
};

RunResult run_sphere_advection(const NodeSet& nodes, const AssemblyConfig& config,
                               const AdvectionOptions& options, const Progress& progress = {},
                               const SnapshotFunction& snapshot = {});

struct ReactionOptions {
  ReactionParams params;
  double final_time = 1.0;
  std::optional<double> dt;  // problem default when unset
  std::uint64_t seed = 1;
  long snapshot_every = 0;
};

RunResult run_reaction(ReactionModel model, const NodeSet& nodes, const AssemblyConfig& config,
                       const ReactionOptions& options, const Progress& progress = {},
                       const SnapshotFunction& snapshot = {});

struct SpectrumSummary {
  std::vector<std::complex<double>> eigenvalues;
  double max_real = 0.0;
  double min_real = 0.0;
};

SpectrumSummary laplacian_spectrum(const SparseMatrix& laplacian);

}  // namespace rbfloi
