#include "rbfloi/drivers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "rbfloi/errors.hpp"

namespace rbfloi {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

long step_count(double final_time, double dt) {
  if (!(dt > 0.0) || !(final_time >= 0.0)) {
    throw Error(ErrorKind::config, "final time must be nonnegative and dt positive");
  }
  return std::lround(final_time / dt);
}

// Advances to `total` steps, snapshotting at every multiple of `every` and at
// the end.
template <class Advance>
TimeState advance_in_chunks(TimeState state, long total, long every, const SnapshotFunction& snapshot,
                            Advance advance) {
  while (state.step < total) {
    const long target = every > 0 ? std::min(total, (state.step / every + 1) * every) : total;
    state = advance(std::move(state), target - state.step);
    if (snapshot) snapshot(state);
  }
  return state;
}

}  // namespace

double convergence_slope(std::span<const double> sqrt_n, std::span<const double> error) {
  if (sqrt_n.size() != error.size() || sqrt_n.size() < 2) {
    throw Error(ErrorKind::config, "convergence_slope: need at least two matching samples");
  }
  const auto m = static_cast<double>(sqrt_n.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < sqrt_n.size(); ++i) {
    if (!(sqrt_n[i] > 0.0) || !(error[i] > 0.0)) {
      throw Error(ErrorKind::config, "convergence_slope: samples must be positive");
    }
    const double x = std::log(sqrt_n[i]), y = std::log(error[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = m * sxx - sx * sx;
  if (denom == 0.0) throw Error(ErrorKind::config, "convergence_slope: identical resolutions");
  return -(m * sxy - sx * sy) / denom;
}

GlobalOperators assemble_operators(const NodeSet& nodes, const AssemblyConfig& config,
                                   StageTimings& timings, Execution execution) {
  config.validate();
  const auto t0 = Clock::now();
  const StencilSet stencils = build_stencils(nodes, config.stencil_size, config.delta);
  GlobalOperators ops = assemble_global(stencils, nodes, config, execution);
  timings.assembly += seconds_since(t0);
  return ops;
}

RunResult run_torus_diffusion(const NodeSet& nodes, const AssemblyConfig& config,
                              const TorusDiffusionOptions& options, const Progress& progress,
                              const SnapshotFunction& snapshot) {
  RunResult out;
  out.node_count = static_cast<int>(nodes.size());
  const GlobalOperators ops = assemble_operators(nodes, config, out.timings);
  out.stencil_count = ops.stencil_count;

  const TorusManufactured manufactured(options.center_seed);
  const PDEProblem problem = torus_diffusion_problem(manufactured, options.final_time);
  const double dt = options.dt;
  const long total = step_count(options.final_time, dt);
  if (total < 3) throw Error(ErrorKind::config, "torus diffusion needs at least three steps");

  ImplicitOperator op({ops.laplacian});
  auto t0 = Clock::now();
  op.prepare(0, 25.0 / 12.0, dt);
  out.timings.factor = seconds_since(t0);

  const ForcingFunction forcing = [&](double t) { return Fields{manufactured.forcing_at(t, nodes)}; };
  t0 = Clock::now();
  TimeState state;
  if (options.exact_startup) {
    if (snapshot) {
      TimeState first;
      first.fields = problem.initial(nodes);
      snapshot(first);
    }
    state = seed_exact([&](double t) { return problem.exact(nodes, t); }, 0.0, dt, 4);
    state.step = 3;
  } else {
    state.fields = problem.initial(nodes);
    if (snapshot) snapshot(state);
    state = bdf4_bootstrap(op, forcing, std::move(state), dt);
  }
  state = advance_in_chunks(std::move(state), total, options.snapshot_every, snapshot,
                            [&](TimeState s, long steps) {
                              return bdf4_advance(op, forcing, std::move(s), dt, steps, progress);
                            });
  out.timings.solve = seconds_since(t0);

  out.steps = state.step;
  out.final_time = state.t;
  out.error = relative_l2_error(state.fields[0], problem.exact(nodes, state.t)[0]);
  out.final_fields = std::move(state.fields);
  out.factorizations = op.factorization_count();
  return out;
}

RunResult run_sphere_advection(const NodeSet& nodes, const AssemblyConfig& config,
                               const AdvectionOptions& options, const Progress& progress,
                               const SnapshotFunction& snapshot) {
  RunResult out;
  out.node_count = static_cast<int>(nodes.size());
  GlobalOperators ops = assemble_operators(nodes, config, out.timings);
  out.stencil_count = ops.stencil_count;

  const VelocityFunction velocity = [&](double t, const Vec3& x) {
    return deformational_velocity(t, x, kDeformationPeriod);
  };
  if (options.u_max) {
    out.u_max = *options.u_max;
  } else {
    for (const auto& x : nodes.points) out.u_max = std::max(out.u_max, velocity(0.0, x).norm());
  }

  // The explicit scheme has no factorization; the eigenvalue estimate is its
  // preprocessing stage.
  auto t0 = Clock::now();
  if (options.gamma_override) {
    if (*options.gamma_override == 0.0 && !options.allow_zero_gamma) {
      throw Error(ErrorKind::config,
                  "advection without hyperviscosity may be unstable; pass the explicit "
                  "allow-zero-gamma flag to run it");
    }
    ops.hyperviscosity = hyperviscosity_params(0.0, config.stencil_size, out.node_count, 0.0);
    ops.hyperviscosity.gamma = *options.gamma_override;
  } else {
    const LambdaMaxEstimate lm = estimate_lambda_max(ops.g, options.lambda_tol);
    ops.lambda_max = lm.value;
    ops.lambda_converged = lm.converged;
    ops.hyperviscosity = hyperviscosity_params(std::max(lm.value, 0.0), config.stencil_size,
                                               out.node_count, out.u_max);
  }
  out.timings.factor = seconds_since(t0);
  out.lambda_max = ops.lambda_max;
  out.lambda_converged = ops.lambda_converged;
  out.hyperviscosity = ops.hyperviscosity;

  const PDEProblem problem = sphere_advection_problem();
  const RhsFunction rhs = [&](double t, const Fields& c) {
    return Fields{advection_rhs(ops, nodes.points, velocity, t, c[0])};
  };
  t0 = Clock::now();
  TimeState state;
  state.fields = problem.initial(nodes);
  if (snapshot) snapshot(state);
  state = advance_in_chunks(std::move(state), step_count(options.final_time, options.dt),
                            options.snapshot_every, snapshot, [&](TimeState s, long steps) {
                              return rk4_advance(rhs, std::move(s), options.dt, steps, progress);
                            });
  out.timings.solve = seconds_since(t0);

  out.steps = state.step;
  out.final_time = state.t;
  out.error = relative_l2_error(state.fields[0], problem.exact(nodes, state.t)[0]);
  out.final_fields = std::move(state.fields);
  return out;
}

RunResult run_reaction(ReactionModel model, const NodeSet& nodes, const AssemblyConfig& config,
                       const ReactionOptions& options, const Progress& progress,
                       const SnapshotFunction& snapshot) {
  RunResult out;
  out.node_count = static_cast<int>(nodes.size());
  const GlobalOperators ops = assemble_operators(nodes, config, out.timings);
  out.stencil_count = ops.stencil_count;

  const PDEProblem problem = reaction_problem(model, options.params, options.final_time, options.seed);
  const double dt = options.dt.value_or(problem.dt);
  const long total = step_count(options.final_time, dt);

  auto t0 = Clock::now();
  ImplicitOperator op(implicit_operators(model, options.params, ops.laplacian));
  for (int f = 0; f < op.field_count(); ++f) {
    op.prepare(f, 1.0, dt);
    op.prepare(f, 1.5, dt);
  }
  out.timings.factor = seconds_since(t0);

  const RhsFunction rhs = [&](double, const Fields& c) {
    return reaction_rhs(model, c, options.params, &ops.laplacian);
  };
  t0 = Clock::now();
  TimeState state;
  state.fields = problem.initial(nodes);
  if (snapshot) snapshot(state);
  state = advance_in_chunks(std::move(state), total, options.snapshot_every, snapshot,
                            [&](TimeState s, long steps) {
                              return sbdf2_advance(op, rhs, std::move(s), dt, steps, progress);
                            });
  out.timings.solve = seconds_since(t0);

  out.steps = state.step;
  out.final_time = state.t;
  out.error = std::numeric_limits<double>::quiet_NaN();
  out.final_fields = std::move(state.fields);
  out.factorizations = op.factorization_count();
  return out;
}

SpectrumSummary laplacian_spectrum(const SparseMatrix& laplacian) {
  SpectrumSummary s;
  s.eigenvalues = dense_spectrum(DenseMatrix(laplacian));
  s.max_real = -std::numeric_limits<double>::infinity();
  s.min_real = std::numeric_limits<double>::infinity();
  for (const auto& e : s.eigenvalues) {
    s.max_real = std::max(s.max_real, e.real());
    s.min_real = std::min(s.min_real, e.real());
  }
  return s;
}

}  // namespace rbfloi
