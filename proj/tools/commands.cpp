#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>

#include "rbfloi/errors.hpp"

#ifndef RBFLOI_VERSION
#define RBFLOI_VERSION "unknown"
#endif

namespace rbfloi::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path prepare_output(const RunConfig& c) {
  fs::create_directories(c.output);
  return c.output;
}

NodeSet make_nodes(const RunConfig& c, int refinement) {
  switch (c.surface) {
    case SurfaceId::sphere: return generate_sphere_nodes(refinement);
    case SurfaceId::torus: return generate_torus_nodes(refinement, c.node_seed);
    case SurfaceId::double_torus:
      return sample_implicit_surface(SurfaceId::double_torus, refinement, c.node_seed);
    case SurfaceId::external: return load_nodeset(*c.nodes_file);
  }
  throw Error(ErrorKind::config, "unknown surface");
}

NodeSet single_nodes(const RunConfig& c) {
  return make_nodes(c, c.levels.empty() ? 0 : c.levels.front());
}

json base_metadata(const RunConfig& c) {
  json j;
  j["software"] = {{"name", "rbfloi"}, {"version", RBFLOI_VERSION}};
  j["config"] = config_json(c);
  return j;
}

void write_metadata(const fs::path& dir, const json& j) {
  std::ofstream out(dir / "metadata.json");
  if (!out) throw Error(ErrorKind::config, "cannot write " + (dir / "metadata.json").string());
  out << j.dump(2) << '\n';
}

json timings_json(const StageTimings& t) {
  return {{"assembly", t.assembly}, {"factor", t.factor}, {"solve", t.solve}};
}

void write_snapshot(const fs::path& dir, const NodeSet& nodes, const TimeState& s) {
  char name[64];
  std::snprintf(name, sizeof name, "snapshot_%08ld.txt", s.step);
  std::ofstream out(dir / name);
  if (!out) throw Error(ErrorKind::config, "cannot write snapshot " + std::string(name));
  out.precision(17);
  out << "# step " << s.step << " t " << s.t << '\n';
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Vec3& x = nodes.points[i];
    out << x[0] << ' ' << x[1] << ' ' << x[2];
    for (const auto& f : s.fields) out << ' ' << f[static_cast<Eigen::Index>(i)];
    out << '\n';
  }
}

Progress make_progress(const RunConfig& c) {
  Progress p;
  p.every = c.progress_every;
  p.callback = [](long step, double t, std::span<const double> norms) {
    std::cerr << "step " << step << " t " << t << " |c|";
    for (double n : norms) std::cerr << ' ' << n;
    std::cerr << '\n';
  };
  return p;
}

RunResult run_problem(const RunConfig& c, const NodeSet& nodes, const SnapshotFunction& snapshot) {
  const Progress progress = make_progress(c);
  switch (c.problem) {
    case ProblemKind::advection: {
      AdvectionOptions o;
      o.final_time = c.final_time;
      o.dt = c.dt;
      o.u_max = c.u_max;
      o.gamma_override = c.gamma_override;
      o.allow_zero_gamma = c.allow_zero_gamma;
      o.lambda_tol = c.lambda_tol;
      o.snapshot_every = c.snapshot_every;
      return run_sphere_advection(nodes, c.assembly, o, progress, snapshot);
    }
    case ProblemKind::diffusion: {
      TorusDiffusionOptions o;
      o.final_time = c.final_time;
      o.dt = c.dt;
      o.exact_startup = c.exact_startup;
      o.center_seed = c.center_seed;
      o.snapshot_every = c.snapshot_every;
      return run_torus_diffusion(nodes, c.assembly, o, progress, snapshot);
    }
    default: {
      ReactionOptions o;
      o.params = c.reaction;
      o.final_time = c.final_time;
      o.dt = c.dt;
      o.seed = c.ic_seed;
      o.snapshot_every = c.snapshot_every;
      const auto model = reaction_model_from_string(to_string(c.problem));
      return run_reaction(model, nodes, c.assembly, o, progress, snapshot);
    }
  }
}

json result_json(const RunResult& r) {
  json j;
  j["node_count"] = r.node_count;
  j["stencil_count"] = r.stencil_count;
  j["steps"] = r.steps;
  j["final_time"] = r.final_time;
  j["error"] = std::isnan(r.error) ? json(nullptr) : json(r.error);
  j["timings"] = timings_json(r.timings);
  j["factorizations"] = r.factorizations;
  return j;
}

json hyperviscosity_json(const RunResult& r) {
  return {{"lambda_max", r.lambda_max},
          {"lambda_converged", r.lambda_converged},
          {"gamma", r.hyperviscosity.gamma},
          {"k", r.hyperviscosity.power},
          {"u_max", r.u_max}};
}

void write_text(const fs::path& p, const std::string& body) {
  std::ofstream out(p);
  if (!out) throw Error(ErrorKind::config, "cannot write " + p.string());
  out << body;
}

}  // namespace

int cmd_nodes(const RunConfig& c) {
  const fs::path dir = prepare_output(c);
  const NodeSet nodes = single_nodes(c);
  save_nodeset(dir / "nodes.txt", nodes);
  json meta = base_metadata(c);
  meta["nodes"] = {{"count", nodes.size()}, {"min_spacing", min_pairwise_distance(nodes)}};
  write_metadata(dir, meta);
  std::cout << "nodes " << nodes.size() << " -> " << (dir / "nodes.txt").string() << '\n';
  return 0;
}

int cmd_assemble(const RunConfig& c) {
  const fs::path dir = prepare_output(c);
  const NodeSet nodes = single_nodes(c);
  StageTimings t;
  const GlobalOperators ops = assemble_operators(nodes, c.assembly, t);
  write_operator_triplets(dir / "laplacian.txt", ops.laplacian);
  if (c.write_gradients) {
    const char* names[3] = {"gx.txt", "gy.txt", "gz.txt"};
    for (int k = 0; k < 3; ++k) write_operator_triplets(dir / names[k], ops.g[k]);
  }
  json meta = base_metadata(c);
  meta["operators"] = {{"node_count", nodes.size()},
                       {"stencil_count", ops.stencil_count},
                       {"laplacian_nonzeros", ops.laplacian.nonZeros()},
                       {"eliminated_basis_functions", ops.total_eliminated}};
  meta["timings"] = timings_json(t);
  write_metadata(dir, meta);
  std::cout << "N " << nodes.size() << " stencils " << ops.stencil_count << " nnz(L) "
            << ops.laplacian.nonZeros() << " assembly " << t.assembly << " s\n";
  return 0;
}

int cmd_spectrum(const RunConfig& c) {
  const fs::path dir = prepare_output(c);
  const NodeSet nodes = single_nodes(c);
  if (static_cast<Eigen::Index>(nodes.size()) > kDenseSpectrumCap) {
    throw Error(ErrorKind::config, "N = " + std::to_string(nodes.size()) + " exceeds the dense spectrum cap of " +
                                       std::to_string(kDenseSpectrumCap) +
                                       "; use the largest-real-part estimate (solve with problem = advection) instead");
  }
  StageTimings t;
  const GlobalOperators ops = assemble_operators(nodes, c.assembly, t);
  const SpectrumSummary s = laplacian_spectrum(ops.laplacian);
  std::ofstream csv(dir / "spectrum.csv");
  csv.precision(17);
  csv << "re,im\n";
  for (const auto& e : s.eigenvalues) csv << e.real() << ',' << e.imag() << '\n';
  write_text(dir / "spectrum.gp",
             "set datafile separator ','\n"
             "set key off\n"
             "set xlabel 'Re'\n"
             "set ylabel 'Im'\n"
             "set title 'Eigenvalues of the Laplacian'\n"
             "plot 'spectrum.csv' every ::1 using 1:2 with points pt 7 ps 0.4\n"
             "pause mouse close\n");
  json meta = base_metadata(c);
  meta["spectrum"] = {{"size", s.eigenvalues.size()},
                      {"max_real", s.max_real},
                      {"min_real", s.min_real},
                      {"stable", s.max_real <= 1e-6 * std::abs(s.min_real)}};
  meta["timings"] = timings_json(t);
  write_metadata(dir, meta);
  std::cout << "max Re " << s.max_real << " min Re " << s.min_real << '\n';
  return 0;
}

int cmd_solve(const RunConfig& c) {
  const fs::path dir = prepare_output(c);
  const NodeSet nodes = single_nodes(c);
  json meta = base_metadata(c);
  long last_snapshot = -1;
  const SnapshotFunction snapshot = [&](const TimeState& s) {
    write_snapshot(dir, nodes, s);
    last_snapshot = s.step;
  };
  write_text(dir / "snapshot.gp",
             "# usage: gnuplot -e \"file='snapshot_00000000.txt'\" snapshot.gp\n"
             "if (!exists('file')) file = system('ls snapshot_*.txt | tail -n 1')\n"
             "set view equal xyz\n"
             "set palette rgbformulae 33,13,10\n"
             "set key off\n"
             "splot file using 1:2:3:4 with points pt 7 ps 0.5 palette\n"
             "pause mouse close\n");
  RunResult r;
  try {
    r = run_problem(c, nodes, snapshot);
  } catch (const Error& e) {
    meta["status"] = "failed";
    meta["failure"] = {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()},
                       {"last_snapshot_step", last_snapshot}};
    write_metadata(dir, meta);
    throw;
  }
  meta["status"] = "ok";
  meta["result"] = result_json(r);
  if (c.problem == ProblemKind::advection) meta["hyperviscosity"] = hyperviscosity_json(r);
  write_metadata(dir, meta);
  std::cout << "N " << r.node_count << " steps " << r.steps << " t " << r.final_time;
  if (!std::isnan(r.error)) std::cout << " error " << r.error;
  std::cout << '\n';
  return 0;
}

int cmd_convergence(const RunConfig& c) {
  if (c.problem != ProblemKind::advection && c.problem != ProblemKind::diffusion) {
    throw Error(ErrorKind::config, "convergence needs a problem with a known exact solution (advection, diffusion)");
  }
  const fs::path dir = prepare_output(c);
  std::ofstream csv(dir / "convergence.csv");
  csv.precision(10);
  csv << "N,sqrtN,error,t_assembly,t_factor,t_solve\n";
  json meta = base_metadata(c);
  json levels = json::array();
  std::vector<double> sqrt_n, err;
  for (int refinement : c.levels) {
    json level = {{"refinement", refinement}};
    try {
      const NodeSet nodes = make_nodes(c, refinement);
      const RunResult r = run_problem(c, nodes, {});
      const double sn = std::sqrt(static_cast<double>(r.node_count));
      csv << r.node_count << ',' << sn << ',' << r.error << ',' << r.timings.assembly << ','
          << r.timings.factor << ',' << r.timings.solve << '\n';
      csv.flush();
      if (std::isfinite(r.error) && r.error > 0.0) {
        sqrt_n.push_back(sn);
        err.push_back(r.error);
      }
      level["status"] = "ok";
      level["result"] = result_json(r);
      if (c.problem == ProblemKind::advection) level["hyperviscosity"] = hyperviscosity_json(r);
      std::cout << "N " << r.node_count << " error " << r.error << " assembly " << r.timings.assembly
                << " factor " << r.timings.factor << " solve " << r.timings.solve << std::endl;
    } catch (const Error& e) {
      level["status"] = "failed";
      level["failure"] = {{"kind", std::string(to_string(e.kind()))}, {"message", e.what()}};
      std::cerr << "error: " << to_string(e.kind()) << ": refinement " << refinement << ": " << e.what() << '\n';
    }
    levels.push_back(level);
  }
  meta["levels"] = levels;
  if (sqrt_n.size() >= 2) {
    const double slope = convergence_slope(sqrt_n, err);
    meta["slope"] = slope;
    std::cout << "slope " << slope << '\n';
  } else {
    meta["slope"] = nullptr;
  }
  write_metadata(dir, meta);
  write_text(dir / "convergence.gp",
             "set datafile separator ','\n"
             "set logscale xy\n"
             "set xlabel 'sqrt(N)'\n"
             "set ylabel 'relative l2 error'\n"
             "set key off\n"
             "plot 'convergence.csv' every ::1 using 2:3 with linespoints pt 7\n"
             "pause mouse close\n");
  std::size_t ok = 0;
  for (const auto& l : levels) ok += l["status"] == "ok";
  return ok == c.levels.size() ? 0 : 1;
}

}  // namespace rbfloi::cli
