#include "rbfloi/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "rbfloi/errors.hpp"

namespace rbfloi {

using std::numbers::pi;

// ---------------------------------------------------------------------------

Vec3 deformational_velocity(double t, const Vec3& x, double period) {
  const double lon = std::atan2(x[1], x[0]);
  const double lat = std::asin(std::clamp(x[2] / x.norm(), -1.0, 1.0));
  const double tp = 2.0 * pi * t / period;
  const double pulse = (10.0 / period) * std::cos(pi * t / period);
  const double s = std::sin(lon - tp);
  const double u = pulse * s * s * std::sin(2.0 * lat) + (2.0 * pi / period) * std::cos(lat);
  const double v = pulse * std::sin(2.0 * (lon - tp)) * std::cos(lat);
  const Vec3 east(-std::sin(lon), std::cos(lon), 0.0);
  const Vec3 north(-std::sin(lat) * std::cos(lon), -std::sin(lat) * std::sin(lon), std::cos(lat));
  return u * east + v * north;
}

double gaussian_bells_ic(const Vec3& x) {
  const Vec3 p1(std::sqrt(3.0) / 2.0, 0.5, 0.0);
  const Vec3 p2(std::sqrt(3.0) / 2.0, -0.5, 0.0);
  return 0.95 * (std::exp(-5.0 * (x - p1).squaredNorm()) + std::exp(-5.0 * (x - p2).squaredNorm()));
}

Field advection_rhs(const GlobalOperators& ops, std::span<const Vec3> points,
                    const VelocityFunction& velocity, double t, const Field& c) {
  const auto n = static_cast<Eigen::Index>(points.size());
  if (c.size() != n) throw Error(ErrorKind::dimension, "advection_rhs: field size mismatch");
  std::array<Field, 3> flux;
  for (auto& f : flux) f.resize(n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3 u = velocity(t, points[i]);
    for (int a = 0; a < 3; ++a) flux[a][i] = u[a] * c[i];
  }
  Field out = -spmv(ops.g[0], flux[0]);
  out -= spmv(ops.g[1], flux[1]);
  out -= spmv(ops.g[2], flux[2]);
  if (ops.hyperviscosity.gamma != 0.0) {
    out += apply_hyperviscosity(ops.laplacian, ops.hyperviscosity, c);
  }
  return out;
}

// ---------------------------------------------------------------------------

TorusManufactured::TorusManufactured(std::uint64_t seed) : seed_(seed) {
  std::mt19937_64 rng(seed);
  for (int k = 0; k < kCenters; ++k) {
    const double phi = -pi + 2.0 * pi * unit_uniform(rng());
    const double lambda = -pi + 2.0 * pi * unit_uniform(rng());
    centers_.push_back({phi, lambda});
  }
}

double TorusManufactured::solution(double t, double phi, double lambda) const {
  double s = 0.0;
  for (const auto& c : centers_) {
    s += std::exp(-81.0 * (1.0 - std::cos(lambda - c.lambda)) - 9.0 * (1.0 - std::cos(phi - c.phi)));
  }
  return std::exp(-5.0 * t) * s;
}

double TorusManufactured::laplacian(double t, double phi, double lambda) const {
  const double big_r = kTorusMajor, r = kTorusMinor;
  const double ring = big_r + r * std::cos(phi);
  double d_phi = 0.0, d_phi2 = 0.0, d_lam2 = 0.0;
  for (const auto& c : centers_) {
    const double dp = phi - c.phi, dl = lambda - c.lambda;
    const double g = std::exp(-81.0 * (1.0 - std::cos(dl)) - 9.0 * (1.0 - std::cos(dp)));
    const double bp = -9.0 * std::sin(dp), bpp = -9.0 * std::cos(dp);
    const double ap = -81.0 * std::sin(dl), app = -81.0 * std::cos(dl);
    d_phi += g * bp;
    d_phi2 += g * (bp * bp + bpp);
    d_lam2 += g * (ap * ap + app);
  }
  const double lap = d_phi2 / (r * r) - std::sin(phi) / (r * ring) * d_phi + d_lam2 / (ring * ring);
  return std::exp(-5.0 * t) * lap;
}

double TorusManufactured::forcing(double t, double phi, double lambda) const {
  return -5.0 * solution(t, phi, lambda) - laplacian(t, phi, lambda);
}

Field TorusManufactured::solution_at(double t, const NodeSet& nodes) const {
  Field out(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const TorusAngles a = torus_angles(nodes.points[i]);
    out[static_cast<Eigen::Index>(i)] = solution(t, a.phi, a.lambda);
  }
  return out;
}

Field TorusManufactured::forcing_at(double t, const NodeSet& nodes) const {
  Field out(static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const TorusAngles a = torus_angles(nodes.points[i]);
    out[static_cast<Eigen::Index>(i)] = forcing(t, a.phi, a.lambda);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(ReactionModel m) {
  switch (m) {
    case ReactionModel::cahn_hilliard: return "cahn_hilliard";
    case ReactionModel::fhn: return "fhn";
    case ReactionModel::turing: return "turing";
  }
  return "unknown";
}

ReactionModel reaction_model_from_string(std::string_view name) {
  if (name == "cahn_hilliard") return ReactionModel::cahn_hilliard;
  if (name == "fhn") return ReactionModel::fhn;
  if (name == "turing") return ReactionModel::turing;
  throw Error(ErrorKind::config, "unknown reaction model '" + std::string(name) + "'");
}

int field_count(ReactionModel m) { return m == ReactionModel::cahn_hilliard ? 1 : 2; }

Fields reaction_rhs(ReactionModel model, const Fields& state, const ReactionParams& p,
                    const SparseMatrix* laplacian) {
  if (static_cast<int>(state.size()) != field_count(model)) {
    throw Error(ErrorKind::dimension, "reaction_rhs: wrong number of fields for the model");
  }
  switch (model) {
    case ReactionModel::cahn_hilliard: {
      if (!laplacian) throw Error(ErrorKind::config, "reaction_rhs: Cahn-Hilliard needs L");
      const Field cubed = state[0].array().cube().matrix();
      return {p.cahn_hilliard.nu * spmv(*laplacian, cubed)};
    }
    case ReactionModel::fhn: {
      const auto c1 = state[0].array();
      const auto c2 = state[1].array();
      Field r1 = ((1.0 / 0.02) * c1 * (1.0 - c1) * (c1 - (c2 + 0.02) / 0.75)).matrix();
      Field r2 = (c1 - c2).matrix();
      return {std::move(r1), std::move(r2)};
    }
    case ReactionModel::turing: {
      const TuringParams& q = p.turing;
      const auto c1 = state[0].array();
      const auto c2 = state[1].array();
      Field r1 = (q.alpha * c1 * (1.0 - q.tau1 * c2.square()) + c2 * (1.0 - q.tau2 * c1)).matrix();
      Field r2 = (q.beta * c2 * (1.0 + (q.alpha * q.tau1 / q.beta) * c1 * c2) +
                  c1 * (q.gamma1 + q.tau2 * c2))
                     .matrix();
      return {std::move(r1), std::move(r2)};
    }
  }
  throw Error(ErrorKind::config, "reaction_rhs: unknown model");
}

std::vector<SparseMatrix> implicit_operators(ReactionModel model, const ReactionParams& p,
                                             const SparseMatrix& l) {
  switch (model) {
    case ReactionModel::cahn_hilliard: {
      const double nu = p.cahn_hilliard.nu;
      const SparseMatrix b = (l * l).pruned();
      SparseMatrix d = -nu * l - nu * p.cahn_hilliard.gamma * b;
      d.makeCompressed();
      return {std::move(d)};
    }
    case ReactionModel::fhn: {
      if (!p.fhn.delta1) throw Error(ErrorKind::config, "FitzHugh-Nagumo requires delta1");
      SparseMatrix d = *p.fhn.delta1 * l;
      return {d, d};
    }
    case ReactionModel::turing: {
      SparseMatrix d1 = p.turing.delta1 * l;
      SparseMatrix d2 = p.turing.delta2 * l;
      return {std::move(d1), std::move(d2)};
    }
  }
  throw Error(ErrorKind::config, "implicit_operators: unknown model");
}

Field cahn_hilliard_ic(const NodeSet& nodes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Field c(static_cast<Eigen::Index>(nodes.size()));
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = 0.1 + 0.1 * (2.0 * unit_uniform(rng()) - 1.0);
  return c;
}

Fields fhn_ic(const NodeSet& nodes) {
  const auto n = static_cast<Eigen::Index>(nodes.size());
  Field c1(n), c2(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec3& x = nodes.points[i];
    c1[i] = 0.5 * (1.0 + std::tanh(5.0 * x[0] + x[1]));
    c2[i] = 0.5 * (1.0 - std::tanh(10.0 * x[2]));
  }
  return {c1, c2};
}

Fields turing_ic(const NodeSet& nodes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto n = static_cast<Eigen::Index>(nodes.size());
  Field c1(n), c2(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    c1[i] = unit_uniform(rng()) - 0.5;
    c2[i] = unit_uniform(rng()) - 0.5;
  }
  return {c1, c2};
}

// ---------------------------------------------------------------------------

double relative_l2_error(const Field& numeric, const Field& exact) {
  if (numeric.size() != exact.size()) {
    throw Error(ErrorKind::dimension, "relative_l2_error: length mismatch");
  }
  const double denom = exact.norm();
  if (denom == 0.0) throw Error(ErrorKind::config, "relative_l2_error: exact field is zero");
  return (numeric - exact).norm() / denom;
}

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::rk4: return "rk4";
    case Scheme::bdf4: return "bdf4";
    case Scheme::sbdf2: return "sbdf2";
  }
  return "unknown";
}

PDEProblem sphere_advection_problem() {
  PDEProblem p;
  p.name = "sphere_advection";
  p.surface = SurfaceId::sphere;
  p.scheme = Scheme::rk4;
  p.final_time = kDeformationPeriod;
  p.dt = kDeformationPeriod / 2400.0;
  p.parameters = {{"period", kDeformationPeriod}, {"bell_width", 5.0}, {"bell_height", 0.95}};
  p.initial = [](const NodeSet& nodes) {
    Field c(static_cast<Eigen::Index>(nodes.size()));
    for (std::size_t i = 0; i < nodes.size(); ++i) c[i] = gaussian_bells_ic(nodes.points[i]);
    return Fields{c};
  };
  // The flow reverses and returns the bells to their start at t = T.
  p.exact = [p0 = p.initial](const NodeSet& nodes, double) { return p0(nodes); };
  return p;
}

PDEProblem torus_diffusion_problem(const TorusManufactured& m, double final_time) {
  PDEProblem p;
  p.name = "torus_diffusion";
  p.surface = SurfaceId::torus;
  p.scheme = Scheme::bdf4;
  p.final_time = final_time;
  p.dt = 1e-3;
  p.parameters = {{"major_radius", kTorusMajor}, {"minor_radius", kTorusMinor},
                  {"centers", TorusManufactured::kCenters},
                  {"center_seed", static_cast<double>(m.seed())}};
  p.initial = [m](const NodeSet& nodes) { return Fields{m.solution_at(0.0, nodes)}; };
  p.exact = [m](const NodeSet& nodes, double t) { return Fields{m.solution_at(t, nodes)}; };
  return p;
}

PDEProblem reaction_problem(ReactionModel model, const ReactionParams& params, double final_time,
                            std::uint64_t seed) {
  PDEProblem p;
  p.name = std::string(to_string(model));
  p.surface = SurfaceId::double_torus;
  p.fields = field_count(model);
  p.scheme = Scheme::sbdf2;
  p.final_time = final_time;
  switch (model) {
    case ReactionModel::cahn_hilliard:
      p.dt = 1e-4;
      p.parameters = {{"nu", params.cahn_hilliard.nu}, {"gamma", params.cahn_hilliard.gamma},
                      {"ic_mean", 0.1}, {"ic_amplitude", 0.1},
                      {"seed", static_cast<double>(seed)}};
      p.initial = [seed](const NodeSet& nodes) { return Fields{cahn_hilliard_ic(nodes, seed)}; };
      break;
    case ReactionModel::fhn:
      if (!params.fhn.delta1) throw Error(ErrorKind::config, "FitzHugh-Nagumo requires delta1");
      p.dt = 1e-2;
      p.parameters = {{"delta1", *params.fhn.delta1}};
      p.initial = [](const NodeSet& nodes) { return fhn_ic(nodes); };
      break;
    case ReactionModel::turing: {
      const TuringParams& q = params.turing;
      p.dt = 1e-2;
      p.parameters = {{"delta1", q.delta1}, {"delta2", q.delta2}, {"tau1", q.tau1},
                      {"tau2", q.tau2},     {"alpha", q.alpha},   {"beta", q.beta},
                      {"gamma1", q.gamma1}, {"seed", static_cast<double>(seed)}};
      p.initial = [seed](const NodeSet& nodes) { return turing_ic(nodes, seed); };
      break;
    }
  }
  return p;
}

}  // namespace rbfloi
