#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rbfloi/geometry.hpp"
#include "rbfloi/rbf_assembly.hpp"
#include "rbfloi/timestepping.hpp"

namespace rbfloi {

// ---------------------------------------------------------------------------
// Sphere advection

constexpr double kDeformationPeriod = 5.0;

// Deformational flow on the unit sphere, Cartesian components.
Vec3 deformational_velocity(double t, const Vec3& x, double period = kDeformationPeriod);

// Two Gaussian bells centered at (sqrt(3)/2, +-1/2, 0).
double gaussian_bells_ic(const Vec3& x);

using VelocityFunction = std::function<Vec3(double t, const Vec3& x)>;

// -(Gx(u1 c) + Gy(u2 c) + Gz(u3 c)) + gamma L^k c.
Field advection_rhs(const GlobalOperators& ops, std::span<const Vec3> points,
                    const VelocityFunction& velocity, double t, const Field& c);

// ---------------------------------------------------------------------------
// Forced diffusion on the torus

class TorusManufactured {
 public:
  static constexpr int kCenters = 23;
  static constexpr std::uint64_t kDefaultSeed = 20180611;

  explicit TorusManufactured(std::uint64_t seed = kDefaultSeed);

  const std::vector<TorusAngles>& centers() const { return centers_; }
  std::uint64_t seed() const { return seed_; }

  double solution(double t, double phi, double lambda) const;
  // Closed-form Laplace-Beltrami operator of the solution.
  double laplacian(double t, double phi, double lambda) const;
  // dc/dt - Laplacian(c).
  double forcing(double t, double phi, double lambda) const;

  Field solution_at(double t, const NodeSet& nodes) const;
  Field forcing_at(double t, const NodeSet& nodes) const;

 private:
  std::vector<TorusAngles> centers_;
  std::uint64_t seed_;
};

// ---------------------------------------------------------------------------
// Reaction-diffusion models

enum class ReactionModel { cahn_hilliard, fhn, turing };

std::string_view to_string(ReactionModel m);
ReactionModel reaction_model_from_string(std::string_view name);
int field_count(ReactionModel m);

struct CahnHilliardParams {
  double nu = 0.5;
  double gamma = 0.006;
};

struct FhnParams {
  // No default is asserted; runs must set it explicitly.
  std::optional<double> delta1;
};

struct TuringParams {
  double delta1 = 0.0011;
  double delta2 = 0.0021;
  double tau1 = 0.02;
  double tau2 = 0.2;
  double alpha = 0.899;
  double beta = -0.91;
  double gamma1 = -0.899;
};

struct ReactionParams {
  CahnHilliardParams cahn_hilliard;
  FhnParams fhn;
  TuringParams turing;
};

// Explicit part of each model. Cahn-Hilliard needs the Laplacian (nu L c^3);
// FitzHugh-Nagumo and Turing return their kinetics.
Fields reaction_rhs(ReactionModel model, const Fields& state, const ReactionParams& params,
                    const SparseMatrix* laplacian = nullptr);

// Stiff linear operators treated implicitly, one per field. For
// Cahn-Hilliard this is -nu L - nu gamma B with B = L L.
std::vector<SparseMatrix> implicit_operators(ReactionModel model, const ReactionParams& params,
                                             const SparseMatrix& laplacian);

// Node-wise initial data.
Field cahn_hilliard_ic(const NodeSet& nodes, std::uint64_t seed);
Fields fhn_ic(const NodeSet& nodes);
Fields turing_ic(const NodeSet& nodes, std::uint64_t seed);

// ---------------------------------------------------------------------------

// ||numeric - exact||_2 / ||exact||_2 over node values.
double relative_l2_error(const Field& numeric, const Field& exact);

enum class Scheme { rk4, bdf4, sbdf2 };
std::string_view to_string(Scheme s);

struct PDEProblem {
  std::string name;
  SurfaceId surface = SurfaceId::sphere;
  int fields = 1;
  Scheme scheme = Scheme::rk4;
  double final_time = 0.0;
  double dt = 0.0;
  // Every numeric parameter, in a fixed order, for run metadata.
  std::vector<std::pair<std::string, double>> parameters;
  std::function<Fields(const NodeSet&)> initial;
  std::function<Fields(const NodeSet&, double t)> exact;  // empty when unknown
};

PDEProblem sphere_advection_problem();
PDEProblem torus_diffusion_problem(const TorusManufactured& m, double final_time);
PDEProblem reaction_problem(ReactionModel model, const ReactionParams& params, double final_time,
                            std::uint64_t seed);

// Uniform draw in [0, 1) from the top 53 bits.
inline double unit_uniform(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

}  // namespace rbfloi
