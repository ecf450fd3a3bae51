#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "rbfloi/errors.hpp"
#include "rbfloi/problems.hpp"
#include "oracles.hpp"

using namespace rbfloi;
using std::numbers::pi;

namespace {

GlobalOperators sphere_operators(int level, int degree) {
  const NodeSet s = generate_sphere_nodes(level);
  const AssemblyConfig c = AssemblyConfig::from_degree(degree, 1e-3);
  return assemble_global(build_stencils(s, c.stencil_size, c.delta), s, c);
}

}  // namespace

TEST_SUITE("problems") {

TEST_CASE("deformational velocity examples") {
  const Vec3 v0 = deformational_velocity(0.0, Vec3(1, 0, 0));
  CHECK((v0 - Vec3(0, 2 * pi / 5, 0)).norm() < 1e-14);

  std::mt19937 gen(4);
  std::normal_distribution<double> g;
  for (int i = 0; i < 50; ++i) {
    const Vec3 x = Vec3(g(gen), g(gen), g(gen)).normalized();
    // Halfway through the period only the solid-body part remains.
    const double lat = std::asin(x[2]), lon = std::atan2(x[1], x[0]);
    const Vec3 east(-std::sin(lon), std::cos(lon), 0.0);
    CHECK((deformational_velocity(2.5, x) - (2 * pi / 5) * std::cos(lat) * east).norm() < 1e-14);
    const double t = 5.0 * std::uniform_real_distribution<double>(0, 1)(gen);
    CHECK(std::abs(deformational_velocity(t, x).dot(x)) < 1e-12);
  }
}

TEST_CASE("deformational flow returns particles to their start") {
  std::mt19937 gen(5);
  std::normal_distribution<double> g;
  for (int i = 0; i < 5; ++i) {
    const Vec3 x0 = Vec3(g(gen), g(gen), 0.5 * g(gen)).normalized();
    Vec3 x = x0;
    const int steps = 4000;
    const double dt = kDeformationPeriod / steps;
    for (int k = 0; k < steps; ++k) {
      const double t = k * dt;
      const Vec3 k1 = deformational_velocity(t, x);
      const Vec3 k2 = deformational_velocity(t + dt / 2, x + dt / 2 * k1);
      const Vec3 k3 = deformational_velocity(t + dt / 2, x + dt / 2 * k2);
      const Vec3 k4 = deformational_velocity(t + dt, x + dt * k3);
      x += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    CHECK((x - x0).norm() < 1e-6);
  }
}

TEST_CASE("gaussian bells") {
  const Vec3 p1(std::sqrt(3.0) / 2, 0.5, 0);
  CHECK(gaussian_bells_ic(p1) == doctest::Approx(0.95 * (1 + std::exp(-5.0))).epsilon(1e-14));
  std::mt19937 gen(6);
  std::normal_distribution<double> g;
  for (int i = 0; i < 20; ++i) {
    const Vec3 x = Vec3(g(gen), g(gen), g(gen)).normalized();
    CHECK(gaussian_bells_ic(x) == gaussian_bells_ic(Vec3(x[0], -x[1], x[2])));
  }
  CHECK(gaussian_bells_ic(Vec3(-std::sqrt(3.0) / 2, 0, 0)) < 0.95 * 2 * std::exp(-10.0));
}

TEST_CASE("advection right-hand side") {
  const NodeSet s2 = generate_sphere_nodes(2);
  const VelocityFunction v = [](double t, const Vec3& x) { return deformational_velocity(t, x); };
  const GlobalOperators ops2 = sphere_operators(2, 2);
  CHECK(advection_rhs(ops2, s2.points, v, 0.3, Field::Zero(s2.size())).norm() == 0.0);

  // The velocity is the rotated surface gradient of a quadratic stream
  // function, so the discrete divergence of the constant flux vanishes.
  for (int level : {2, 3, 4}) {
    const NodeSet s = generate_sphere_nodes(level);
    const GlobalOperators ops = sphere_operators(level, 2);
    const Field r = advection_rhs(ops, s.points, v, 0.7, Field::Ones(s.size()));
    CHECK(r.cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("torus manufactured solution") {
  const TorusManufactured m;
  CHECK(m.centers().size() == TorusManufactured::kCenters);
  const auto& c = m.centers();
  for (int k = 0; k < 3; ++k) {
    double others = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j)
      if (static_cast<int>(j) != k)
        others += std::exp(-81.0 * (1 - std::cos(c[k].lambda - c[j].lambda)) -
                           9.0 * (1 - std::cos(c[k].phi - c[j].phi)));
    CHECK(m.solution(0.0, c[k].phi, c[k].lambda) == doctest::Approx(1.0 + others).epsilon(1e-14));
  }
  CHECK(m.solution(0.3, 0.2, 1.1) == doctest::Approx(std::exp(-1.5) * m.solution(0.0, 0.2, 1.1)));
  CHECK(TorusManufactured(7).centers()[0].phi != m.centers()[0].phi);
  CHECK(TorusManufactured().centers()[5].lambda == m.centers()[5].lambda);
}

TEST_CASE("torus Laplacian matches finite differences") {
  const TorusManufactured m;
  std::mt19937 gen(8);
  std::uniform_real_distribution<double> u(-pi, pi);
  for (int i = 0; i < 100; ++i) {
    // Half the samples near a center, where the solution is not negligible.
    double phi = u(gen), lambda = u(gen);
    if (i % 2 == 0) {
      const auto& c = m.centers()[i % TorusManufactured::kCenters];
      phi = c.phi + 0.2 * u(gen) / pi;
      lambda = c.lambda + 0.05 * u(gen) / pi;
    }
    const double closed = m.laplacian(0.1, phi, lambda);
    const double fd = rbfloi::testing::torus_laplacian_fd(m, 0.1, phi, lambda);
    const double scale = std::abs(closed) + std::abs(m.solution(0.1, phi, lambda));
    CHECK(std::abs(closed - fd) <= 1e-6 * scale + 1e-300);
  }
  CHECK(m.forcing(0.2, 0.4, -0.3) ==
        doctest::Approx(-5.0 * m.solution(0.2, 0.4, -0.3) - m.laplacian(0.2, 0.4, -0.3)));
}

TEST_CASE("reaction kinetics") {
  const ReactionParams p;
  const GlobalOperators ops = sphere_operators(3, 2);
  const Eigen::Index n = ops.laplacian.rows();
  for (double v : {1.0, -1.0}) {
    const Fields c{Field::Constant(n, v)};
    const Field e = reaction_rhs(ReactionModel::cahn_hilliard, c, p, &ops.laplacian)[0];
    const auto d = implicit_operators(ReactionModel::cahn_hilliard, p, ops.laplacian);
    const Field full = e + spmv(d[0], c[0]);
    CHECK(full.cwiseAbs().maxCoeff() < 1e-8);
  }
  CHECK_THROWS_AS(reaction_rhs(ReactionModel::cahn_hilliard, {Field::Ones(n)}, p), Error);

  const Fields zero{Field::Zero(5), Field::Zero(5)};
  for (const auto& f : reaction_rhs(ReactionModel::fhn, zero, p)) CHECK(f.norm() == 0.0);
  for (const auto& f : reaction_rhs(ReactionModel::turing, zero, p)) CHECK(f.norm() == 0.0);
  CHECK_THROWS_AS(reaction_rhs(ReactionModel::fhn, {Field::Zero(5)}, p), Error);
}

TEST_CASE("implicit operators") {
  const GlobalOperators ops = sphere_operators(2, 2);
  ReactionParams p;
  CHECK_THROWS_AS(implicit_operators(ReactionModel::fhn, p, ops.laplacian), Error);
  p.fhn.delta1 = 0.01;
  const auto f = implicit_operators(ReactionModel::fhn, p, ops.laplacian);
  CHECK(f.size() == 2);
  const auto t = implicit_operators(ReactionModel::turing, p, ops.laplacian);
  const Field x = Field::LinSpaced(ops.laplacian.rows(), -1, 1);
  const Field tx = p.turing.delta2 * spmv(ops.laplacian, x);
  CHECK((spmv(t[1], x) - tx).norm() <= 1e-13 * tx.norm());

  const auto ch = implicit_operators(ReactionModel::cahn_hilliard, p, ops.laplacian);
  const Field lx = spmv(ops.laplacian, x);
  const Field ref = -p.cahn_hilliard.nu * lx - p.cahn_hilliard.nu * p.cahn_hilliard.gamma * spmv(ops.laplacian, lx);
  CHECK((spmv(ch[0], x) - ref).norm() <= 1e-12 * ref.norm());
}

TEST_CASE("model names") {
  for (auto m : {ReactionModel::cahn_hilliard, ReactionModel::fhn, ReactionModel::turing})
    CHECK(reaction_model_from_string(to_string(m)) == m);
  CHECK_THROWS_AS(reaction_model_from_string("gray_scott"), Error);
  CHECK(field_count(ReactionModel::cahn_hilliard) == 1);
  CHECK(field_count(ReactionModel::turing) == 2);
}

TEST_CASE("initial conditions are seeded") {
  const NodeSet s = generate_sphere_nodes(2);
  CHECK(cahn_hilliard_ic(s, 3) == cahn_hilliard_ic(s, 3));
  CHECK(cahn_hilliard_ic(s, 3) != cahn_hilliard_ic(s, 4));
  const Field c = cahn_hilliard_ic(s, 3);
  CHECK(c.minCoeff() >= 0.0);
  CHECK(c.maxCoeff() <= 0.2);
  const Fields t = turing_ic(s, 1);
  CHECK(t[0].cwiseAbs().maxCoeff() <= 0.5);
  CHECK(fhn_ic(s).size() == 2);
}

TEST_CASE("relative error") {
  const Field e = Field::LinSpaced(5, 1, 5);
  CHECK(relative_l2_error(e, e) == 0.0);
  CHECK(relative_l2_error(2.0 * e, e) == doctest::Approx(1.0));
  Field bumped = e;
  bumped[0] += 1e-3;
  CHECK(relative_l2_error(bumped, e) == doctest::Approx(1e-3 / e.norm()));
  CHECK_THROWS_AS(relative_l2_error(e, Field::Zero(5)), Error);
  CHECK_THROWS_AS(relative_l2_error(e, Field::Ones(4)), Error);
}

TEST_CASE("problem descriptions") {
  const PDEProblem a = sphere_advection_problem();
  CHECK(a.scheme == Scheme::rk4);
  CHECK(a.dt == doctest::Approx(5.0 / 2400));
  const NodeSet s = generate_sphere_nodes(1);
  CHECK(a.exact(s, a.final_time)[0] == a.initial(s)[0]);

  const TorusManufactured m(11);
  const PDEProblem d = torus_diffusion_problem(m, 0.2);
  CHECK(d.scheme == Scheme::bdf4);
  bool seeded = false;
  for (const auto& [k, v] : d.parameters) seeded = seeded || (k == "center_seed" && v == 11.0);
  CHECK(seeded);

  ReactionParams p;
  CHECK_THROWS_AS(reaction_problem(ReactionModel::fhn, p, 1.0, 1), Error);
  const PDEProblem ch = reaction_problem(ReactionModel::cahn_hilliard, p, 1.0, 1);
  CHECK(ch.dt == 1e-4);
  CHECK_FALSE(static_cast<bool>(ch.exact));
}

}
