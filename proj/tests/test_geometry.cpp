#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "rbfloi/errors.hpp"
#include "rbfloi/geometry.hpp"
#include "rbfloi/kdtree.hpp"

using namespace rbfloi;

namespace {

// Icosahedron with one subdivision, deduplicated by brute force.
std::vector<Vec3> level_one_oracle() {
  const double g = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v;
  for (double a : {-1.0, 1.0})
    for (double b : {-g, g}) {
      v.emplace_back(0, a, b);
      v.emplace_back(a, b, 0);
      v.emplace_back(b, 0, a);
    }
  const double edge = 2.0;
  std::vector<Vec3> out;
  auto add = [&](Vec3 p) {
    p.normalize();
    for (const auto& q : out)
      if ((q - p).norm() < 1e-9) return;
    out.push_back(p);
  };
  for (const auto& p : v) add(p);
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j)
      if (std::abs((v[i] - v[j]).norm() - edge) < 1e-9) add(0.5 * (v[i] + v[j]));
  return out;
}

std::filesystem::path temp_file(const std::string& name, const std::string& body) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << body;
  return p;
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("sphere nodes") {
  const NodeSet l0 = generate_sphere_nodes(0);
  CHECK(l0.size() == 12);
  const NodeSet l1 = generate_sphere_nodes(1);
  const auto oracle = level_one_oracle();
  REQUIRE(l1.size() == oracle.size());
  CHECK(l1.size() == 42);
  for (const auto& p : oracle) {
    const bool found = std::any_of(l1.points.begin(), l1.points.end(),
                                   [&](const Vec3& q) { return (p - q).norm() < 1e-12; });
    CHECK(found);
  }
  for (int level = 0; level <= 4; ++level) {
    const NodeSet s = generate_sphere_nodes(level);
    CHECK(s.size() == static_cast<std::size_t>(10 * (1 << (2 * level)) + 2));
    double worst = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      worst = std::max(worst, std::abs(s.points[i].norm() - 1.0));
      worst = std::max(worst, (s.normals[i] - s.points[i]).norm());
    }
    CHECK(worst < 1e-12);
  }
  CHECK_THROWS_AS(generate_sphere_nodes(kMaxSphereLevel + 1), Error);
}

TEST_CASE("torus parametrization") {
  const Vec3 p = torus_point(0.0, 0.0);
  CHECK((p - Vec3(4.0 / 3.0, 0, 0)).norm() < 1e-15);
  CHECK((torus_normal(0.0, 0.0) - Vec3(1, 0, 0)).norm() < 1e-15);

  std::mt19937 gen(3);
  std::uniform_real_distribution<double> ang(-3.0, 3.0);
  for (int i = 0; i < 50; ++i) {
    const double phi = ang(gen), lambda = ang(gen);
    const Vec3 x = torus_point(phi, lambda);
    CHECK(std::abs(torus_implicit(x)) < 1e-14);
    // Outward normal is parallel to the implicit gradient.
    const double rho = std::hypot(x[0], x[1]);
    const Vec3 grad(-2.0 * (1.0 - rho) * x[0] / rho, -2.0 * (1.0 - rho) * x[1] / rho, 2.0 * x[2]);
    CHECK((grad.normalized() - torus_normal(phi, lambda)).norm() < 1e-12);
    const TorusAngles a = torus_angles(x);
    CHECK(a.phi == doctest::Approx(phi).epsilon(1e-12));
    CHECK(a.lambda == doctest::Approx(lambda).epsilon(1e-12));
  }
}

TEST_CASE("torus nodes") {
  const NodeSet t = generate_torus_nodes(1000, 5);
  CHECK(t.size() == 1000);
  CHECK(t.surface == SurfaceId::torus);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(std::abs(torus_implicit(t.points[i])) < 1e-12);
    CHECK(std::abs(t.normals[i].norm() - 1.0) < 1e-12);
  }
  // Quasi-uniform: nearest-neighbor spacing within a modest factor of the
  // ideal hexagonal spacing for the torus area 4 pi^2 R r.
  const double area = 4.0 * M_PI * M_PI * kTorusMajor * kTorusMinor;
  const double h = std::sqrt(2.0 * area / (std::sqrt(3.0) * t.size()));
  CHECK(min_pairwise_distance(t) > 0.4 * h);

  const NodeSet again = generate_torus_nodes(1000, 5);
  CHECK(again.points == t.points);
}

TEST_CASE("double torus nodes") {
  const double z = std::sqrt(2.0 / 40.0);
  CHECK(std::abs(double_torus_implicit(Vec3(0, 0, z))) < 1e-15);
  CHECK(std::abs(double_torus_implicit(Vec3(0, 0, -z))) < 1e-15);

  const NodeSet d = sample_implicit_surface(SurfaceId::double_torus, 800, 2);
  CHECK(d.size() >= 400);
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(std::abs(double_torus_implicit(d.points[i])) < 1e-10);
    CHECK(std::abs(d.normals[i].norm() - 1.0) < 1e-12);
  }
  CHECK(min_pairwise_distance(d) > 0.0);
  CHECK_THROWS_AS(sample_implicit_surface(SurfaceId::sphere, 800, 2), Error);
}

TEST_CASE("node files") {
  std::vector<std::string> warnings;
  const NodeSet one = load_nodeset(temp_file("rbfloi_one.txt", "# header\n0 0 1 0 0 1\n"), &warnings);
  REQUIRE(one.size() == 1);
  CHECK(one.points[0] == Vec3(0, 0, 1));
  CHECK(one.normals[0] == Vec3(0, 0, 1));
  CHECK(warnings.empty());

  const NodeSet scaled = load_nodeset(temp_file("rbfloi_two.txt", "0 0 1 0 0 2\n"), &warnings);
  CHECK(scaled.normals[0] == Vec3(0, 0, 1));
  CHECK(warnings.size() == 1);

  try {
    load_nodeset(temp_file("rbfloi_empty.txt", ""));
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::parse);
  }
  CHECK_THROWS_AS(load_nodeset(temp_file("rbfloi_bad.txt", "0 0 x 0 0 1\n")), Error);

  const NodeSet s = generate_sphere_nodes(2);
  const auto path = std::filesystem::temp_directory_path() / "rbfloi_roundtrip.txt";
  save_nodeset(path, s);
  const NodeSet back = load_nodeset(path);
  REQUIRE(back.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) CHECK((back.points[i] - s.points[i]).norm() == 0.0);
}

TEST_CASE("kd-tree matches brute force") {
  const NodeSet t = generate_torus_nodes(500, 9);
  const KdTree tree(t.points);
  std::mt19937 gen(1);
  std::uniform_real_distribution<double> u(-1.4, 1.4);
  for (int q = 0; q < 40; ++q) {
    const Vec3 x(u(gen), u(gen), 0.3 * u(gen));
    CHECK(tree.knn(x, 17) == brute_force_knn(t.points, x, 17));
  }
  for (int c : {0, 99, 499}) CHECK(tree.knn(t.points[c], 31) == brute_force_neighbors(t, c, 31));
}

TEST_CASE("stencils without overlap") {
  const NodeSet s = generate_sphere_nodes(2);
  const StencilSet st = build_stencils(s, 31, 1.0);
  CHECK(st.stencils.size() == s.size());
  for (const auto& k : st.stencils) {
    CHECK(k.retained == 1);
    CHECK(k.retention_radius == 0.0);
    CHECK(k.claimed == std::vector<int>{0});
    CHECK(k.neighbors.front() == k.center);
    CHECK(k.neighbors == brute_force_neighbors(s, k.center, 31));
  }
}

TEST_CASE("three-point stencil set") {
  NodeSet tiny;
  tiny.points = {Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
  tiny.normals = tiny.points;
  const StencilSet st = build_stencils(tiny, 3, 1.0);
  CHECK(st.stencils.size() == 3);
  for (const auto& k : st.stencils) CHECK(k.retained == 1);
  CHECK_THROWS_AS(build_stencils(tiny, 4, 1.0), Error);
  CHECK_THROWS_AS(build_stencils(tiny, 3, 0.0), Error);
}

TEST_CASE("overlapped stencils partition the nodes") {
  const NodeSet t = generate_torus_nodes(3000, 4);
  const int n = 71;
  for (double delta : {0.7, 0.5}) {
    const StencilSet st = build_stencils(t, n, delta);
    std::vector<int> hits(t.size(), 0);
    for (std::size_t id = 0; id < st.stencils.size(); ++id) {
      const auto& k = st.stencils[id];
      CHECK_FALSE(k.claimed.empty());
      for (int p : k.claimed) {
        CHECK(p < k.retained);
        ++hits[k.neighbors[p]];
        CHECK(st.owner[k.neighbors[p]] == static_cast<int>(id));
      }
    }
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));

    const double expected = t.size() / std::max(std::pow(1.0 - delta, 3) * n, 1.0);
    const double ratio = static_cast<double>(st.stencils.size()) / expected;
    CHECK(ratio > 0.5);
    CHECK(ratio < 2.0);
  }
}

}
