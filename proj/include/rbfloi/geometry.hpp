#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rbfloi/linalg.hpp"

namespace rbfloi {

enum class SurfaceId { sphere, torus, double_torus, external };

std::string_view to_string(SurfaceId id);
SurfaceId surface_from_string(std::string_view name);

struct NodeSet {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;  // unit length
  SurfaceId surface = SurfaceId::external;

  std::size_t size() const { return points.size(); }
};

// Torus (1 - sqrt(x^2+y^2))^2 + z^2 = 1/9, i.e. R = 1, r = 1/3.
inline constexpr double kTorusMajor = 1.0;
inline constexpr double kTorusMinor = 1.0 / 3.0;

double torus_implicit(const Vec3& x);
Vec3 torus_point(double phi, double lambda);   // phi: tube angle, lambda: azimuth
Vec3 torus_normal(double phi, double lambda);  // outward
struct TorusAngles {
  double phi, lambda;
};
TorusAngles torus_angles(const Vec3& x);

// Double torus (x^2(1-x^2) - y^2)^2 + 0.5 z^2 = 1/40.
double double_torus_implicit(const Vec3& x);
Vec3 double_torus_gradient(const Vec3& x);

inline constexpr int kMaxSphereLevel = 7;

// Icosahedral subdivision projected to the unit sphere; 10*4^level + 2 nodes.
NodeSet generate_sphere_nodes(int level);

// Quasi-uniform torus nodes: a randomly shifted low-discrepancy sequence in
// the unit square, mapped to (phi, lambda) through the inverse area CDF of
// the tube angle, then relaxed by surface-constrained repulsion. Returns
// exactly count_target nodes.
NodeSet generate_torus_nodes(int count_target, std::uint64_t seed);

// Newton projection of random box samples onto the zero level set, followed
// by surface-constrained repulsion. Only SurfaceId::double_torus is supported.
NodeSet sample_implicit_surface(SurfaceId surface, int count_target, std::uint64_t seed);

// Plain text, "x y z nx ny nz" per line, '#' comments. Warnings (renormalized
// normals) are appended to *warnings when given.
NodeSet load_nodeset(const std::filesystem::path& path,
                     std::vector<std::string>* warnings = nullptr);
void save_nodeset(const std::filesystem::path& path, const NodeSet& nodes);

double min_pairwise_distance(const NodeSet& nodes);

struct Stencil {
  int center = 0;
  std::vector<int> neighbors;  // global indices, neighbors[0] == center, sorted by distance
  double width = 0.0;             // rho_k
  double retention_radius = 0.0;  // (1 - delta) * rho_k
  int retained = 1;               // retention set = neighbors[0, retained)
  std::vector<int> claimed;       // local positions (< retained) owned by this stencil

  int size() const { return static_cast<int>(neighbors.size()); }
};

struct StencilSet {
  std::vector<Stencil> stencils;  // surviving stencils only
  std::vector<int> owner;         // node -> index into stencils
  double delta = 1.0;
  int stencil_size = 0;
};

// k-NN stencils, retention sets, then a sequential greedy claim pass in
// ascending center order. Stencils with nothing left to claim are dropped.
StencilSet build_stencils(const NodeSet& nodes, int n, double delta);

// Reference stencil construction by brute-force search, for tests.
std::vector<int> brute_force_neighbors(const NodeSet& nodes, int center, int n);

}  // namespace rbfloi
