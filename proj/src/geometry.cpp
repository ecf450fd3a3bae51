#include "rbfloi/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "rbfloi/errors.hpp"
#include "rbfloi/kdtree.hpp"

namespace rbfloi {

std::string_view to_string(SurfaceId id) {
  switch (id) {
    case SurfaceId::sphere:
      return "sphere";
    case SurfaceId::torus:
      return "torus";
    case SurfaceId::double_torus:
      return "double_torus";
    case SurfaceId::external:
      return "external";
  }
  return "external";
}

SurfaceId surface_from_string(std::string_view name) {
  if (name == "sphere") return SurfaceId::sphere;
  if (name == "torus") return SurfaceId::torus;
  if (name == "double_torus") return SurfaceId::double_torus;
  if (name == "external") return SurfaceId::external;
  throw Error(ErrorKind::config, "unknown surface '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Analytic surfaces

double torus_implicit(const Vec3& x) {
  const double rho = std::hypot(x[0], x[1]);
  return (kTorusMajor - rho) * (kTorusMajor - rho) + x[2] * x[2] - kTorusMinor * kTorusMinor;
}

Vec3 torus_point(double phi, double lambda) {
  const double ring = kTorusMajor + kTorusMinor * std::cos(phi);
  return {ring * std::cos(lambda), ring * std::sin(lambda), kTorusMinor * std::sin(phi)};
}

Vec3 torus_normal(double phi, double lambda) {
  return {std::cos(phi) * std::cos(lambda), std::cos(phi) * std::sin(lambda), std::sin(phi)};
}

TorusAngles torus_angles(const Vec3& x) {
  const double lambda = std::atan2(x[1], x[0]);
  const double phi = std::atan2(x[2], std::hypot(x[0], x[1]) - kTorusMajor);
  return {phi, lambda};
}

double double_torus_implicit(const Vec3& x) {
  const double g = x[0] * x[0] * (1.0 - x[0] * x[0]) - x[1] * x[1];
  return g * g + 0.5 * x[2] * x[2] - 1.0 / 40.0;
}

Vec3 double_torus_gradient(const Vec3& x) {
  const double g = x[0] * x[0] * (1.0 - x[0] * x[0]) - x[1] * x[1];
  const double gx = 2.0 * x[0] - 4.0 * x[0] * x[0] * x[0];
  const double gy = -2.0 * x[1];
  return {2.0 * g * gx, 2.0 * g * gy, x[2]};
}

// ---------------------------------------------------------------------------
// Sphere

NodeSet generate_sphere_nodes(int level) {
  if (level < 0 || level > kMaxSphereLevel) {
    throw Error(ErrorKind::config, "sphere subdivision level must be in [0, 7]");
  }
  const double g = std::numbers::phi;
  std::vector<Vec3> pts;
  for (double s1 : {-1.0, 1.0}) {
    for (double s2 : {-1.0, 1.0}) {
      pts.emplace_back(0.0, s1, s2 * g);
      pts.emplace_back(s1, s2 * g, 0.0);
      pts.emplace_back(s2 * g, 0.0, s1);
    }
  }
  // Faces: vertex triples at mutual edge length 2.
  std::vector<std::array<int, 3>> faces;
  auto is_edge = [&](int a, int b) { return std::abs((pts[a] - pts[b]).norm() - 2.0) < 1e-9; };
  for (int a = 0; a < 12; ++a)
    for (int b = a + 1; b < 12; ++b)
      for (int c = b + 1; c < 12; ++c)
        if (is_edge(a, b) && is_edge(b, c) && is_edge(a, c)) faces.push_back({a, b, c});
  for (auto& p : pts) p.normalize();

  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> midpoints;
    auto midpoint = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoints.find(key);
      if (it != midpoints.end()) return it->second;
      pts.push_back((pts[a] + pts[b]).normalized());
      const int id = static_cast<int>(pts.size()) - 1;
      midpoints.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int ab = midpoint(f[0], f[1]);
      const int bc = midpoint(f[1], f[2]);
      const int ca = midpoint(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  NodeSet out;
  out.surface = SurfaceId::sphere;
  out.points = pts;
  out.normals = pts;
  return out;
}

// ---------------------------------------------------------------------------
// Torus

namespace {

double unit_double(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

namespace {

constexpr int kTorusRelaxSweeps = 30;
constexpr int kDoubleTorusRelaxSweeps = 40;

// Repulsion constrained to a surface: Jacobi sweeps over k-NN with tangential
// displacement, then re-projection. project() returns false when it fails.
void relax_on_surface(std::vector<Vec3>& pts, int sweeps,
                      const std::function<bool(Vec3&)>& project,
                      const std::function<Vec3(const Vec3&)>& normal) {
  constexpr int kNeighbors = 8;
  const int count = static_cast<int>(pts.size());
  std::vector<Vec3> moved(count);
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    KdTree tree(pts);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < count; ++i) {
      const auto nb = tree.knn(pts[i], kNeighbors + 1);
      const double r0 = std::max((pts[nb[1]] - pts[i]).norm(), 1e-12);
      Vec3 push = Vec3::Zero();
      for (int q = 1; q < static_cast<int>(nb.size()); ++q) {
        const Vec3 d = pts[i] - pts[nb[q]];
        const double r = std::max(d.norm(), 1e-12);
        push += std::pow(r0 / r, 3) * d / r;
      }
      const Vec3 nrm = normal(pts[i]);
      push -= nrm.dot(push) * nrm;
      const double len = push.norm();
      Vec3 step = 0.1 * r0 * push;
      if (0.1 * r0 * len > 0.3 * r0) step *= 0.3 / (0.1 * len);
      Vec3 x = pts[i] + step;
      moved[i] = project(x) ? x : pts[i];
    }
    pts.swap(moved);
  }
}

// Inverse of the normalized tube-angle area CDF, (R (phi + pi) + r sin phi) / (2 pi R).
double torus_phi_from_unit(double u) {
  const double two_pi = 2.0 * std::numbers::pi;
  double phi = two_pi * u - std::numbers::pi;
  for (int it = 0; it < 50; ++it) {
    const double f = (kTorusMajor * (phi + std::numbers::pi) + kTorusMinor * std::sin(phi)) /
                         (two_pi * kTorusMajor) - u;
    const double df = (kTorusMajor + kTorusMinor * std::cos(phi)) / (two_pi * kTorusMajor);
    const double dphi = f / df;
    phi -= dphi;
    if (std::abs(dphi) < 1e-15) break;
  }
  return phi;
}

}  // namespace

NodeSet generate_torus_nodes(int count_target, std::uint64_t seed) {
  if (count_target < 100) {
    throw Error(ErrorKind::config, "torus node count must be at least 100");
  }
  // Additive recurrence with the plastic number (real root of g^3 = g + 1),
  // the tube angle drawn through the inverse area CDF.
  double g = 1.3;
  for (int it = 0; it < 64; ++it) g = std::cbrt(1.0 + g);
  const std::array<double, 2> step{1.0 / g, 1.0 / (g * g)};
  std::mt19937_64 rng(seed);
  std::array<double, 2> u{unit_double(rng), unit_double(rng)};

  std::vector<Vec3> pts;
  pts.reserve(count_target);
  for (int i = 0; i < count_target; ++i) {
    for (int a = 0; a < 2; ++a) {
      u[a] += step[a];
      u[a] -= std::floor(u[a]);
    }
    const double phi = torus_phi_from_unit(u[0]);
    const double lambda = 2.0 * std::numbers::pi * u[1] - std::numbers::pi;
    pts.push_back(torus_point(phi, lambda));
  }
  relax_on_surface(
      pts, kTorusRelaxSweeps,
      [](Vec3& x) {
        const TorusAngles a = torus_angles(x);
        x = torus_point(a.phi, a.lambda);
        return true;
      },
      [](const Vec3& x) {
        const TorusAngles a = torus_angles(x);
        return torus_normal(a.phi, a.lambda);
      });

  NodeSet out;
  out.surface = SurfaceId::torus;
  out.points.reserve(count_target);
  out.normals.reserve(count_target);
  for (const Vec3& x : pts) {
    const TorusAngles a = torus_angles(x);
    out.points.push_back(torus_point(a.phi, a.lambda));
    out.normals.push_back(torus_normal(a.phi, a.lambda));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Double torus

namespace {

// Damped Newton along the implicit gradient. Returns false on failure.
bool project_to_double_torus(Vec3& x, int max_iter = 100) {
  double f = double_torus_implicit(x);
  for (int it = 0; it < max_iter; ++it) {
    if (std::abs(f) < 1e-14) return true;
    const Vec3 grad = double_torus_gradient(x);
    const double g2 = grad.squaredNorm();
    if (g2 < 1e-300) return false;
    Vec3 stepv = -(f / g2) * grad;
    double damping = 1.0;
    bool improved = false;
    for (int back = 0; back < 30; ++back) {
      const Vec3 trial = x + damping * stepv;
      const double ft = double_torus_implicit(trial);
      if (std::abs(ft) < std::abs(f)) {
        x = trial;
        f = ft;
        improved = true;
        break;
      }
      damping *= 0.5;
    }
    if (!improved) return std::abs(f) < 1e-12;
  }
  return std::abs(f) < 1e-12;
}

}  // namespace

NodeSet sample_implicit_surface(SurfaceId surface, int count_target, std::uint64_t seed) {
  if (surface != SurfaceId::double_torus) {
    throw Error(ErrorKind::config, "sample_implicit_surface supports only double_torus");
  }
  if (count_target < 100) {
    throw Error(ErrorKind::config, "implicit surface node count must be at least 100");
  }
  const Vec3 lo(-1.2, -0.75, -0.3);
  const Vec3 hi(1.2, 0.75, 0.3);
  std::mt19937_64 rng(seed);
  std::vector<Vec3> pts;
  pts.reserve(count_target);
  const long max_attempts = 20L * count_target;
  for (long attempt = 0; attempt < max_attempts && static_cast<int>(pts.size()) < count_target;
       ++attempt) {
    Vec3 x;
    for (int a = 0; a < 3; ++a) x[a] = lo[a] + (hi[a] - lo[a]) * unit_double(rng);
    if (project_to_double_torus(x)) pts.push_back(x);
  }
  if (pts.size() < static_cast<std::size_t>(count_target) / 2) {
    throw Error(ErrorKind::sampling, "double torus sampling produced too few nodes");
  }

  relax_on_surface(pts, kDoubleTorusRelaxSweeps, [](Vec3& x) { return project_to_double_torus(x); },
                   [](const Vec3& x) { return double_torus_gradient(x).normalized(); });
  const int count = static_cast<int>(pts.size());

  NodeSet out;
  out.surface = SurfaceId::double_torus;
  out.points.reserve(count);
  out.normals.reserve(count);
  for (Vec3 x : pts) {
    project_to_double_torus(x);
    if (std::abs(double_torus_implicit(x)) >= 1e-10) continue;
    out.points.push_back(x);
    out.normals.push_back(double_torus_gradient(x).normalized());
  }
  if (out.size() < static_cast<std::size_t>(count_target) / 2) {
    throw Error(ErrorKind::sampling, "double torus sampling produced too few nodes");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Node files

NodeSet load_nodeset(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::parse, "cannot open node file " + path.string());
  NodeSet out;
  out.surface = SurfaceId::external;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    std::array<double, 6> v{};
    for (double& x : v) {
      if (!(ss >> x)) {
        throw Error(ErrorKind::parse, path.string() + ":" + std::to_string(lineno) +
                                          ": expected six numeric fields");
      }
    }
    std::string extra;
    if (ss >> extra) {
      throw Error(ErrorKind::parse,
                  path.string() + ":" + std::to_string(lineno) + ": trailing field '" + extra + "'");
    }
    Vec3 p(v[0], v[1], v[2]);
    Vec3 nrm(v[3], v[4], v[5]);
    if (!p.allFinite() || !nrm.allFinite()) {
      throw Error(ErrorKind::parse, path.string() + ":" + std::to_string(lineno) + ": non-finite value");
    }
    const double len = nrm.norm();
    if (len == 0.0) {
      throw Error(ErrorKind::parse, path.string() + ":" + std::to_string(lineno) + ": zero normal");
    }
    if (std::abs(len - 1.0) > 0.1 && warnings) {
      warnings->push_back(path.string() + ":" + std::to_string(lineno) +
                          ": normal length " + std::to_string(len) + " renormalized");
    }
    out.points.push_back(p);
    out.normals.push_back(nrm / len);
  }
  if (out.points.empty()) throw Error(ErrorKind::parse, "node file " + path.string() + " is empty");

  if (out.size() > 1) {
    KdTree tree(out.points);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto nb = tree.knn(out.points[i], 2);
      const int other = nb[0] == static_cast<int>(i) ? nb[1] : nb[0];
      if ((out.points[other] - out.points[i]).norm() <= 1e-14) {
        throw Error(ErrorKind::parse, "node file " + path.string() + ": duplicate point at entries " +
                                          std::to_string(std::min<std::size_t>(i, other) + 1) +
                                          " and " + std::to_string(std::max<std::size_t>(i, other) + 1));
      }
    }
  }
  return out;
}

void save_nodeset(const std::filesystem::path& path, const NodeSet& nodes) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::config, "cannot write node file " + path.string());
  out << "# surface " << to_string(nodes.surface) << ", " << nodes.size() << " nodes\n";
  out.precision(17);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& p = nodes.points[i];
    const auto& n = nodes.normals[i];
    out << p[0] << ' ' << p[1] << ' ' << p[2] << ' ' << n[0] << ' ' << n[1] << ' ' << n[2] << '\n';
  }
}

double min_pairwise_distance(const NodeSet& nodes) {
  if (nodes.size() < 2) return std::numeric_limits<double>::infinity();
  KdTree tree(nodes.points);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto nb = tree.knn(nodes.points[i], 2);
    best = std::min(best, (nodes.points[nb[1]] - nodes.points[nb[0]]).norm());
  }
  return best;
}

// ---------------------------------------------------------------------------
// Stencils

StencilSet build_stencils(const NodeSet& nodes, int n, double delta) {
  const int count = static_cast<int>(nodes.size());
  if (n < 1 || n > count) {
    throw Error(ErrorKind::config, "stencil size n=" + std::to_string(n) +
                                       " exceeds node count N=" + std::to_string(count));
  }
  if (!(delta > 0.0 && delta <= 1.0)) {
    throw Error(ErrorKind::config, "overlap delta must lie in (0, 1]");
  }
  KdTree tree(nodes.points);
  std::vector<Stencil> all(count);
#pragma omp parallel for schedule(static)
  for (int k = 0; k < count; ++k) {
    Stencil& s = all[k];
    s.center = k;
    s.neighbors = tree.knn(nodes.points[k], n);
    const Vec3& c = nodes.points[k];
    s.width = (nodes.points[s.neighbors.back()] - c).norm();
    s.retention_radius = (1.0 - delta) * s.width;
    int p = 0;
    while (p < n && (nodes.points[s.neighbors[p]] - c).norm() <= s.retention_radius) ++p;
    s.retained = std::max(p, 1);
  }

  StencilSet out;
  out.delta = delta;
  out.stencil_size = n;
  out.owner.assign(count, -1);
  for (int k = 0; k < count; ++k) {
    Stencil& s = all[k];
    for (int p = 0; p < s.retained; ++p) {
      if (out.owner[s.neighbors[p]] < 0) s.claimed.push_back(p);
    }
    if (s.claimed.empty()) continue;
    const int id = static_cast<int>(out.stencils.size());
    for (int p : s.claimed) out.owner[s.neighbors[p]] = id;
    out.stencils.push_back(std::move(s));
  }
  return out;
}

std::vector<int> brute_force_neighbors(const NodeSet& nodes, int center, int n) {
  return brute_force_knn(nodes.points, nodes.points[center], n);
}

}  // namespace rbfloi
