#include "rbfloi/polybasis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rbfloi/errors.hpp"

namespace rbfloi {

namespace {

// Admission floor below which a residual is treated as rounding noise even
// when tau == 0.
constexpr double kResidualFloor = 1e-10;

// Per-axis Chebyshev tables for one point.
struct AxisTables {
  int max_degree = 0;
  std::array<std::vector<double>, 3> value;
  std::array<std::vector<double>, 3> deriv;  // d/dx (chain rule applied)

  AxisTables(const BoundingBox& box, const Vec3& x, int max_deg) : max_degree(max_deg) {
    const Vec3 s = box.to_reference(x);
    const Vec3 ds = box.inverse_half_width();
    for (int a = 0; a < 3; ++a) {
      value[a].resize(max_deg + 1);
      deriv[a].resize(max_deg + 1);
      chebyshev_table(s[a], max_deg, value[a], deriv[a]);
      for (double& d : deriv[a]) d *= ds[a];
    }
  }

  double phi(const MultiIndex& m) const {
    return value[0][m.alpha[0]] * value[1][m.alpha[1]] * value[2][m.alpha[2]];
  }

  Vec3 grad(const MultiIndex& m) const {
    const double vx = value[0][m.alpha[0]], vy = value[1][m.alpha[1]], vz = value[2][m.alpha[2]];
    return {deriv[0][m.alpha[0]] * vy * vz, vx * deriv[1][m.alpha[1]] * vz,
            vx * vy * deriv[2][m.alpha[2]]};
  }
};

constexpr int kMaxTabulatedDegree = 32;

const std::vector<MultiIndex>& indices_of(int degree) {
  static const auto table = [] {
    std::vector<std::vector<MultiIndex>> t;
    for (int d = 0; d <= kMaxTabulatedDegree; ++d) t.push_back(homogeneous_indices(d));
    return t;
  }();
  if (degree > kMaxTabulatedDegree) throw Error(ErrorKind::config, "polynomial degree above 32");
  return table[degree];
}

void require_distinct(std::span<const Vec3> points) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (points[i] == points[j]) {
        throw Error(ErrorKind::config, "loi_construct: duplicate points " + std::to_string(i) +
                                           " and " + std::to_string(j));
      }
    }
  }
}

}  // namespace

BoundingBox BoundingBox::enclosing(std::span<const Vec3> points) {
  if (points.empty()) throw Error(ErrorKind::config, "bounding box of an empty point set");
  BoundingBox b{points[0], points[0]};
  for (const auto& p : points) {
    b.lower = b.lower.cwiseMin(p);
    b.upper = b.upper.cwiseMax(p);
  }
  const Vec3 extent = b.upper - b.lower;
  double widest = extent.maxCoeff();
  if (widest <= 0.0) widest = 1.0;  // single point: unit box around it
  for (int a = 0; a < 3; ++a) {
    if (extent[a] < 1e-8 * widest || extent[a] <= 0.0) {
      const double mid = 0.5 * (b.lower[a] + b.upper[a]);
      b.lower[a] = mid - 0.05 * widest;
      b.upper[a] = mid + 0.05 * widest;
    }
  }
  return b;
}

std::vector<MultiIndex> homogeneous_indices(int degree) {
  std::vector<MultiIndex> out;
  out.reserve(homogeneous_count(degree));
  for (int a = degree; a >= 0; --a) {
    for (int b = degree - a; b >= 0; --b) out.push_back(MultiIndex{{a, b, degree - a - b}});
  }
  return out;
}

void chebyshev_table(double s, int max_degree, std::span<double> values,
                     std::span<double> derivatives) {
  // Classical recurrences for T_q and T_q', then orthonormal scaling sqrt(2).
  double c_prev = 1.0, c_cur = s;
  double d_prev = 0.0, d_cur = 1.0;
  values[0] = 1.0;
  derivatives[0] = 0.0;
  for (int q = 1; q <= max_degree; ++q) {
    values[q] = std::numbers::sqrt2 * c_cur;
    derivatives[q] = std::numbers::sqrt2 * d_cur;
    const double c_next = 2.0 * s * c_cur - c_prev;
    const double d_next = 2.0 * c_cur + 2.0 * s * d_cur - d_prev;
    c_prev = c_cur;
    c_cur = c_next;
    d_prev = d_cur;
    d_cur = d_next;
  }
}

ValueGradient chebyshev_tensor_eval(const BoundingBox& box, const MultiIndex& alpha, const Vec3& x) {
  const AxisTables t(box, x, std::max({alpha.alpha[0], alpha.alpha[1], alpha.alpha[2]}));
  return {t.phi(alpha), t.grad(alpha)};
}

// ---------------------------------------------------------------------------

int LoiBasis::max_degree() const {
  int d = 0;
  for (const auto& f : functions) d = std::max(d, f.degree);
  return d;
}

std::vector<int> LoiBasis::degrees() const {
  std::vector<int> out;
  out.reserve(functions.size());
  for (const auto& f : functions) out.push_back(f.degree);
  return out;
}

LoiBasis::Evaluation LoiBasis::eval(const Vec3& x) const {
  const AxisTables t(box, x, max_degree());
  Evaluation out;
  out.values.resize(size());
  out.gradients.resize(size(), 3);
  for (int j = 0; j < size(); ++j) {
    const auto& f = functions[j];
    const auto& idx = indices_of(f.degree);
    double v = 0.0;
    Vec3 g = Vec3::Zero();
    for (std::size_t a = 0; a < idx.size(); ++a) {
      const double c = f.coefficients[static_cast<Eigen::Index>(a)];
      v += c * t.phi(idx[a]);
      g += c * t.grad(idx[a]);
    }
    out.values[j] = v;
    out.gradients.row(j) = g.transpose();
  }
  return out;
}

DenseMatrix LoiBasis::collocation(std::span<const Vec3> points) const {
  DenseMatrix c(static_cast<Eigen::Index>(points.size()), size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    c.row(static_cast<Eigen::Index>(i)) = eval(points[i]).values.transpose();
  }
  return c;
}

LoiBasis LoiBasis::subset(std::span<const int> keep) const {
  LoiBasis out;
  out.box = box;
  out.tau = tau;
  for (int j : keep) {
    out.functions.push_back(functions.at(j));
    out.associated_points.push_back(associated_points.at(j));
  }
  return out;
}

// ---------------------------------------------------------------------------

LoiBasis loi_construct(std::span<const Vec3> points, const BoundingBox& box, double tau,
                       int max_functions, int degree_cap) {
  const int n = static_cast<int>(points.size());
  if (n == 0) throw Error(ErrorKind::config, "loi_construct: no points");
  if (max_functions < 1 || max_functions > n) {
    throw Error(ErrorKind::config, "loi_construct: requested basis size must lie in [1, |points|]");
  }
  if (degree_cap < 0) throw Error(ErrorKind::config, "loi_construct: negative degree cap");
  if (!(tau >= 0.0)) throw Error(ErrorKind::config, "loi_construct: tau must be nonnegative");
  require_distinct(points);

  // Column offsets of each homogeneous degree block.
  std::vector<int> offset(degree_cap + 2, 0);
  for (int r = 0; r <= degree_cap; ++r) offset[r + 1] = offset[r] + homogeneous_count(r);
  const int total = offset.back();

  // Row j of w starts as the coefficients of the representor v_j truncated at
  // degree_cap. Eliminating against each new function keeps
  // w_j = v_j - sum_q l_q(x_j) v_{i_q}, whose degree-r block is the
  // interpolation error of the degree-r orthonormal polynomials at x_j.
  DenseMatrix w(n, total);
  for (int j = 0; j < n; ++j) {
    const AxisTables t(box, points[j], degree_cap);
    for (int r = 0; r <= degree_cap; ++r) {
      const auto& idx = indices_of(r);
      for (std::size_t a = 0; a < idx.size(); ++a) w(j, offset[r] + static_cast<int>(a)) = t.phi(idx[a]);
    }
  }

  LoiBasis out;
  out.box = box;
  out.tau = tau;
  std::vector<bool> selected(n, false);
  int r = 0;
  while (out.size() < max_functions && r <= degree_cap) {
    const int c0 = offset[r];
    const int width = offset[r + 1] - c0;
    double best = -1.0;
    int pick = -1;
    for (int j = 0; j < n; ++j) {
      if (selected[j]) continue;
      const double norm = w.row(j).segment(c0, width).norm();
      if (norm > best) {
        best = norm;
        pick = j;
      }
    }
    if (pick < 0 || best < tau || best <= kResidualFloor) {
      ++r;
      continue;
    }

    Eigen::VectorXd d = w.row(pick).segment(c0, width).transpose() / best;
    // Re-orthogonalize against same-degree functions (zero in exact arithmetic).
    for (const auto& f : out.functions) {
      if (f.degree == r) d -= f.coefficients.dot(d) * f.coefficients;
    }
    d.normalize();
    const double pivot = w.row(pick).segment(c0, width).dot(d);
    const Eigen::RowVectorXd pivot_row = w.row(pick).segment(c0, total - c0);
    for (int j = 0; j < n; ++j) {
      if (selected[j] || j == pick) continue;
      const double coef = w.row(j).segment(c0, width).dot(d) / pivot;
      if (coef != 0.0) w.row(j).segment(c0, total - c0) -= coef * pivot_row;
    }
    selected[pick] = true;
    out.functions.push_back(LoiFunction{r, std::move(d)});
    out.associated_points.push_back(pick);
  }
  if (out.size() == 0) {
    throw Error(ErrorKind::singular, "loi_construct: degree cap exhausted with no functions");
  }
  return out;
}

LoiBasis loi_construct(std::span<const Vec3> points, double tau, int degree_cap) {
  return loi_construct(points, BoundingBox::enclosing(points), tau, static_cast<int>(points.size()),
                       degree_cap);
}

Eigen::VectorXd loi_interpolate(const LoiBasis& basis, std::span<const Vec3> sample_points,
                                const Eigen::VectorXd& data) {
  if (static_cast<int>(sample_points.size()) != basis.size() || data.size() != basis.size()) {
    throw Error(ErrorKind::dimension, "loi_interpolate: sizes must equal the basis size");
  }
  const DenseMatrix c = basis.collocation(sample_points);
  Eigen::VectorXd coef = DenseLU(c).solve(data);
  const double scale = std::max(data.norm(), c.norm() * coef.norm());
  if (scale > 0.0 && (c * coef - data).norm() > 1e-8 * scale) {
    throw SingularMatrixError("loi_interpolate: collocation matrix numerically singular", -1);
  }
  return coef;
}

DenseMatrix loi_gram_by_quadrature(const LoiBasis& basis) {
  const int q = basis.max_degree() + 1;
  std::vector<double> nodes(q);
  for (int i = 0; i < q; ++i) nodes[i] = std::cos((2.0 * i + 1.0) * std::numbers::pi / (2.0 * q));
  const Vec3 c = basis.box.center();
  const Vec3 half = 0.5 * (basis.box.upper - basis.box.lower);
  const int m = basis.size();
  DenseMatrix gram = DenseMatrix::Zero(m, m);
  const double weight = 1.0 / (static_cast<double>(q) * q * q);
  for (int a = 0; a < q; ++a)
    for (int b = 0; b < q; ++b)
      for (int e = 0; e < q; ++e) {
        const Vec3 x = c + half.cwiseProduct(Vec3(nodes[a], nodes[b], nodes[e]));
        const Eigen::VectorXd v = basis.eval(x).values;
        gram.noalias() += weight * v * v.transpose();
      }
  return gram;
}

}  // namespace rbfloi
