#pragma once

#include <array>
#include <span>
#include <vector>

#include "rbfloi/linalg.hpp"

namespace rbfloi {

// Axis-aligned box carrying the tensor Chebyshev measure. Coordinates map
// affinely to s in [-1, 1]^3.
struct BoundingBox {
  Vec3 lower;
  Vec3 upper;

  // Smallest enclosing box; any axis thinner than 1e-8 of the widest one is
  // widened to 10% of the widest, keeping its center.
  static BoundingBox enclosing(std::span<const Vec3> points);

  Vec3 center() const { return 0.5 * (lower + upper); }
  // ds/dx per axis.
  Vec3 inverse_half_width() const { return (2.0 * (upper - lower).cwiseInverse()); }
  Vec3 to_reference(const Vec3& x) const {
    return (x - center()).cwiseProduct(inverse_half_width());
  }
  double diagonal() const { return (upper - lower).norm(); }
};

struct MultiIndex {
  std::array<int, 3> alpha{0, 0, 0};

  int degree() const { return alpha[0] + alpha[1] + alpha[2]; }
  bool operator==(const MultiIndex&) const = default;
};

// All multi-indices with |alpha| == degree, graded lexicographic (x-major).
std::vector<MultiIndex> homogeneous_indices(int degree);
inline int homogeneous_count(int degree) { return (degree + 1) * (degree + 2) / 2; }

struct ValueGradient {
  double value = 0.0;
  Vec3 gradient = Vec3::Zero();
};

// Univariate orthonormal Chebyshev values T_0..T_max and derivatives d/ds,
// by three-term recurrence (valid outside [-1, 1] too).
void chebyshev_table(double s, int max_degree, std::span<double> values,
                     std::span<double> derivatives);

// phi_alpha(x) = prod_q T_{alpha_q}(s_q) and its Cartesian gradient.
ValueGradient chebyshev_tensor_eval(const BoundingBox& box, const MultiIndex& alpha, const Vec3& x);

struct LoiFunction {
  int degree = 0;
  // Coefficients over homogeneous_indices(degree).
  Eigen::VectorXd coefficients;
};

class LoiBasis {
 public:
  BoundingBox box;
  std::vector<LoiFunction> functions;
  std::vector<int> associated_points;  // index into the construction points
  double tau = 0.0;

  int size() const { return static_cast<int>(functions.size()); }
  int max_degree() const;
  std::vector<int> degrees() const;

  struct Evaluation {
    Eigen::VectorXd values;      // M
    Eigen::Matrix<double, Eigen::Dynamic, 3> gradients;  // M x 3
  };
  Evaluation eval(const Vec3& x) const;

  // n x M matrix [h_j(x_i)].
  DenseMatrix collocation(std::span<const Vec3> points) const;

  // Keeps the listed functions, in the listed order.
  LoiBasis subset(std::span<const int> keep) const;
};

// Sequential least orthogonal interpolation. At each step the candidate
// residual of point j at degree r is the degree-r coefficient block of
// v_{j,r} minus its interpolant on the selected points (the interpolation
// error of every phi_alpha, |alpha| = r, at x_j). A point is admitted when the
// largest residual norm is >= tau; otherwise r increases. Stops at
// max_functions functions or when r would exceed degree_cap.
LoiBasis loi_construct(std::span<const Vec3> points, const BoundingBox& box, double tau,
                       int max_functions, int degree_cap);

// Convenience: all points, bounding box of the points.
LoiBasis loi_construct(std::span<const Vec3> points, double tau, int degree_cap);

// Solves [h_j(x_{i_l})] c = data on the basis' associated points.
Eigen::VectorXd loi_interpolate(const LoiBasis& basis, std::span<const Vec3> sample_points,
                                const Eigen::VectorXd& data);

// Exact Gauss-Chebyshev tensor quadrature of <h_j, h_l>, for verification.
DenseMatrix loi_gram_by_quadrature(const LoiBasis& basis);

}  // namespace rbfloi
