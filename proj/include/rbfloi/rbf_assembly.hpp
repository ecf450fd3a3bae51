#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rbfloi/geometry.hpp"
#include "rbfloi/linalg.hpp"
#include "rbfloi/polybasis.hpp"

namespace rbfloi {

// Parameters of one RBF-FD discretization. from_order() applies the usual
// heuristics: degree = order + operator_order - 1, M = C(degree+3, 3),
// n = 2M + 1, PHS exponent 2*degree + 1 and the overlap table
// (0.7 up to degree 4, 0.5 up to 6, 0.3 beyond).
struct AssemblyConfig {
  int target_order = 3;
  int operator_order = 2;
  int degree = 4;
  int basis_size = 35;
  int stencil_size = 71;
  int phs_exponent = 9;
  double delta = 0.7;
  double tau = 1e-3;

  static AssemblyConfig from_order(int target_order, int operator_order, double tau);
  static AssemblyConfig from_degree(int degree, double tau);

  static double default_delta(int degree);
  static int basis_size_for(int degree);

  int degree_cap() const { return degree + 2; }
  // Throws ErrorKind::config when m is even, M > floor(n/2) or delta is
  // outside (0.2, 1].
  void validate() const;
};

ValueGradient phs_eval(const Vec3& x, const Vec3& center, int m);

// (I - n n^T) v; the normal must be unit length within 1e-10.
Vec3 surface_project(const Vec3& normal, const Vec3& v);

struct StencilOperators {
  // Column i holds the weights that evaluate the component at stencil point i.
  std::array<DenseMatrix, 3> g;
  DenseMatrix lblock;            // retained x n
  std::vector<int> eliminated;   // LOI function indices removed by the axis fix
  // The basis actually used (after elimination), in the stencil's local
  // frame: xi = (x - shift) / scale.
  LoiBasis basis;
  Vec3 shift = Vec3::Zero();
  double scale = 1.0;
  int requested_basis = 0;
};

struct AxisFixResult {
  DenseMatrix h;                  // n x M'
  std::array<DenseMatrix, 3> bh;  // M' x n each
  std::vector<int> kept;
  std::vector<int> eliminated;
};

// Drops every basis index j > 0 whose row in any gradient-component block is
// numerically zero (max |entry| < 1e-12 of that block's max).
AxisFixResult axis_misalignment_fix(const DenseMatrix& h, const std::array<DenseMatrix, 3>& bh);

StencilOperators build_stencil_weights(const Stencil& stencil, const NodeSet& nodes,
                                       const AssemblyConfig& config);

// sum_c (G~_c)^T (G_c)^T: one row per retained node, one column per stencil node.
DenseMatrix stencil_laplacian(const StencilOperators& ops, const Stencil& stencil);

struct HyperviscosityParams {
  double gamma = 0.0;
  int power = 1;
};

struct GlobalOperators {
  std::array<SparseMatrix, 3> g;  // surface gradient components
  SparseMatrix laplacian;
  double lambda_max = 0.0;
  bool lambda_converged = false;
  HyperviscosityParams hyperviscosity;
  int stencil_count = 0;
  int total_eliminated = 0;
};

enum class Execution { serial, parallel };

// Assembles the global operators. Both execution modes produce bitwise
// identical matrices; the serial one is the reference.
GlobalOperators assemble_global(const StencilSet& stencils, const NodeSet& nodes,
                                const AssemblyConfig& config,
                                Execution execution = Execution::parallel);

struct LambdaMaxEstimate {
  double value = 0.0;
  bool converged = true;
  std::array<double, 3> per_component{};
};

LambdaMaxEstimate estimate_lambda_max(std::span<const SparseMatrix> ops, double tol = 8e-2);

// gamma = (-1)^(1+k) 2^(2-2k) sqrt(N)^(2-2k) lambda_max u_max, k = floor(ln n).
HyperviscosityParams hyperviscosity_params(double lambda_max, int stencil_size, int node_count,
                                           double u_max);

// gamma * L^k c by k repeated products.
Field apply_hyperviscosity(const SparseMatrix& laplacian, const HyperviscosityParams& hv,
                           const Field& c);

// "row col value" per line, zero-based, one line per stored entry.
void write_operator_triplets(const std::filesystem::path& path, const SparseMatrix& a);

}  // namespace rbfloi
