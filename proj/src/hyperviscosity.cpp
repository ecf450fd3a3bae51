#include <algorithm>
#include <cmath>

#include "rbfloi/errors.hpp"
#include "rbfloi/rbf_assembly.hpp"

namespace rbfloi {

LambdaMaxEstimate estimate_lambda_max(std::span<const SparseMatrix> ops, double tol) {
  if (ops.empty()) throw Error(ErrorKind::dimension, "estimate_lambda_max: no operators");
  LambdaMaxEstimate out;
  out.value = -std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < ops.size(); ++c) {
    const RightmostEigenvalue ev = rightmost_eigenvalue(ops[c], tol);
    if (c < out.per_component.size()) out.per_component[c] = ev.value.real();
    out.value = std::max(out.value, ev.value.real());
    out.converged = out.converged && ev.converged;
  }
  return out;
}

HyperviscosityParams hyperviscosity_params(double lambda_max, int stencil_size, int node_count,
                                           double u_max) {
  const int k = static_cast<int>(std::floor(std::log(static_cast<double>(stencil_size))));
  if (k < 1) throw Error(ErrorKind::config, "hyperviscosity power floor(ln n) must be >= 1");
  const double sign = (k % 2 == 1) ? 1.0 : -1.0;  // (-1)^(1+k)
  const double sqrt_n = std::sqrt(static_cast<double>(node_count));
  HyperviscosityParams hv;
  hv.power = k;
  hv.gamma = sign * std::pow(2.0, 2 - 2 * k) * std::pow(sqrt_n, 2 - 2 * k) * lambda_max * u_max;
  return hv;
}

Field apply_hyperviscosity(const SparseMatrix& laplacian, const HyperviscosityParams& hv,
                           const Field& c) {
  Field cur = c;
  Field next;
  for (int i = 0; i < hv.power; ++i) {
    spmv_into(laplacian, cur, next);
    cur.swap(next);
  }
  return hv.gamma * cur;
}

}  // namespace rbfloi
