#pragma once

#include <algorithm>
#include <cmath>

#include "rbfloi/rbf_assembly.hpp"

namespace rbfloi::testing {

struct ReproductionError {
  double gradient = 0.0;
  double laplacian = 0.0;
};

// Worst relative mismatch over the retained basis: the weights applied to
// h_j must give the projected gradient of h_j at every stencil point, and
// the Laplacian block must equal the gradient weights composed with those
// exact gradients.
inline ReproductionError reproduction_error(const Stencil& s, const NodeSet& nodes,
                                            const StencilOperators& ops) {
  const int n = s.size();
  const int mp = ops.basis.size();
  DenseMatrix h(n, mp);
  std::array<DenseMatrix, 3> grad;
  for (auto& g : grad) g.resize(n, mp);
  for (int i = 0; i < n; ++i) {
    const Vec3 xi = (nodes.points[s.neighbors[i]] - ops.shift) / ops.scale;
    const auto ev = ops.basis.eval(xi);
    h.row(i) = ev.values.transpose();
    for (int j = 0; j < mp; ++j) {
      const Vec3 pg = surface_project(nodes.normals[s.neighbors[i]], ev.gradients.row(j).transpose()) /
                      ops.scale;
      for (int c = 0; c < 3; ++c) grad[c](i, j) = pg[c];
    }
  }
  ReproductionError out;
  DenseMatrix lap_ref = DenseMatrix::Zero(s.retained, mp);
  for (int c = 0; c < 3; ++c) lap_ref += ops.g[c].leftCols(s.retained).transpose() * grad[c];
  double grad_scale_all = 0.0;
  for (int c = 0; c < 3; ++c) grad_scale_all = std::max(grad_scale_all, grad[c].cwiseAbs().maxCoeff());
  for (int j = 0; j < mp; ++j) {
    double gscale = 0.0;
    for (int c = 0; c < 3; ++c) gscale = std::max(gscale, grad[c].col(j).cwiseAbs().maxCoeff());
    gscale = std::max(gscale, 1e-3 * grad_scale_all);
    for (int c = 0; c < 3; ++c) {
      const Eigen::VectorXd got = ops.g[c].transpose() * h.col(j);
      out.gradient = std::max(out.gradient, (got - grad[c].col(j)).cwiseAbs().maxCoeff() / gscale);
    }
    const Eigen::VectorXd lap = ops.lblock * h.col(j);
    const double lscale = std::max(lap_ref.col(j).cwiseAbs().maxCoeff(), gscale / ops.scale);
    out.laplacian = std::max(out.laplacian, (lap - lap_ref.col(j)).cwiseAbs().maxCoeff() / lscale);
  }
  return out;
}

}  // namespace rbfloi::testing
