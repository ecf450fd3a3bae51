#include "rbfloi/rbf_assembly.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "rbfloi/errors.hpp"

namespace rbfloi {

// ---------------------------------------------------------------------------
// Configuration

int AssemblyConfig::basis_size_for(int degree) {
  return (degree + 1) * (degree + 2) * (degree + 3) / 6;
}

double AssemblyConfig::default_delta(int degree) {
  if (degree <= 4) return 0.7;
  if (degree <= 6) return 0.5;
  return 0.3;
}

AssemblyConfig AssemblyConfig::from_degree(int degree, double tau) {
  if (degree < 0) throw Error(ErrorKind::config, "polynomial degree must be nonnegative");
  AssemblyConfig c;
  c.degree = degree;
  c.basis_size = basis_size_for(degree);
  c.stencil_size = 2 * c.basis_size + 1;
  c.phs_exponent = 2 * degree + 1;
  c.delta = default_delta(degree);
  c.tau = tau;
  c.operator_order = 2;
  c.target_order = degree + 1 - c.operator_order;
  return c;
}

AssemblyConfig AssemblyConfig::from_order(int target_order, int operator_order, double tau) {
  if (target_order < 1 || operator_order < 1) {
    throw Error(ErrorKind::config, "target and operator orders must be positive");
  }
  AssemblyConfig c = from_degree(target_order + operator_order - 1, tau);
  c.target_order = target_order;
  c.operator_order = operator_order;
  return c;
}

void AssemblyConfig::validate() const {
  if (phs_exponent < 3 || phs_exponent % 2 == 0) {
    throw Error(ErrorKind::config, "PHS exponent must be odd and at least 3");
  }
  if (basis_size < 1 || basis_size > stencil_size / 2) {
    throw Error(ErrorKind::config, "basis size M must satisfy 1 <= M <= floor(n/2)");
  }
  if (!(delta > 0.2 && delta <= 1.0)) {
    throw Error(ErrorKind::config, "overlap delta must lie in (0.2, 1]");
  }
  if (!(tau >= 0.0)) throw Error(ErrorKind::config, "LOI tolerance must be nonnegative");
}

// ---------------------------------------------------------------------------
// Kernels

ValueGradient phs_eval(const Vec3& x, const Vec3& center, int m) {
  if (m % 2 == 0 || m < 1) throw Error(ErrorKind::config, "PHS exponent must be odd");
  const Vec3 d = x - center;
  const double r = d.norm();
  ValueGradient out;
  if (r == 0.0) return out;
  const double rm2 = std::pow(r, m - 2);
  out.value = rm2 * r * r;
  out.gradient = m * rm2 * d;
  return out;
}

Vec3 surface_project(const Vec3& normal, const Vec3& v) {
  if (std::abs(normal.norm() - 1.0) > 1e-10) {
    throw Error(ErrorKind::config, "surface_project: normal is not unit length");
  }
  return v - normal.dot(v) * normal;
}

// ---------------------------------------------------------------------------
// Per-stencil weights

AxisFixResult axis_misalignment_fix(const DenseMatrix& h, const std::array<DenseMatrix, 3>& bh) {
  const Eigen::Index m = h.cols();
  std::array<double, 3> block_max{};
  for (int c = 0; c < 3; ++c) block_max[c] = bh[c].size() ? bh[c].cwiseAbs().maxCoeff() : 0.0;

  AxisFixResult out;
  for (Eigen::Index j = 0; j < m; ++j) {
    bool zero = false;
    if (j > 0) {
      for (int c = 0; c < 3; ++c) {
        const double row_max = bh[c].row(j).cwiseAbs().maxCoeff();
        if (row_max < 1e-12 * block_max[c]) zero = true;
      }
    }
    (zero ? out.eliminated : out.kept).push_back(static_cast<int>(j));
  }
  const auto kept = static_cast<Eigen::Index>(out.kept.size());
  out.h.resize(h.rows(), kept);
  for (int c = 0; c < 3; ++c) out.bh[c].resize(kept, bh[c].cols());
  for (Eigen::Index q = 0; q < kept; ++q) {
    out.h.col(q) = h.col(out.kept[q]);
    for (int c = 0; c < 3; ++c) out.bh[c].row(q) = bh[c].row(out.kept[q]);
  }
  return out;
}

StencilOperators build_stencil_weights(const Stencil& stencil, const NodeSet& nodes,
                                       const AssemblyConfig& config) {
  const int n = stencil.size();
  if (n != config.stencil_size) {
    throw Error(ErrorKind::config, "stencil size does not match the assembly configuration");
  }
  const int m = config.phs_exponent;

  StencilOperators ops;
  ops.shift = nodes.points[stencil.center];
  ops.scale = stencil.width > 0.0 ? stencil.width : 1.0;
  ops.requested_basis = config.basis_size;

  std::vector<Vec3> xi(n);
  std::vector<Vec3> normal(n);
  for (int i = 0; i < n; ++i) {
    xi[i] = (nodes.points[stencil.neighbors[i]] - ops.shift) / ops.scale;
    normal[i] = nodes.normals[stencil.neighbors[i]];
  }

  const LoiBasis full = loi_construct(xi, BoundingBox::enclosing(xi), config.tau,
                                      std::min(config.basis_size, n), config.degree_cap());
  const int m_full = full.size();

  DenseMatrix h(n, m_full);
  std::array<DenseMatrix, 3> bh;
  for (auto& b : bh) b.resize(m_full, n);
  for (int i = 0; i < n; ++i) {
    const auto ev = full.eval(xi[i]);
    h.row(i) = ev.values.transpose();
    for (int j = 0; j < m_full; ++j) {
      const Vec3 pg = surface_project(normal[i], ev.gradients.row(j).transpose());
      for (int c = 0; c < 3; ++c) bh[c](j, i) = pg[c];
    }
  }

  AxisFixResult fixed = axis_misalignment_fix(h, bh);
  ops.eliminated = fixed.eliminated;
  ops.basis = full.subset(fixed.kept);
  const int mp = static_cast<int>(fixed.kept.size());

  const int size = n + mp;
  DenseMatrix k = DenseMatrix::Zero(size, size);
  DenseMatrix rhs(size, 3 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      // Row j: kernel centered at xi[j]; column i: evaluation point xi[i].
      const ValueGradient kv = phs_eval(xi[i], xi[j], m);
      if (j >= i) k(i, j) = k(j, i) = kv.value;
      const Vec3 pg = surface_project(normal[i], kv.gradient);
      for (int c = 0; c < 3; ++c) rhs(j, c * n + i) = pg[c];
    }
  }
  k.topRightCorner(n, mp) = fixed.h;
  k.bottomLeftCorner(mp, n) = fixed.h.transpose();
  for (int c = 0; c < 3; ++c) rhs.block(n, c * n, mp, n) = fixed.bh[c];

  DenseMatrix sol;
  try {
    sol = DenseLU(k).solve(rhs);
  } catch (const SingularMatrixError& e) {
    throw SingularMatrixError("stencil " + std::to_string(stencil.center) +
                                  ": singular saddle system (" + e.what() + ")",
                              stencil.center);
  }
  if (!sol.allFinite()) {
    throw SingularMatrixError(
        "stencil " + std::to_string(stencil.center) + ": non-finite weights", stencil.center);
  }
  const double inv_scale = 1.0 / ops.scale;
  for (int c = 0; c < 3; ++c) ops.g[c] = sol.block(0, c * n, n, n) * inv_scale;
  ops.lblock = stencil_laplacian(ops, stencil);
  return ops;
}

DenseMatrix stencil_laplacian(const StencilOperators& ops, const Stencil& stencil) {
  const int p = stencil.retained;
  const Eigen::Index n = ops.g[0].rows();
  DenseMatrix l = DenseMatrix::Zero(p, n);
  for (int c = 0; c < 3; ++c) {
    l.noalias() += ops.g[c].leftCols(p).transpose() * ops.g[c].transpose();
  }
  return l;
}

// ---------------------------------------------------------------------------
// Global assembly

namespace {

struct RowEntries {
  std::vector<int> cols;
  std::vector<double> vals;
};

// Claimed rows of one stencil, columns sorted ascending.
struct StencilRows {
  std::vector<int> rows;                   // global node index per claimed position
  std::array<std::vector<RowEntries>, 4> data;  // gx, gy, gz, laplacian
  int eliminated = 0;
};

StencilRows stencil_rows(const Stencil& s, const NodeSet& nodes, const AssemblyConfig& config) {
  const StencilOperators ops = build_stencil_weights(s, nodes, config);
  const int n = s.size();
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  std::sort(perm.begin(), perm.end(),
            [&](int a, int b) { return s.neighbors[a] < s.neighbors[b]; });

  StencilRows out;
  out.eliminated = static_cast<int>(ops.eliminated.size());
  for (int p : s.claimed) {
    out.rows.push_back(s.neighbors[p]);
    for (int op = 0; op < 4; ++op) {
      RowEntries e;
      e.cols.reserve(n);
      e.vals.reserve(n);
      for (int q : perm) {
        e.cols.push_back(s.neighbors[q]);
        e.vals.push_back(op < 3 ? ops.g[op](q, p) : ops.lblock(p, q));
      }
      out.data[op].push_back(std::move(e));
    }
  }
  return out;
}

std::string stencil_failure(const Stencil& s, const NodeSet& nodes, const std::string& what) {
  std::ostringstream msg;
  msg << "assembly failed on stencil centered at node " << s.center << ": " << what
      << "; stencil points:";
  msg.precision(17);
  for (int idx : s.neighbors) {
    const auto& p = nodes.points[idx];
    msg << " [" << idx << ": " << p[0] << ' ' << p[1] << ' ' << p[2] << ']';
  }
  return msg.str();
}

SparseMatrix rows_to_csr(int count, const std::vector<const RowEntries*>& rows) {
  SparseMatrix a(count, count);
  Eigen::VectorXi sizes(count);
  for (int i = 0; i < count; ++i) sizes[i] = rows[i] ? static_cast<int>(rows[i]->cols.size()) : 0;
  a.reserve(sizes);
  for (int i = 0; i < count; ++i) {
    if (!rows[i]) continue;
    for (std::size_t q = 0; q < rows[i]->cols.size(); ++q) {
      a.insert(i, rows[i]->cols[q]) = rows[i]->vals[q];
    }
  }
  a.makeCompressed();
  return a;
}

GlobalOperators gather(const StencilSet& set, int count, const std::vector<StencilRows>& per) {
  GlobalOperators out;
  out.stencil_count = static_cast<int>(set.stencils.size());
  for (int op = 0; op < 4; ++op) {
    std::vector<const RowEntries*> rows(count, nullptr);
    for (const auto& sr : per) {
      for (std::size_t q = 0; q < sr.rows.size(); ++q) rows[sr.rows[q]] = &sr.data[op][q];
    }
    SparseMatrix a = rows_to_csr(count, rows);
    if (op < 3) out.g[op] = std::move(a);
    else out.laplacian = std::move(a);
  }
  for (const auto& sr : per) out.total_eliminated += sr.eliminated;
  return out;
}

}  // namespace

GlobalOperators assemble_global(const StencilSet& set, const NodeSet& nodes,
                                const AssemblyConfig& config, Execution execution) {
  config.validate();
  if (set.stencil_size != config.stencil_size) {
    throw Error(ErrorKind::config, "stencil set built with a different stencil size");
  }
  const int count = static_cast<int>(nodes.size());
  const int ns = static_cast<int>(set.stencils.size());
  std::vector<StencilRows> per(ns);

  if (execution == Execution::serial) {
    for (int s = 0; s < ns; ++s) {
      try {
        per[s] = stencil_rows(set.stencils[s], nodes, config);
      } catch (const std::exception& e) {
        throw Error(ErrorKind::singular, stencil_failure(set.stencils[s], nodes, e.what()));
      }
    }
    return gather(set, count, per);
  }

  int failed = std::numeric_limits<int>::max();
  std::string failure;
#pragma omp parallel for schedule(dynamic, 4)
  for (int s = 0; s < ns; ++s) {
    try {
      per[s] = stencil_rows(set.stencils[s], nodes, config);
    } catch (const std::exception& e) {
#pragma omp critical(rbfloi_assembly_failure)
      if (s < failed) {
        failed = s;
        failure = e.what();
      }
    }
  }
  if (failed != std::numeric_limits<int>::max()) {
    throw Error(ErrorKind::singular, stencil_failure(set.stencils[failed], nodes, failure));
  }
  return gather(set, count, per);
}

void write_operator_triplets(const std::filesystem::path& path, const SparseMatrix& a) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::config, "cannot write " + path.string());
  out.precision(17);
  for (int i = 0; i < a.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(a, i); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
}

}  // namespace rbfloi
