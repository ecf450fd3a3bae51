#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Eigenvalues>

#include "rbfloi/errors.hpp"
#include "rbfloi/linalg.hpp"

namespace rbfloi {

namespace {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

CVector apply_complex(const SparseMatrix& a, const CVector& v) {
  Field re = v.real();
  Field im = v.imag();
  Field are, aim;
  spmv_into(a, re, are);
  spmv_into(a, im, aim);
  CVector out(v.size());
  out.real() = are;
  out.imag() = aim;
  return out;
}

// Swaps diagonal entries i and i+1 of the upper-triangular t, updating the
// Schur vectors q so that h = q t q^* still holds.
void swap_adjacent(CMatrix& t, CMatrix& q, Eigen::Index i) {
  const cplx t11 = t(i, i);
  const cplx t22 = t(i + 1, i + 1);
  cplx a = t(i, i + 1);
  cplx b = t22 - t11;
  const double nrm = std::hypot(std::abs(a), std::abs(b));
  if (nrm == 0.0) return;
  a /= nrm;
  b /= nrm;
  Eigen::Matrix2cd z;
  z << a, -std::conj(b), b, std::conj(a);
  t.middleCols(i, 2) = t.middleCols(i, 2) * z;
  t.middleRows(i, 2) = z.adjoint() * t.middleRows(i, 2);
  q.middleCols(i, 2) = q.middleCols(i, 2) * z;
  t(i + 1, i) = 0.0;
}

void sort_by_real_part(CMatrix& t, CMatrix& q) {
  const Eigen::Index m = t.rows();
  for (Eigen::Index pass = 0; pass < m; ++pass) {
    bool swapped = false;
    for (Eigen::Index i = 0; i + 1 < m - pass; ++i) {
      if (t(i + 1, i + 1).real() > t(i, i).real()) {
        swap_adjacent(t, q, i);
        swapped = true;
      }
    }
    if (!swapped) break;
  }
}

}  // namespace

RightmostEigenvalue rightmost_eigenvalue(const SparseMatrix& a, double tol,
                                         int max_restarts, int krylov_dim,
                                         unsigned seed) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw Error(ErrorKind::dimension, "rightmost_eigenvalue: matrix must be square");
  }
  const Eigen::Index n = a.rows();
  RightmostEigenvalue best;

  if (n <= krylov_dim) {
    const auto ev = dense_spectrum(DenseMatrix(a));
    best.value = *std::max_element(ev.begin(), ev.end(), [](cplx x, cplx y) {
      return x.real() < y.real();
    });
    best.converged = true;
    return best;
  }

  const Eigen::Index m = krylov_dim;
  const Eigen::Index keep = std::max<Eigen::Index>(1, m / 2);
  CMatrix v = CMatrix::Zero(n, m + 1);
  CMatrix h = CMatrix::Zero(m + 1, m);

  std::mt19937_64 rng(seed);
  for (Eigen::Index i = 0; i < n; ++i) {
    v(i, 0) = cplx(static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5, 0.0);
  }
  v.col(0).normalize();

  Eigen::Index start = 0;
  best.residual = std::numeric_limits<double>::infinity();
  for (int restart = 0; restart <= max_restarts; ++restart) {
    Eigen::Index filled = m;
    for (Eigen::Index j = start; j < m; ++j) {
      CVector w = apply_complex(a, v.col(j));
      // Classical Gram-Schmidt, two passes.
      for (int pass = 0; pass < 2; ++pass) {
        CVector c = v.leftCols(j + 1).adjoint() * w;
        w -= v.leftCols(j + 1) * c;
        h.col(j).head(j + 1) += c;
      }
      const double beta = w.norm();
      h(j + 1, j) = beta;
      if (beta <= 1e-13 * std::max(1.0, h.topLeftCorner(j + 2, j + 1).norm())) {
        filled = j + 1;
        break;
      }
      v.col(j + 1) = w / beta;
    }

    CMatrix hm = h.topLeftCorner(filled, filled);
    Eigen::ComplexSchur<CMatrix> schur(hm);
    if (schur.info() != Eigen::Success) {
      throw Error(ErrorKind::convergence, "rightmost_eigenvalue: Schur step failed");
    }
    CMatrix t = schur.matrixT();
    CMatrix q = schur.matrixU();
    sort_by_real_part(t, q);

    const cplx theta = t(0, 0);
    const cplx beta = h(filled, filled - 1);
    const bool invariant = filled < m;
    const double res = invariant ? 0.0 : std::abs(beta * q(filled - 1, 0));
    const double rel = res / std::max(std::abs(theta), std::numeric_limits<double>::min());
    best.value = theta;
    best.residual = rel;
    best.restarts = restart;
    if (invariant || rel <= tol) {
      best.converged = true;
      return best;
    }

    // Truncate to the leading Schur vectors and continue the expansion.
    CMatrix vk = v.leftCols(m) * q.leftCols(keep);
    CVector vnext = v.col(m);
    CVector bk = beta * q.row(m - 1).head(keep).transpose();
    v.setZero();
    v.leftCols(keep) = vk;
    v.col(keep) = vnext;
    h.setZero();
    h.topLeftCorner(keep, keep) = t.topLeftCorner(keep, keep);
    h.row(keep).head(keep) = bk.transpose();
    start = keep;
  }
  best.converged = false;
  return best;
}

}  // namespace rbfloi
