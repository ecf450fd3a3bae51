#pragma once

#include <complex>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>
#include <Eigen/SparseCore>

namespace rbfloi {

using Vec3 = Eigen::Vector3d;
using DenseMatrix = Eigen::MatrixXd;
using Field = Eigen::VectorXd;
// Compressed-row storage; column indices sorted within each row.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor, int>;

// Throws ErrorKind::parse if any entry is NaN or Inf.
void require_finite(const DenseMatrix& a, const char* what);

// LU with partial pivoting. The factorization is computed once and reused
// for any number of right-hand sides.
class DenseLU {
 public:
  explicit DenseLU(const DenseMatrix& a);

  DenseMatrix solve(const DenseMatrix& b) const;
  Eigen::Index size() const { return lu_.rows(); }

 private:
  Eigen::PartialPivLU<DenseMatrix> lu_;
};

DenseMatrix dense_factor_solve(const DenseMatrix& a, const DenseMatrix& b);

struct QrFactors {
  DenseMatrix q;  // rows x cols, orthonormal columns
  DenseMatrix r;  // cols x cols, upper triangular
};

// Thin Householder QR; requires rows >= cols.
QrFactors qr_factor(const DenseMatrix& a);

// Row-major accumulation in a fixed order, so both variants are bitwise
// identical on every input.
Field spmv_serial(const SparseMatrix& a, const Field& x);
Field spmv(const SparseMatrix& a, const Field& x);
void spmv_into(const SparseMatrix& a, const Field& x, Field& y);

// Structural checks behind the CSR invariants.
bool is_canonical_csr(const SparseMatrix& a);

// Sparse LU with approximate-minimum-degree ordering. One handle owns one
// factorization; solves never refactor.
class SparseLUHandle {
 public:
  SparseLUHandle();
  ~SparseLUHandle();
  SparseLUHandle(SparseLUHandle&&) noexcept;
  SparseLUHandle& operator=(SparseLUHandle&&) noexcept;

  explicit SparseLUHandle(const SparseMatrix& a);

  void factor(const SparseMatrix& a);
  Field solve(const Field& b) const;

  bool factored() const;
  int factorization_count() const { return factorizations_; }
  Eigen::Index size() const;
  // Nonzeros in L + U, a proxy for fill-in.
  long factor_nonzeros() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
  int factorizations_ = 0;
};

Field sparse_solve(const SparseMatrix& a, const Field& b, SparseLUHandle& reuse);

// Full spectrum via Hessenberg reduction and shifted QR.
std::vector<std::complex<double>> dense_spectrum(const DenseMatrix& a);

inline constexpr Eigen::Index kDenseSpectrumCap = 5000;

struct RightmostEigenvalue {
  std::complex<double> value;
  double residual = 0.0;  // Ritz residual relative to |value|
  int restarts = 0;
  bool converged = false;
};

// Krylov-Schur (complex arithmetic) targeting the eigenvalue of largest
// real part. Returns the best estimate with converged=false on cap.
RightmostEigenvalue rightmost_eigenvalue(const SparseMatrix& a, double tol,
                                         int max_restarts = 300,
                                         int krylov_dim = 40,
                                         unsigned seed = 7);

}  // namespace rbfloi
