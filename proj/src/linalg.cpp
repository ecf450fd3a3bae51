#include "rbfloi/linalg.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <sstream>

#include <Eigen/QR>

#include "rbfloi/errors.hpp"

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>
#include <suitesparse/umfpack.h>

namespace rbfloi {

void require_finite(const DenseMatrix& a, const char* what) {
  if (!a.allFinite()) {
    throw Error(ErrorKind::parse, std::string(what) + ": non-finite entry");
  }
}

DenseLU::DenseLU(const DenseMatrix& a) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorKind::dimension, "DenseLU: matrix is not square");
  }
  require_finite(a, "DenseLU");
  lu_.compute(a);
  const auto& lu = lu_.matrixLU();
  for (Eigen::Index i = 0; i < lu.rows(); ++i) {
    if (lu(i, i) == 0.0 || !std::isfinite(lu(i, i))) {
      std::ostringstream msg;
      msg << "DenseLU: zero pivot at index " << i;
      throw SingularMatrixError(msg.str(), i);
    }
  }
}

DenseMatrix DenseLU::solve(const DenseMatrix& b) const {
  if (b.rows() != lu_.rows()) {
    throw Error(ErrorKind::dimension, "DenseLU::solve: row mismatch");
  }
  return lu_.solve(b);
}

DenseMatrix dense_factor_solve(const DenseMatrix& a, const DenseMatrix& b) {
  return DenseLU(a).solve(b);
}

QrFactors qr_factor(const DenseMatrix& a) {
  if (a.rows() < a.cols()) {
    throw Error(ErrorKind::dimension, "qr_factor: rows < cols");
  }
  Eigen::HouseholderQR<DenseMatrix> qr(a);
  QrFactors out;
  out.q = qr.householderQ() * DenseMatrix::Identity(a.rows(), a.cols());
  out.r = qr.matrixQR().topRows(a.cols()).triangularView<Eigen::Upper>();
  return out;
}

namespace {

inline double row_dot(const SparseMatrix& a, Eigen::Index row, const Field& x) {
  const int* outer = a.outerIndexPtr();
  const int* inner = a.innerIndexPtr();
  const double* val = a.valuePtr();
  double s = 0.0;
  for (int p = outer[row]; p < outer[row + 1]; ++p) s += val[p] * x[inner[p]];
  return s;
}

void check_spmv_dims(const SparseMatrix& a, const Field& x) {
  if (a.cols() != x.size()) {
    throw Error(ErrorKind::dimension, "spmv: dimension mismatch");
  }
  if (!a.isCompressed()) {
    throw Error(ErrorKind::dimension, "spmv: matrix not compressed");
  }
}

}  // namespace

Field spmv_serial(const SparseMatrix& a, const Field& x) {
  check_spmv_dims(a, x);
  Field y(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) y[i] = row_dot(a, i, x);
  return y;
}

void spmv_into(const SparseMatrix& a, const Field& x, Field& y) {
  check_spmv_dims(a, x);
  y.resize(a.rows());
  const Eigen::Index rows = a.rows();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < rows; ++i) y[i] = row_dot(a, i, x);
}

Field spmv(const SparseMatrix& a, const Field& x) {
  Field y;
  spmv_into(a, x, y);
  return y;
}

bool is_canonical_csr(const SparseMatrix& a) {
  if (!a.isCompressed()) return false;
  const int* outer = a.outerIndexPtr();
  const int* inner = a.innerIndexPtr();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    if (outer[i] > outer[i + 1]) return false;
    for (int p = outer[i] + 1; p < outer[i + 1]; ++p) {
      if (inner[p] <= inner[p - 1]) return false;
    }
  }
  return true;
}

struct SparseLUHandle::Impl {
  using ColMajor = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
  ColMajor a;
  void* symbolic = nullptr;
  void* numeric = nullptr;
  std::array<double, UMFPACK_CONTROL> control{};
  std::array<double, UMFPACK_INFO> info{};

  Impl() {
    umfpack_di_defaults(control.data());
    control[UMFPACK_ORDERING] = UMFPACK_ORDERING_AMD;
    control[UMFPACK_IRSTEP] = 0;  // refinement is done by the caller
  }
  ~Impl() {
    if (numeric) umfpack_di_free_numeric(&numeric);
    if (symbolic) umfpack_di_free_symbolic(&symbolic);
  }
  Impl(const Impl&) = delete;
  Impl& operator=(const Impl&) = delete;
};

SparseLUHandle::SparseLUHandle() = default;
SparseLUHandle::~SparseLUHandle() = default;
SparseLUHandle::SparseLUHandle(SparseLUHandle&&) noexcept = default;
SparseLUHandle& SparseLUHandle::operator=(SparseLUHandle&&) noexcept = default;

SparseLUHandle::SparseLUHandle(const SparseMatrix& a) { factor(a); }

void SparseLUHandle::factor(const SparseMatrix& a) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorKind::dimension, "sparse LU: matrix is not square");
  }
  auto impl = std::make_unique<Impl>();
  impl->a = a;
  impl->a.makeCompressed();
  const int n = static_cast<int>(a.rows());
  const int* ap = impl->a.outerIndexPtr();
  const int* ai = impl->a.innerIndexPtr();
  const double* ax = impl->a.valuePtr();
  int status = umfpack_di_symbolic(n, n, ap, ai, ax, &impl->symbolic, impl->control.data(),
                                   impl->info.data());
  if (status != UMFPACK_OK) {
    throw Error(ErrorKind::convergence,
                "sparse LU: symbolic analysis failed (status " + std::to_string(status) + ")");
  }
  status = umfpack_di_numeric(ap, ai, ax, impl->symbolic, &impl->numeric, impl->control.data(),
                              impl->info.data());
  if (status == UMFPACK_WARNING_singular_matrix) {
    throw SingularMatrixError("sparse LU: matrix is singular", -1);
  }
  if (status != UMFPACK_OK) {
    throw Error(ErrorKind::convergence,
                "sparse LU: numeric factorization failed (status " + std::to_string(status) + ")");
  }
  impl_ = std::move(impl);
  ++factorizations_;
}

bool SparseLUHandle::factored() const { return impl_ != nullptr; }

Eigen::Index SparseLUHandle::size() const { return impl_ ? impl_->a.rows() : 0; }

long SparseLUHandle::factor_nonzeros() const {
  if (!impl_) return 0;
  return static_cast<long>(impl_->info[UMFPACK_LNZ] + impl_->info[UMFPACK_UNZ]);
}

namespace {

Field lu_solve(const SparseLUHandle::Impl& f, const Field& b) {
  Field x(b.size());
  std::array<double, UMFPACK_INFO> info{};
  const int status = umfpack_di_solve(UMFPACK_A, f.a.outerIndexPtr(), f.a.innerIndexPtr(),
                                      f.a.valuePtr(), x.data(), b.data(), f.numeric,
                                      f.control.data(), info.data());
  if (status != UMFPACK_OK) {
    throw Error(ErrorKind::convergence, "sparse LU: solve failed (status " + std::to_string(status) + ")");
  }
  return x;
}

}  // namespace

Field SparseLUHandle::solve(const Field& b) const {
  if (!impl_) throw Error(ErrorKind::config, "sparse LU: solve before factor");
  if (b.size() != impl_->a.rows()) {
    throw Error(ErrorKind::dimension, "sparse LU: right-hand side size mismatch");
  }
  const double bnorm = b.norm();
  Field x = lu_solve(*impl_, b);
  if (bnorm == 0.0) return x;
  Field r = b - impl_->a * x;
  double rel = r.norm() / bnorm;
  // Iterative refinement with the existing factors.
  for (int it = 0; it < 3 && rel >= 1e-10; ++it) {
    x += lu_solve(*impl_, r);
    r = b - impl_->a * x;
    rel = r.norm() / bnorm;
  }
  if (!(rel < 1e-10)) {
    std::ostringstream msg;
    msg << "sparse LU: relative residual " << rel << " above 1e-10";
    throw Error(ErrorKind::convergence, msg.str());
  }
  return x;
}

Field sparse_solve(const SparseMatrix& a, const Field& b, SparseLUHandle& reuse) {
  if (!reuse.factored()) reuse.factor(a);
  return reuse.solve(b);
}

std::vector<std::complex<double>> dense_spectrum(const DenseMatrix& a) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorKind::dimension, "dense_spectrum: matrix is not square");
  }
  if (a.rows() > kDenseSpectrumCap) {
    throw Error(ErrorKind::config, "dense_spectrum: size exceeds cap of 5000");
  }
  const auto n = static_cast<lapack_int>(a.rows());
  if (n == 0) return {};
  DenseMatrix work = a;
  std::vector<double> re(n), im(n);
  const lapack_int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, work.data(), n, re.data(),
                                        im.data(), nullptr, 1, nullptr, 1);
  if (info != 0) {
    throw Error(ErrorKind::convergence, "dense_spectrum: QR iteration did not converge (info " +
                                            std::to_string(info) + ")");
  }
  std::vector<std::complex<double>> out(n);
  for (lapack_int i = 0; i < n; ++i) out[i] = {re[i], im[i]};
  return out;
}

}  // namespace rbfloi
