#pragma once

// Dense complex-matrix spectral primitives shared by every other header.
// Storage and small arithmetic use Eigen; Hermitian eigensolves, Cholesky
// probes, SVD checks and large products go straight to LAPACK/BLAS.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ncball {

using cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Errors. Every value-carrying error exposes the offending quantity so CLI
// and test layers can report it without reparsing the message.

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionError : Error {
  using Error::Error;
};
struct DomainError : Error {
  using Error::Error;
};
struct NotHermitianError : Error {
  double defect;
  explicit NotHermitianError(double dft, const std::string& where)
      : Error(where + ": matrix is not Hermitian, max asymmetry " +
              std::to_string(dft)),
        defect(dft) {}
};
struct NotPsdError : Error {
  double min_eig;
  explicit NotPsdError(double me, const std::string& where)
      : Error(where + ": matrix is not positive semidefinite, min eigenvalue " +
              std::to_string(me)),
        min_eig(me) {}
};
struct SingularError : Error {
  double sigma_min;
  explicit SingularError(double sm, const std::string& where)
      : Error(where + ": matrix is numerically singular, sigma_min " +
              std::to_string(sm)),
        sigma_min(sm) {}
};
struct NotInBallError : Error {
  double witness;  // offending eigenvalue or radius
  explicit NotInBallError(double w, const std::string& what)
      : Error(what), witness(w) {}
};
struct ParseError : Error {
  using Error::Error;
};
struct PreconditionError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// LAPACK / BLAS bindings (LP64, column-major; Eigen's default layout).

namespace lapackdetail {
extern "C" {
void zheevd_(const char* jobz, const char* uplo, const int* n, cplx* a,
             const int* lda, double* w, cplx* work, const int* lwork,
             double* rwork, const int* lrwork, int* iwork, const int* liwork,
             int* info);
void zhegvd_(const int* itype, const char* jobz, const char* uplo,
             const int* n, cplx* a, const int* lda, cplx* b, const int* ldb,
             double* w, cplx* work, const int* lwork, double* rwork,
             const int* lrwork, int* iwork, const int* liwork, int* info);
void zpotrf_(const char* uplo, const int* n, cplx* a, const int* lda,
             int* info);
void zgesvd_(const char* jobu, const char* jobvt, const int* m, const int* n,
             cplx* a, const int* lda, double* s, cplx* u, const int* ldu,
             cplx* vt, const int* ldvt, cplx* work, const int* lwork,
             double* rwork, int* info);
void zgemm_(const char* transa, const char* transb, const int* m, const int* n,
            const int* k, const cplx* alpha, const cplx* a, const int* lda,
            const cplx* b, const int* ldb, const cplx* beta, cplx* c,
            const int* ldc);
}
}  // namespace lapackdetail

// C = op(A)*op(B); ops in {'N','C','T'}. Dispatches to BLAS above the size
// where Eigen's built-in product stops being competitive.
inline CMat mul(const CMat& A, const CMat& B, char opA = 'N', char opB = 'N') {
  const auto rows = [](const CMat& X, char op) {
    return op == 'N' ? X.rows() : X.cols();
  };
  const auto cols = [](const CMat& X, char op) {
    return op == 'N' ? X.cols() : X.rows();
  };
  const int m = static_cast<int>(rows(A, opA));
  const int k = static_cast<int>(cols(A, opA));
  const int k2 = static_cast<int>(rows(B, opB));
  const int n = static_cast<int>(cols(B, opB));
  if (k != k2) throw DimensionError("mul: inner dimensions disagree");
  if (m < 48 && n < 48) {
    const auto shape = [](const CMat& X, char op) -> CMat {
      if (op == 'N') return X;
      if (op == 'C') return X.adjoint();
      return X.transpose();
    };
    return shape(A, opA) * shape(B, opB);
  }
  CMat C(m, n);
  const cplx one(1.0, 0.0), zero(0.0, 0.0);
  const int lda = static_cast<int>(A.rows());
  const int ldb = static_cast<int>(B.rows());
  lapackdetail::zgemm_(&opA, &opB, &m, &n, &k, &one, A.data(), &lda, B.data(),
                       &ldb, &zero, C.data(), &m);
  return C;
}

inline double max_abs(const CMat& A) {
  return A.size() == 0 ? 0.0 : A.cwiseAbs().maxCoeff();
}

inline double hermitian_defect(const CMat& A) {
  return max_abs(A - A.adjoint());
}

inline void require_square(const CMat& A, const std::string& where) {
  if (A.rows() != A.cols())
    throw DimensionError(where + ": matrix must be square");
  if (A.size() == 0) throw DimensionError(where + ": matrix is empty");
}

// Asymmetry beyond 1e-8 * max|A| is an assembly bug upstream, not noise.
inline void require_hermitian(const CMat& A, const std::string& where) {
  require_square(A, where);
  const double defect = hermitian_defect(A);
  if (defect > 1e-8 * max_abs(A)) throw NotHermitianError(defect, where);
}

struct EigH {
  RVec w;   // ascending eigenvalues
  CMat V;   // columns are eigenvectors; empty when values_only
};

// Hermitian eigendecomposition of (A+A*)/2 via zheevd.
inline EigH eig_hermitian(const CMat& A, bool vectors,
                          const std::string& where = "eig_hermitian") {
  require_hermitian(A, where);
  const int n = static_cast<int>(A.rows());
  EigH out;
  out.w.resize(n);
  CMat work_mat = 0.5 * (A + A.adjoint());
  const char jobz = vectors ? 'V' : 'N';
  const char uplo = 'L';
  int info = 0;
  int lwork = -1, lrwork = -1, liwork = -1;
  cplx wkopt;
  double rwkopt;
  int iwkopt;
  lapackdetail::zheevd_(&jobz, &uplo, &n, work_mat.data(), &n, out.w.data(),
                        &wkopt, &lwork, &rwkopt, &lrwork, &iwkopt, &liwork,
                        &info);
  lwork = static_cast<int>(wkopt.real());
  lrwork = static_cast<int>(rwkopt);
  liwork = iwkopt;
  std::vector<cplx> work(static_cast<size_t>(lwork));
  std::vector<double> rwork(static_cast<size_t>(lrwork));
  std::vector<int> iwork(static_cast<size_t>(liwork));
  lapackdetail::zheevd_(&jobz, &uplo, &n, work_mat.data(), &n, out.w.data(),
                        work.data(), &lwork, rwork.data(), &lrwork,
                        iwork.data(), &liwork, &info);
  if (info != 0)
    throw Error(where + ": zheevd failed with info " + std::to_string(info));
  if (vectors) out.V = std::move(work_mat);
  return out;
}

inline double min_eig_hermitian(const CMat& A) {
  return eig_hermitian(A, false, "min_eig_hermitian").w(0);
}

inline std::pair<double, double> minmax_eig_hermitian(const CMat& A) {
  const EigH e = eig_hermitian(A, false, "minmax_eig_hermitian");
  return {e.w(0), e.w(e.w.size() - 1)};
}

// Largest singular value of a rectangular matrix through the smaller Gram
// matrix. Fine for norms; tiny singular values go through singular_values().
inline double spectral_norm(const CMat& A) {
  if (A.size() == 0) throw DimensionError("spectral_norm: matrix is empty");
  const CMat G = (A.rows() <= A.cols()) ? mul(A, A, 'N', 'C')
                                        : mul(A, A, 'C', 'N');
  const EigH e = eig_hermitian(G, false, "spectral_norm");
  return std::sqrt(std::max(0.0, e.w(e.w.size() - 1)));
}

// Full singular value spectrum (descending), used for singularity checks.
inline RVec singular_values(const CMat& A) {
  if (A.size() == 0) throw DimensionError("singular_values: matrix is empty");
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  const int mn = std::min(m, n);
  CMat work_mat = A;
  RVec s(mn);
  const char jobn = 'N';
  int info = 0, lwork = -1;
  cplx wkopt;
  std::vector<double> rwork(static_cast<size_t>(5 * mn));
  lapackdetail::zgesvd_(&jobn, &jobn, &m, &n, work_mat.data(), &m, s.data(),
                        nullptr, &m, nullptr, &n, &wkopt, &lwork, rwork.data(),
                        &info);
  lwork = static_cast<int>(wkopt.real());
  std::vector<cplx> work(static_cast<size_t>(lwork));
  lapackdetail::zgesvd_(&jobn, &jobn, &m, &n, work_mat.data(), &m, s.data(),
                        nullptr, &m, nullptr, &n, work.data(), &lwork,
                        rwork.data(), &info);
  if (info != 0)
    throw Error("singular_values: zgesvd failed with info " +
                std::to_string(info));
  return s;
}

// Single PSD tolerance used by every positivity verdict in the repo.
inline double tau_psd(double scale) { return 1e-9 * (1.0 + scale); }

// Hermitian PSD square root. Eigenvalues in [-tau_psd, 0) clamp to zero;
// anything lower is an error carrying the offending eigenvalue.
inline CMat psd_sqrt(const CMat& A) {
  EigH e = eig_hermitian(A, true, "psd_sqrt");
  const int n = static_cast<int>(e.w.size());
  const double scale =
      std::max(std::abs(e.w(0)), std::abs(e.w(n - 1)));
  const double tau = tau_psd(scale);
  if (e.w(0) < -tau) throw NotPsdError(e.w(0), "psd_sqrt");
  RVec roots(n);
  for (int i = 0; i < n; ++i) roots(i) = std::sqrt(std::max(0.0, e.w(i)));
  const CMat VD = e.V * roots.asDiagonal();
  return mul(VD, e.V, 'N', 'C');
}

// Checks sigma_min >= 1e-12 * sigma_max before inverting.
inline CMat inverse(const CMat& A) {
  require_square(A, "inverse");
  const RVec s = singular_values(A);
  const double smax = s(0), smin = s(s.size() - 1);
  if (smin < 1e-12 * smax || smax == 0.0)
    throw SingularError(smin, "inverse");
  return A.partialPivLu().inverse();
}

// True iff A + tau*I admits a Cholesky factorization (A Hermitian).
// zpotrf walks leading minors in order, so rejection exits at the first
// non-positive leading block: cheap on nested kernel sections.
inline bool psd_probe(const CMat& A, double tau) {
  const int n = static_cast<int>(A.rows());
  CMat work_mat = 0.5 * (A + A.adjoint());
  work_mat.diagonal().array() += tau;
  const char uplo = 'L';
  int info = 0;
  lapackdetail::zpotrf_(&uplo, &n, work_mat.data(), &n, &info);
  return info == 0;
}

// Largest/smallest eigenvalues of the pencil A x = lambda B x, A Hermitian,
// B Hermitian positive definite. Throws NotPsdError when B fails its
// Cholesky step inside zhegvd.
inline RVec eig_pencil_hermitian(const CMat& A, const CMat& B,
                                 const std::string& where = "eig_pencil") {
  require_hermitian(A, where);
  require_hermitian(B, where);
  if (A.rows() != B.rows())
    throw DimensionError(where + ": pencil dimensions disagree");
  const int n = static_cast<int>(A.rows());
  CMat a = 0.5 * (A + A.adjoint());
  CMat b = 0.5 * (B + B.adjoint());
  RVec w(n);
  const int itype = 1;
  const char jobz = 'N', uplo = 'L';
  int info = 0, lwork = -1, lrwork = -1, liwork = -1;
  cplx wkopt;
  double rwkopt;
  int iwkopt;
  lapackdetail::zhegvd_(&itype, &jobz, &uplo, &n, a.data(), &n, b.data(), &n,
                        w.data(), &wkopt, &lwork, &rwkopt, &lrwork, &iwkopt,
                        &liwork, &info);
  lwork = static_cast<int>(wkopt.real());
  lrwork = static_cast<int>(rwkopt);
  liwork = iwkopt;
  std::vector<cplx> work(static_cast<size_t>(lwork));
  std::vector<double> rwork(static_cast<size_t>(lrwork));
  std::vector<int> iwork(static_cast<size_t>(liwork));
  lapackdetail::zhegvd_(&itype, &jobz, &uplo, &n, a.data(), &n, b.data(), &n,
                        w.data(), work.data(), &lwork, rwork.data(), &lrwork,
                        iwork.data(), &liwork, &info);
  if (info > n)
    throw NotPsdError(0.0, where + ": right pencil factor is not positive definite");
  if (info != 0)
    throw Error(where + ": zhegvd failed with info " + std::to_string(info));
  return w;
}

// ---------------------------------------------------------------------------
// Deterministic RNG: fixed engine, explicit bit-to-double mapping and
// Box-Muller transform so streams are identical across platforms and stdlibs.

struct Rng {
  std::mt19937_64 eng;
  bool has_cache = false;
  double cache = 0.0;

  explicit Rng(std::uint64_t seed) : eng(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
  }
  double normal() {
    if (has_cache) {
      has_cache = false;
      return cache;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cache = radius * std::sin(angle);
    has_cache = true;
    return radius * std::cos(angle);
  }
  cplx cnormal() { return cplx(normal(), normal()) / std::sqrt(2.0); }
};

// Complex Ginibre matrix scaled so the expected spectral norm is O(1).
inline CMat ginibre(Rng& rng, int d) {
  CMat G(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) G(i, j) = rng.cnormal() / std::sqrt(double(d));
  return G;
}

}  // namespace ncball
