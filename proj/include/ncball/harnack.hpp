#pragma once
// Domination certificates between kernel sections, the Lambda constant of a
// pair of tuples, and the hyperbolic metric delta = ln Lambda, all evaluated
// at a finite truncation level.
//
// Lambda is computed from the generalized eigenvalues of the Hermitian pencil
// (P_A, P_B) of the two kernel sections.  The kernel factors exactly as
// P_X = (I - R_X*)^{-1} D_X (I - R_X)^{-1} with D_X the graded defect, i.e.
// P_X = C_X* C_X for C_X = sqrt(D_X) (I - R_X)^{-1}, so
//   ||C_A C_B^{-1}||^2 = lambda_max(P_A, P_B),
//   ||C_B C_A^{-1}||^2 = 1 / lambda_min(P_A, P_B),
// and no factor is ever constructed.  This also makes the exp(delta)
// domination certificate exact at the level where delta was computed: the
// level-k sections are leading principal submatrices of the level-m ones.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <ncball/optuple.hpp>

namespace ncball {

enum class DominationVerdict { dominated, refuted, inconclusive };

inline const char* to_string(DominationVerdict v) {
  switch (v) {
    case DominationVerdict::dominated:
      return "dominated";
    case DominationVerdict::refuted:
      return "refuted";
    default:
      return "inconclusive";
  }
}

struct DominationCertificate {
  double rho = 0.0;
  double c = 1.0;
  std::vector<int> levels;
  std::vector<double> min_eigs;  // of c^2 K_B^(k) - K_A^(k), per level k
  DominationVerdict verdict = DominationVerdict::inconclusive;
  int refuted_level = -1;
  double tau_coeff = 0.0;
  // "dominated" means every finite section passed (a necessary condition for
  // the full kernel inequality); "refuted" is conclusive.
};

namespace harnackdetail {

inline void require_same_shape(const OperatorTuple& A, const OperatorTuple& B) {
  if (A.n != B.n || A.d != B.d)
    throw DimensionError("tuple shape mismatch: (" + std::to_string(A.n) +
                         "," + std::to_string(A.d) + ") vs (" +
                         std::to_string(B.n) + "," + std::to_string(B.d) +
                         ")");
}

}  // namespace harnackdetail

// PSD check of c^2 K_B^(k) - K_A^(k) for k = 1..m_max, where K_X^(k) is the
// level-k Toeplitz section (unit diagonal, bands scaled 1/rho).  Sections
// nest as leading principal submatrices, so one top-level assembly serves
// every level.
inline DominationCertificate dominates(const OperatorTuple& A,
                                       const OperatorTuple& B, double rho,
                                       double c, int m_max) {
  harnackdetail::require_same_shape(A, B);
  if (!(rho > 0.0)) throw DomainError("rho must be positive");
  if (!(c >= 1.0)) throw DomainError("c must be >= 1");
  if (m_max < 1) throw DomainError("level must be >= 1");

  const CMat KA = toeplitz_section(A, rho, m_max).mat;
  const CMat KB = toeplitz_section(B, rho, m_max).mat;
  const CMat D = (c * c) * KB - KA;

  DominationCertificate cert;
  cert.rho = rho;
  cert.c = c;
  cert.tau_coeff = tau_psd(max_abs(KA) + c * c * max_abs(KB));

  const FockTruncation trunc = enumerate_words(A.n, m_max);
  for (int k = 1; k <= m_max; ++k) {
    const std::int64_t nk = trunc.offsets[static_cast<size_t>(k + 1)] *
                            static_cast<std::int64_t>(A.d);
    const CMat Dk = D.topLeftCorner(nk, nk);
    const double w = min_eig_hermitian(Dk);
    cert.levels.push_back(k);
    cert.min_eigs.push_back(w);
    if (w < -cert.tau_coeff) {
      cert.verdict = DominationVerdict::refuted;
      cert.refuted_level = k;
      return cert;
    }
  }
  cert.verdict = DominationVerdict::dominated;
  return cert;
}

// Lambda(A,B) = max{||C_A C_B^{-1}||, ||C_B C_A^{-1}||} at level m, via the
// kernel pencil.  Both tuples must be strictly inside the rho-ball at this
// level: a kernel section that is not PSD raises NotInBallError.
inline double lambda(const OperatorTuple& A, const OperatorTuple& B,
                     double rho, int m) {
  harnackdetail::require_same_shape(A, B);
  if (!(rho > 0.0)) throw DomainError("rho must be positive");
  if (m < 1) throw DomainError("level must be >= 1");
  const int ord = tuple_compare(A, B);
  if (ord == 0) return 1.0;
  // Canonical argument order: Lambda is symmetric, and evaluating both call
  // orders through the identical arithmetic keeps them byte-equal.
  const OperatorTuple& X = ord < 0 ? A : B;
  const OperatorTuple& Y = ord < 0 ? B : A;

  const CMat PX = kernel_P(X, rho, m, 1.0).mat;
  const CMat PY = kernel_P(Y, rho, m, 1.0).mat;
  const double tauX = tau_psd(max_abs(PX));
  const double tauY = tau_psd(max_abs(PY));
  if (!psd_probe(PX, tauX))
    throw NotInBallError(min_eig_hermitian(PX),
                         "first tuple is not strictly inside the ball");
  if (!psd_probe(PY, tauY))
    throw NotInBallError(min_eig_hermitian(PY),
                         "second tuple is not strictly inside the ball");

  RVec ev;
  try {
    ev = eig_pencil_hermitian(PX, PY);
  } catch (const NotPsdError&) {
    throw NotInBallError(min_eig_hermitian(PY),
                         "kernel section is numerically singular");
  }
  const double lo = ev.minCoeff();
  const double hi = ev.maxCoeff();
  if (!(lo > 0.0))
    throw NotInBallError(lo, "kernel pencil has a nonpositive eigenvalue");
  return std::max(1.0, std::sqrt(std::max(hi, 1.0 / lo)));
}

// delta(A,B) = ln Lambda(A,B); zero exactly on identical arguments.
inline double delta(const OperatorTuple& A, const OperatorTuple& B, double rho,
                    int m) {
  return std::log(lambda(A, B, rho, m));
}

struct DeltaPoint {
  double rho = 0.0;
  double value = 0.0;
  bool ok = false;
  std::string error;
};

// delta over a rho grid; per-rho failures are collected, not fatal.
inline std::vector<DeltaPoint> delta_rho_curve(const OperatorTuple& A,
                                               const OperatorTuple& B,
                                               const std::vector<double>& rhos,
                                               int m) {
  std::vector<DeltaPoint> out;
  out.reserve(rhos.size());
  for (double rho : rhos) {
    DeltaPoint p;
    p.rho = rho;
    try {
      p.value = delta(A, B, rho, m);
      p.ok = true;
    } catch (const Error& e) {
      p.error = e.what();
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace ncball
