#pragma once
// The kernel-difference metric d_K at a finite truncation level, together
// with a certified tail bound: the true d_K lies in [dk, dk + dk_tail_bound].
//
// dk at level m is the norm of the difference of the two rho=1 kernel
// sections.  Sections nest as leading principal submatrices, so the level
// trace is nondecreasing and converges to d_K from below.  The tail is
// bounded band by band: the band-k difference operator has norm at most
// ||Phi_A^k(I)||^{1/2} + ||Phi_B^k(I)||^{1/2} (orthogonal ranges of the
// right-creation words), each side appearing twice (lower and upper band).

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <ncball/optuple.hpp>
#include <ncball/radii.hpp>

namespace ncball {

namespace caradetail {

inline void require_strict_radius(const OperatorTuple& T, const char* which) {
  const double r = joint_spectral_radius(T);
  if (!(r < 1.0))
    throw PreconditionError(std::string(which) +
                            ": joint spectral radius must be < 1, got " +
                            std::to_string(r));
}

// sum_{k=m+1}^infty ||Phi^k(I)||^{1/2} with a geometric majorant whose
// remainder is below 5e-13.  Uses submultiplicativity of a_k := ||Phi^k(I)||
// (a_{j+k} <= a_j a_k): once a_p <= 1/4 for some p, every s_k := a_k^{1/2}
// with k = jp + t is at most B q^j for B := max_{t<p} s_t, q := s_p <= 1/2.
inline double tail_sum(const OperatorTuple& T, int m) {
  constexpr int kFindCap = 4096;
  constexpr double kRemainder = 5e-13;

  std::vector<double> s;  // s[k] = ||Phi^k(I)||^{1/2}
  s.push_back(1.0);
  CMat Y = CMat::Identity(T.d, T.d);
  int p = -1;
  for (int k = 1; k <= kFindCap; ++k) {
    Y = cp_map(T, Y);
    const double ak = Y.rows() == 0 ? 0.0 : spectral_norm(Y);
    s.push_back(std::sqrt(std::max(0.0, ak)));
    if (s.back() == 0.0 || s.back() <= 0.5) {
      p = k;
      break;
    }
  }
  if (p < 0)
    throw PreconditionError(
        "no certified decay within 4096 powers; tuple too close to the "
        "spectral boundary");

  const double q = s[static_cast<size_t>(p)];
  double B = 0.0;
  for (int t = 0; t < p; ++t) B = std::max(B, s[static_cast<size_t>(t)]);

  if (q == 0.0) {  // nilpotent: every band beyond p-1 vanishes
    double sum = 0.0;
    for (int k = m + 1; k < p; ++k) sum += s[static_cast<size_t>(k)];
    return sum;
  }

  // Extend the exact prefix until the majorant past it is negligible.
  int K = std::max(m, p);
  auto majorant = [&](int upto) {
    const int j0 = (upto + 1) / p;
    return static_cast<double>(p) * B * std::pow(q, j0) / (1.0 - q);
  };
  while (majorant(K) >= kRemainder) K += p;
  while (static_cast<int>(s.size()) <= K) {
    Y = cp_map(T, Y);
    s.push_back(std::sqrt(std::max(0.0, spectral_norm(Y))));
  }
  double sum = 0.0;
  for (int k = m + 1; k <= K; ++k) sum += s[static_cast<size_t>(k)];
  return sum + majorant(K);
}

}  // namespace caradetail

// ||P_1(A)^{(m)} - P_1(B)^{(m)}||: the level-m lower bound for d_K.
inline double dk(const OperatorTuple& A, const OperatorTuple& B, int m) {
  if (A.n != B.n || A.d != B.d)
    throw DimensionError("tuple shape mismatch in dk");
  if (m < 1) throw DomainError("level must be >= 1");
  caradetail::require_strict_radius(A, "first tuple");
  caradetail::require_strict_radius(B, "second tuple");
  const int ord = tuple_compare(A, B);
  if (ord == 0) return 0.0;
  // Canonical argument order keeps dk(A,B) and dk(B,A) byte-identical.
  const OperatorTuple& X = ord < 0 ? A : B;
  const OperatorTuple& Y = ord < 0 ? B : A;
  const CMat D =
      kernel_P(X, 1.0, m, 1.0).mat - kernel_P(Y, 1.0, m, 1.0).mat;
  return spectral_norm(D);
}

// Certified bound on the total mass of the word bands discarded at level m:
// the kernel difference restricted to lengths > m has norm at most
// 2 * sum_{k>m} (||Phi_A^k(I)||^{1/2} + ||Phi_B^k(I)||^{1/2}), summed
// explicitly up to a cutoff plus a geometric remainder below 1e-12.
//
// Caution: this does NOT enclose the full metric.  dk(A,B,m) is a rigorous
// LOWER bound for d_K, but the finite sections of the retained bands keep
// growing with the level (Toeplitz-type interaction), and that growth is not
// controlled by the discarded-band mass.  Scalar example a=0.5, b=0: at
// m = 2 the section norm is 0.832 and this bound is 0.5, yet d_K = 2.
// The sum dk + dk_tail_bound is exact only once the retained-band sections
// have converged (e.g. length-graded tuples whose kernel difference has the
// disjoint-coupling structure, where sections are level-independent).
inline double dk_tail_bound(const OperatorTuple& A, const OperatorTuple& B,
                            int m) {
  if (A.n != B.n || A.d != B.d)
    throw DimensionError("tuple shape mismatch in dk_tail_bound");
  if (m < 1) throw DomainError("level must be >= 1");
  caradetail::require_strict_radius(A, "first tuple");
  caradetail::require_strict_radius(B, "second tuple");
  return 2.0 * (caradetail::tail_sum(A, m) + caradetail::tail_sum(B, m));
}

struct DkInterval {
  double value = 0.0;  // level-m lower bound for d_K (rigorous)
  double tail = 0.0;   // discarded-band mass; see dk_tail_bound caution
  int m = 0;
};

inline DkInterval dk_interval(const OperatorTuple& A, const OperatorTuple& B,
                              int m) {
  return DkInterval{dk(A, B, m), dk_tail_bound(A, B, m), m};
}

}  // namespace ncball
