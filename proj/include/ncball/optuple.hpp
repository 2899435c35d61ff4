#pragma once

// Operator tuples T = (T_1,...,T_n) of complex d x d matrices and the
// level-m operators built from them: word evaluations T_alpha, the
// reconstruction operator R_T, the defect Delta^2_{rho,T}, the pluriharmonic
// kernel P_rho(rT, R) and multi-Toeplitz finite sections K_{rho,T}.
//
// All level-m operators live on P_m (x) C^d with word-major indexing
// (row = word_index * d + component), so the level-m matrix is exactly the
// leading principal submatrix of the level-m' matrix for m <= m'.

#include "ncball/fock.hpp"
#include "ncball/matrix.hpp"

#include <algorithm>

namespace ncball {

struct OperatorTuple {
  int n = 0;
  int d = 0;
  std::vector<CMat> mats;
};

inline OperatorTuple make_tuple(std::vector<CMat> mats) {
  if (mats.empty()) throw DomainError("make_tuple: need at least one matrix");
  OperatorTuple t;
  t.n = static_cast<int>(mats.size());
  t.d = static_cast<int>(mats[0].rows());
  for (const CMat& M : mats) {
    if (M.rows() != M.cols() || M.rows() != t.d)
      throw DimensionError("make_tuple: matrices must be square of equal size");
  }
  if (t.d < 1) throw DimensionError("make_tuple: matrices are empty");
  t.mats = std::move(mats);
  return t;
}

inline OperatorTuple scale_tuple(const OperatorTuple& t, cplx s) {
  OperatorTuple out = t;
  for (CMat& M : out.mats) M *= s;
  return out;
}

inline OperatorTuple zero_pad(const OperatorTuple& t, int extra) {
  if (extra < 0) throw DomainError("zero_pad: negative count");
  OperatorTuple out = t;
  for (int k = 0; k < extra; ++k) out.mats.push_back(CMat::Zero(t.d, t.d));
  out.n += extra;
  return out;
}

// Bytewise deterministic order on tuples, used to canonicalize pair-symmetric
// computations (identical float path for (A,B) and (B,A)).
inline int tuple_compare(const OperatorTuple& a, const OperatorTuple& b) {
  if (a.n != b.n) return a.n < b.n ? -1 : 1;
  if (a.d != b.d) return a.d < b.d ? -1 : 1;
  for (int i = 0; i < a.n; ++i)
    for (int c = 0; c < a.d; ++c)
      for (int r = 0; r < a.d; ++r) {
        const cplx x = a.mats[i](r, c), y = b.mats[i](r, c);
        if (x.real() != y.real()) return x.real() < y.real() ? -1 : 1;
        if (x.imag() != y.imag()) return x.imag() < y.imag() ? -1 : 1;
      }
  return 0;
}

inline CMat eval_word(const OperatorTuple& t, const Word& w) {
  CMat out = CMat::Identity(t.d, t.d);
  for (int letter : w) {
    if (letter < 1 || letter > t.n)
      throw DomainError("eval_word: letter out of range");
    out = mul(out, t.mats[static_cast<size_t>(letter - 1)]);
  }
  return out;
}

inline CMat row_gram(const OperatorTuple& t) {
  CMat G = CMat::Zero(t.d, t.d);
  for (const CMat& M : t.mats) G += mul(M, M, 'N', 'C');
  return G;
}

inline double row_norm(const OperatorTuple& t) {
  const auto [lo, hi] = minmax_eig_hermitian(row_gram(t));
  (void)lo;
  return std::sqrt(std::max(0.0, hi));
}

// sqrt of the spectral radius of M_T := sum_i T_i (x) conj(T_i), the
// linearization of the completely positive map X -> sum T_i X T_i^*.
inline double joint_spectral_radius(const OperatorTuple& t) {
  const int d = t.d;
  CMat M = CMat::Zero(static_cast<std::int64_t>(d) * d,
                      static_cast<std::int64_t>(d) * d);
  for (const CMat& Ti : t.mats) {
    const CMat Tc = Ti.conjugate();
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) M.block(i * d, j * d, d, d) += Ti(i, j) * Tc;
  }
  Eigen::ComplexEigenSolver<CMat> es(M, false);
  if (es.info() != Eigen::Success)
    throw Error("joint_spectral_radius: eigensolver failed");
  const double rad = es.eigenvalues().cwiseAbs().maxCoeff();
  return std::sqrt(std::max(0.0, rad));
}

// One application of the CP map Phi(X) = sum T_i X T_i^*; Phi^k(I) gives the
// limit-formula cross-check and the tail coefficients a_k.
inline CMat cp_map(const OperatorTuple& t, const CMat& X) {
  CMat out = CMat::Zero(t.d, t.d);
  for (const CMat& Ti : t.mats) out += mul(mul(Ti, X), Ti, 'N', 'C');
  return out;
}

struct LevelOperator {
  int n = 0;
  int d = 0;
  int m = 0;
  std::int64_t fdim = 1;  // dim of P_m; matrix is (fdim*d) x (fdim*d)
  CMat mat;
};

struct ToeplitzSection {
  int n = 0;
  int d = 0;
  int m = 0;
  std::int64_t fdim = 1;
  CMat mat;
};

// T_alpha for every word |alpha| <= m, indexed like the truncation's word
// list; built by the grading recursion T_{alpha g_i} = T_alpha * T_i.
struct WordProducts {
  FockTruncation trunc;
  std::vector<CMat> prod;
};

inline WordProducts word_products(const OperatorTuple& t, int m) {
  WordProducts wp;
  wp.trunc = enumerate_words(t.n, m);
  wp.prod.resize(static_cast<size_t>(wp.trunc.dim));
  wp.prod[0] = CMat::Identity(t.d, t.d);
  for (std::int64_t idx = 1; idx < wp.trunc.dim; ++idx) {
    const Word& w = wp.trunc.words[static_cast<size_t>(idx)];
    Word parent(w.begin(), w.end() - 1);
    const int last = w.back();
    wp.prod[static_cast<size_t>(idx)] =
        mul(wp.prod[static_cast<size_t>(wp.trunc.index_of(parent))],
            t.mats[static_cast<size_t>(last - 1)]);
  }
  return wp;
}

// R_T := sum_i T_i^* (x) R_i: block (beta g_i, beta) = T_i^*; strictly
// length-raising, hence nilpotent of order m+1.
inline LevelOperator reconstruction(const OperatorTuple& t, int m) {
  const FockTruncation trunc = enumerate_words(t.n, m);
  LevelOperator out{t.n, t.d, m, trunc.dim, {}};
  out.mat = CMat::Zero(trunc.dim * t.d, trunc.dim * t.d);
  std::vector<CMat> adj(static_cast<size_t>(t.n));
  for (int i = 0; i < t.n; ++i) adj[static_cast<size_t>(i)] = t.mats[static_cast<size_t>(i)].adjoint();
  for (std::int64_t col = 0; col < trunc.dim; ++col) {
    const Word& beta = trunc.words[static_cast<size_t>(col)];
    if (static_cast<int>(beta.size()) >= m) continue;
    for (int i = 1; i <= t.n; ++i) {
      const std::int64_t row = trunc.index_of(word_concat(beta, {i}));
      out.mat.block(row * t.d, col * t.d, t.d, t.d) = adj[static_cast<size_t>(i - 1)];
    }
  }
  return out;
}

// (I - R)^{-1} = sum_{k=0}^{m} R^k for a level operator R nilpotent of
// order m+1, evaluated by Horner's scheme.
inline CMat nilpotent_resolvent(const LevelOperator& R) {
  const std::int64_t N = R.mat.rows();
  CMat out = CMat::Identity(N, N);
  for (int k = 0; k < R.m; ++k) {
    out = mul(R.mat, out);
    out.diagonal().array() += cplx(1.0, 0.0);
  }
  return out;
}

namespace kerneldetail {

// Writes sum_{1<=|sigma|<=m} r^{|sigma|} (T_sigma (x) R*_{sigma~} + adjoint)
// into M: block (beta, beta sigma) += r^k T_sigma, block (beta sigma, beta)
// += r^k T_sigma^*. Fixed word-order traversal keeps runs bit-identical.
inline void add_band_terms(CMat& M, const WordProducts& wp, int d, double r,
                           double coeff) {
  const FockTruncation& tr = wp.trunc;
  for (std::int64_t sidx = 1; sidx < tr.dim; ++sidx) {
    const Word& sigma = tr.words[static_cast<size_t>(sidx)];
    const int k = static_cast<int>(sigma.size());
    const double c = coeff * std::pow(r, k);
    if (c == 0.0) continue;
    const CMat Ts = c * wp.prod[static_cast<size_t>(sidx)];
    const CMat TsAdj = Ts.adjoint();
    const std::int64_t last_beta = tr.offsets[tr.m - k + 1];
    for (std::int64_t b = 0; b < last_beta; ++b) {
      const std::int64_t tgt =
          tr.index_of(word_concat(tr.words[static_cast<size_t>(b)], sigma));
      M.block(b * d, tgt * d, d, d) += Ts;
      M.block(tgt * d, b * d, d, d) += TsAdj;
    }
  }
}

}  // namespace kerneldetail

// P_rho(rT, R^(m)) = rho I + sum_{1<=|alpha|<=m} r^{|alpha|}
// (T_alpha (x) R*_{alpha~} + adjoint); equals the compression of the
// infinite-level kernel because the band terms are length-graded.
// r = 1 is always defined here (finite sum); it matches a limit object only
// when joint_spectral_radius(T) < 1.
inline LevelOperator kernel_P(const OperatorTuple& t, double rho, int m,
                              double r) {
  if (rho <= 0.0) throw DomainError("kernel_P: rho must be positive");
  if (r < 0.0 || r > 1.0) throw DomainError("kernel_P: r must be in [0,1]");
  const WordProducts wp = word_products(t, m);
  LevelOperator out{t.n, t.d, m, wp.trunc.dim, {}};
  const std::int64_t N = wp.trunc.dim * t.d;
  out.mat = CMat::Zero(N, N);
  out.mat.diagonal().array() += cplx(rho, 0.0);
  kerneldetail::add_band_terms(out.mat, wp, t.d, r, 1.0);
  return out;
}

// Same band structure with blocks scaled by 1/rho and unit diagonal: the
// multi-Toeplitz section [K_{rho,T}(alpha, beta)]_{|alpha|,|beta|<=m}.
inline ToeplitzSection toeplitz_section(const OperatorTuple& t, double rho,
                                        int m) {
  if (rho <= 0.0) throw DomainError("toeplitz_section: rho must be positive");
  const WordProducts wp = word_products(t, m);
  ToeplitzSection out{t.n, t.d, m, wp.trunc.dim, {}};
  const std::int64_t N = wp.trunc.dim * t.d;
  out.mat = CMat::Zero(N, N);
  out.mat.diagonal().array() += cplx(1.0, 0.0);
  kerneldetail::add_band_terms(out.mat, wp, t.d, 1.0, 1.0 / rho);
  return out;
}

namespace kerneldetail {

// rho I + (1-rho)(R + R^*) + (rho-2) (sum T_i T_i^*) (x) Q, where Q projects
// onto words of length <= qlevel.
inline LevelOperator defect_core(const OperatorTuple& t, double rho, int m,
                                 int qlevel) {
  if (rho <= 0.0) throw DomainError("defect_delta2: rho must be positive");
  const LevelOperator R = reconstruction(t, m);
  LevelOperator out{t.n, t.d, m, R.fdim, {}};
  out.mat = (1.0 - rho) * (R.mat + R.mat.adjoint());
  out.mat.diagonal().array() += cplx(rho, 0.0);
  const CMat G = (rho - 2.0) * row_gram(t);
  const FockTruncation trunc = enumerate_words(t.n, m);
  const std::int64_t upto =
      (qlevel >= m) ? trunc.dim : trunc.offsets[qlevel + 1];
  for (std::int64_t b = 0; b < upto; ++b)
    out.mat.block(b * t.d, b * t.d, t.d, t.d) += G;
  return out;
}

}  // namespace kerneldetail

// Delta^2_{rho,T} compressed to level m: the quadratic term uses the exact
// identity R_i^* R_j = delta_ij I of the full space, giving
// (sum T_i T_i^*) (x) I_{P_m}.
inline LevelOperator defect_delta2(const OperatorTuple& t, double rho, int m) {
  return kerneldetail::defect_core(t, rho, m, m);
}

// Level-m defect with the graded quadratic term (sum T_i T_i^*) (x) Q_{m-1},
// which is R^(m)* R^(m) verbatim. Satisfies the exact level-m factorization
// (I - R^*) kernel_P (I - R) = defect, hence kernel_P = C^* C with
// C = psd_sqrt(defect) (I - R)^{-1} at the same level.
inline LevelOperator defect_delta2_graded(const OperatorTuple& t, double rho,
                                          int m) {
  return kerneldetail::defect_core(t, rho, m, m - 1);
}

}  // namespace ncball
