#pragma once

// C_rho membership certificates, the operator radius omega_rho by
// safeguarded bisection, and the minimal class parameter rho_min.

#include "ncball/optuple.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <string>

namespace ncball {

enum class Verdict { member, rejected, inconclusive };

enum class Criterion { section, kernel_grid };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::member: return "member";
    case Verdict::rejected: return "rejected";
    default: return "inconclusive";
  }
}

inline const char* to_string(Criterion c) {
  return c == Criterion::section ? "toeplitz-section" : "kernel-grid";
}

// Finite-section positivity record. Rejection is conclusive; membership is a
// necessary-conditions verdict at finite m_max (sound as m_max -> infinity).
struct PsdCertificate {
  Criterion criterion = Criterion::section;
  std::vector<int> levels;
  std::vector<double> min_eigs;   // one per checked level (grid-min for kernel_grid)
  Verdict verdict = Verdict::inconclusive;
  int rejected_level = -1;        // -1 unless a section level failed
  double tau_coeff = 1e-9;        // tau = tau_coeff * (1 + scale)
  double jsr = 0.0;
  std::string note;
};

namespace radiidetail {

inline const double kKernelGridR[10] = {0.1, 0.2, 0.3, 0.4,  0.5,
                                        0.6, 0.7, 0.8, 0.9, 0.99};

// Reusable assembler for sections of the scaled tuple T/t at fixed rho:
// S(t) = I + (1/rho) sum_sigma t^{-|sigma|} (T_sigma band + adjoint).
// Word products are built once; each probe is one assembly plus one
// shifted Cholesky with LAPACK's leading-minor early exit.
struct SectionProber {
  WordProducts wp;
  int d;
  CMat buf;
  std::vector<double> frob2;  // ||T_sigma||_F^2 per word index

  SectionProber(const OperatorTuple& t, int m) : wp(word_products(t, m)), d(t.d) {
    const std::int64_t N = wp.trunc.dim * d;
    buf = CMat::Zero(N, N);
    frob2.resize(static_cast<size_t>(wp.trunc.dim), 0.0);
    for (std::int64_t i = 1; i < wp.trunc.dim; ++i)
      frob2[static_cast<size_t>(i)] = wp.prod[static_cast<size_t>(i)].squaredNorm();
  }

  // Frobenius norm overestimate accumulated alongside assembly; used only to
  // scale the PSD shift tau.
  double assemble(double t, double rho) {
    const FockTruncation& tr = wp.trunc;
    buf.setZero();
    buf.diagonal().array() += cplx(1.0, 0.0);
    double f2 = static_cast<double>(buf.rows());
    for (std::int64_t sidx = 1; sidx < tr.dim; ++sidx) {
      const Word& sigma = tr.words[static_cast<size_t>(sidx)];
      const int k = static_cast<int>(sigma.size());
      const double c = std::pow(t, -k) / rho;
      const CMat Ts = c * wp.prod[static_cast<size_t>(sidx)];
      const CMat TsAdj = Ts.adjoint();
      const std::int64_t last_beta = tr.offsets[tr.m - k + 1];
      f2 += 2.0 * c * c * frob2[static_cast<size_t>(sidx)] *
            static_cast<double>(last_beta);
      for (std::int64_t b = 0; b < last_beta; ++b) {
        const std::int64_t tgt =
            tr.index_of(word_concat(tr.words[static_cast<size_t>(b)], sigma));
        buf.block(b * d, tgt * d, d, d) += Ts;
        buf.block(tgt * d, b * d, d, d) += TsAdj;
      }
    }
    return std::sqrt(f2);
  }

  bool probe(double t, double rho, double tau_coeff) {
    const double fnorm = assemble(t, rho);
    return psd_probe(buf, tau_coeff * (1.0 + fnorm));
  }
};

}  // namespace radiidetail

// Membership certificate for T in C_rho from finite sections m = 1..m_max.
// The top-level section is assembled once; every lower level is its leading
// principal submatrix (word-major nesting).
inline PsdCertificate in_class(const OperatorTuple& T, double rho, int m_max,
                               Criterion crit = Criterion::section) {
  if (rho <= 0.0) throw DomainError("in_class: rho must be positive");
  if (m_max < 1) throw DomainError("in_class: m_max must be >= 1");
  PsdCertificate cert;
  cert.criterion = crit;
  cert.jsr = joint_spectral_radius(T);

  const FockTruncation trunc = enumerate_words(T.n, m_max);
  CMat top;  // criterion matrix at m_max
  std::vector<CMat> grid_tops;
  if (crit == Criterion::section) {
    top = toeplitz_section(T, rho, m_max).mat;
  } else {
    for (double r : radiidetail::kKernelGridR)
      grid_tops.push_back(kernel_P(T, rho, m_max, r).mat);
  }

  for (int m = 1; m <= m_max; ++m) {
    const std::int64_t N = trunc.offsets[m + 1] * T.d;
    double level_min = 0.0;
    if (crit == Criterion::section) {
      const auto [lo, hi] = minmax_eig_hermitian(top.topLeftCorner(N, N));
      (void)hi;
      level_min = lo;
    } else {
      level_min = std::numeric_limits<double>::infinity();
      for (const CMat& K : grid_tops)
        level_min =
            std::min(level_min, minmax_eig_hermitian(K.topLeftCorner(N, N)).first);
    }
    cert.levels.push_back(m);
    cert.min_eigs.push_back(level_min);
    const double scale =
        (crit == Criterion::section)
            ? std::max(std::abs(level_min), 1.0)
            : std::max(std::abs(level_min), rho);
    if (level_min < -tau_psd(scale)) {
      cert.verdict = Verdict::rejected;
      cert.rejected_level = m;
      cert.note = "section indefinite at level " + std::to_string(m) +
                  " (conclusive rejection)";
      return cert;
    }
  }
  if (cert.jsr > 1.0 + 1e-9) {
    cert.verdict = Verdict::rejected;
    cert.note = "joint spectral radius " + std::to_string(cert.jsr) +
                " exceeds 1 (conclusive rejection)";
    return cert;
  }
  cert.verdict = Verdict::member;
  cert.note = "all sections positive up to level " + std::to_string(m_max) +
              " (necessary conditions at finite level)";
  return cert;
}

struct OmegaReport {
  double value = 0.0;
  int m_max = 0;
  double rho = 0.0;
  double tol = 0.0;
  double lo = 0.0, hi = 0.0;        // final bracket
  int probes = 0;                   // predicate evaluations
  bool widened_tau = false;         // non-monotone probe grid, tau * 10 retry
  bool degraded_scan = false;       // still non-monotone, monotone-tail fallback
  bool bracket_expanded = false;    // initial hi failed, geometric expansion
};

// omega_rho(T) = inf{t : T/t in C_rho}, evaluated against level-m_max
// sections. The bracket starts from the exact bounds
// max(r(T), row/rho) <= omega <= row (rho >= 1) or row(2/rho - 1) (rho < 1,
// verified at runtime, geometrically expanded when it fails). Eight
// log-spaced probes screen the predicate for level-m non-monotonicity
// before bisecting.
inline OmegaReport omega_ex(const OperatorTuple& T, double rho, int m_max,
                            double tol) {
  if (rho <= 0.0) throw DomainError("omega: rho must be positive");
  if (tol <= 0.0) throw DomainError("omega: tol must be positive");
  if (m_max < 1) throw DomainError("omega: m_max must be >= 1");
  OmegaReport rep;
  rep.m_max = m_max;
  rep.rho = rho;
  rep.tol = tol;

  const double row = row_norm(T);
  if (row == 0.0) return rep;
  const double jsr = joint_spectral_radius(T);

  radiidetail::SectionProber prober(T, m_max);
  double tau_coeff = 1e-9;
  std::map<double, bool> seen;
  const auto predicate = [&](double t) {
    if (auto it = seen.find(t); it != seen.end()) return it->second;
    ++rep.probes;
    const bool ok =
        jsr <= t * (1.0 + 1e-9) && prober.probe(t, rho, tau_coeff);
    seen.emplace(t, ok);
    return ok;
  };

  double lo = std::max(jsr, row / rho) * 0.75;
  double hi = (rho >= 1.0 ? row : row * (2.0 / rho - 1.0)) * (1.0 + 1e-6) + tol;
  for (int tries = 0; tries < 8 && !predicate(hi); ++tries) {
    hi *= 2.0;
    rep.bracket_expanded = true;
  }
  if (!predicate(hi))
    throw Error("omega: failed to bracket the radius from above");

  // Probe grid over [max(lo, hi/1024), hi], log-spaced.
  const double glo = std::max(lo, hi / 1024.0);
  std::vector<double> grid;
  for (int i = 0; i < 8; ++i)
    grid.push_back(glo * std::pow(hi / glo, i / 7.0));
  auto grid_verdicts = [&]() {
    std::vector<bool> v;
    for (double t : grid) v.push_back(predicate(t));
    return v;
  };
  std::vector<bool> verdicts = grid_verdicts();
  auto monotone = [](const std::vector<bool>& v) {
    for (size_t i = 1; i < v.size(); ++i)
      if (v[i - 1] && !v[i]) return false;
    return true;
  };
  if (!monotone(verdicts)) {
    tau_coeff *= 10.0;
    rep.widened_tau = true;
    seen.clear();
    verdicts = grid_verdicts();
    if (!monotone(verdicts)) {
      // Largest monotone tail: bisect from the last false-to-true edge.
      rep.degraded_scan = true;
      size_t first_stable = verdicts.size() - 1;
      while (first_stable > 0 && verdicts[first_stable - 1]) --first_stable;
      for (size_t i = 0; i + 1 < first_stable; ++i) verdicts[i] = false;
    }
  }
  for (size_t i = 0; i < grid.size(); ++i) {
    if (verdicts[i])
      hi = std::min(hi, grid[i]);
    else
      lo = std::max(lo, grid[i]);
  }
  if (lo > hi) lo = hi * 0.5;  // degenerate after scan fallback

  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (predicate(mid))
      hi = mid;
    else
      lo = mid;
  }
  rep.lo = lo;
  rep.hi = hi;
  rep.value = 0.5 * (lo + hi);
  return rep;
}

inline double omega(const OperatorTuple& T, double rho, int m_max,
                    double tol) {
  return omega_ex(T, rho, m_max, tol).value;
}

// rho_min(T) = inf{rho : T in C_rho}, requires r(T) < 1; bisection over rho
// against the same section predicate at t = 1, using C_rho nesting in rho.
inline double rho_min(const OperatorTuple& T, int m_max, double tol) {
  if (tol <= 0.0) throw DomainError("rho_min: tol must be positive");
  if (m_max < 1) throw DomainError("rho_min: m_max must be >= 1");
  const double jsr = joint_spectral_radius(T);
  if (jsr >= 1.0)
    throw PreconditionError(
        "rho_min: joint spectral radius must be < 1, got " +
        std::to_string(jsr));
  if (row_norm(T) == 0.0) return 0.0;

  radiidetail::SectionProber prober(T, m_max);
  const auto predicate = [&](double rho) {
    return prober.probe(1.0, rho, 1e-9);
  };
  double hi = 1.0;
  int guard = 0;
  while (!predicate(hi)) {
    hi *= 2.0;
    if (++guard > 60) throw Error("rho_min: failed to bracket from above");
  }
  double lo = 0.0;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (predicate(mid))
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Noncommutative polynomials as (word, coefficient) lists; enough for the
// von Neumann checks here and the polynomial tuples in the mapping module.

using NcPoly = std::vector<std::pair<Word, cplx>>;

inline CMat eval_poly(const NcPoly& p, const OperatorTuple& T) {
  CMat out = CMat::Zero(T.d, T.d);
  for (const auto& [w, c] : p) out += c * eval_word(T, w);
  return out;
}

inline int poly_degree(const NcPoly& p) {
  int deg = 0;
  for (const auto& [w, c] : p)
    if (c != cplx(0.0, 0.0)) deg = std::max(deg, static_cast<int>(w.size()));
  return deg;
}

// p(S^(M)) for the left creation tuple at truncation M.
inline CMat eval_poly_creation(const NcPoly& p, int n, int M) {
  const FockTruncation tr = enumerate_words(n, M);
  CMat out = CMat::Zero(tr.dim, tr.dim);
  for (const auto& [w, c] : p) out += c * word_matrix(tr, Side::left, w);
  return out;
}

// l2 norm of the coefficients of the degree-k homogeneous part; for
// homogeneous q, ||q(S)|| equals this exactly at any truncation M >= k.
inline double homogeneous_coeff_norm(const NcPoly& p, int k) {
  double s = 0.0;
  for (const auto& [w, c] : p)
    if (static_cast<int>(w.size()) == k) s += std::norm(c);
  return std::sqrt(s);
}

}  // namespace ncball
