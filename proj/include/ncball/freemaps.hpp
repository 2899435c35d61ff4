#pragma once
// Polynomial maps between operator tuples: evaluation, sup-norms over the
// unit ball, the class constant rho_f of a map, and a verifier for how
// membership, spectral radius, and operator radius transport along a map.

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <ncball/optuple.hpp>
#include <ncball/radii.hpp>

namespace ncball {

struct NcPolyMap {
  int n = 0;  // input arity
  int m = 0;  // output arity
  std::vector<NcPoly> components;  // size m; words use letters 1..n

  int degree() const {
    int deg = 0;
    for (const NcPoly& c : components)
      for (const auto& [w, coeff] : c)
        if (coeff != cplx(0.0, 0.0))
          deg = std::max(deg, static_cast<int>(w.size()));
    return deg;
  }
};

// Validates letters, deduplicates words within each component (coefficients
// of repeated words are summed), and drops exact-zero coefficients.
inline NcPolyMap make_map(int n, std::vector<NcPoly> components) {
  if (n < 1) throw DomainError("map input arity must be >= 1");
  if (components.empty()) throw DomainError("map needs at least one component");
  NcPolyMap f;
  f.n = n;
  f.m = static_cast<int>(components.size());
  for (NcPoly& c : components) {
    std::map<Word, cplx> dedup;
    for (auto& [w, coeff] : c) {
      for (int letter : w)
        if (letter < 1 || letter > n)
          throw DomainError("word letter out of range 1.." +
                            std::to_string(n));
      dedup[w] += coeff;
    }
    NcPoly clean;
    for (auto& [w, coeff] : dedup)
      if (coeff != cplx(0.0, 0.0)) clean.emplace_back(w, coeff);
    f.components.push_back(std::move(clean));
  }
  return f;
}

inline OperatorTuple eval_map(const NcPolyMap& f, const OperatorTuple& T) {
  if (f.n != T.n)
    throw DimensionError("map expects arity " + std::to_string(f.n) +
                         ", tuple has " + std::to_string(T.n));
  std::vector<CMat> mats;
  mats.reserve(static_cast<size_t>(f.m));
  for (const NcPoly& c : f.components) mats.push_back(eval_poly(c, T));
  OperatorTuple out;
  out.n = f.m;
  out.d = T.d;
  out.mats = std::move(mats);
  return out;
}

// ||f(0)||: the row norm of the constant-term tuple, i.e. the l2 norm of the
// constant coefficients.
inline double f0_norm(const NcPolyMap& f) {
  double s = 0.0;
  for (const NcPoly& c : f.components)
    for (const auto& [w, coeff] : c)
      if (w.empty()) s += std::norm(coeff);
  return std::sqrt(s);
}

// Row norm of (f_1(rS), ..., f_m(rS)) on the truncation at level M =
// degree(f), raised one step at a time until two consecutive levels agree to
// 1e-10.  Truncation norms are nondecreasing in M (compressions nest), so
// the returned value is always a certified lower bound for the row norm on
// the full space; it is exact for rows that stabilize (e.g. homogeneous
// components, isometric patterns).  Rows with a constant term converge only
// at an O(1/M^2) rate, so the raising is capped by a truncation-dimension
// budget rather than allowed to grow the matrices exponentially.
inline double sup_norm(const NcPolyMap& f, double r) {
  if (!(r > 0.0) || r > 1.0) throw DomainError("scale must be in (0,1]");
  const int deg = std::max(1, f.degree());
  auto row_norm_at = [&](int M) {
    const FockTruncation tr = enumerate_words(f.n, M);
    const std::int64_t N = tr.dim;
    CMat row = CMat::Zero(N, N * f.m);
    for (int j = 0; j < f.m; ++j) {
      CMat Fj = CMat::Zero(N, N);
      for (const auto& [w, coeff] : f.components[static_cast<size_t>(j)])
        Fj += coeff * std::pow(r, static_cast<double>(w.size())) *
              word_matrix(tr, Side::left, w);
      row.middleCols(j * N, N) = Fj;
    }
    return spectral_norm(row);
  };
  auto fock_dim = [&](int M) {
    std::int64_t dim = 1;
    for (int k = 1; k <= M; ++k) {
      dim = dim * f.n + 1;
      if (dim > 512) return dim;
    }
    return dim;
  };
  double prev = row_norm_at(deg);
  for (int M = deg + 1; M <= deg + 12 && fock_dim(M) <= 512; ++M) {
    const double cur = row_norm_at(M);
    if (std::abs(cur - prev) <= 1e-10) return cur;
    prev = cur;
  }
  return prev;
}

// The class constant of a map: rho_f = 1 + (rho-1) * (1+t)/(1-t) for
// rho >= 1 and the mirrored fraction for rho < 1, with t = ||f(0)||.
inline double rho_f(double rho, double f0) {
  if (!(rho > 0.0)) throw DomainError("rho must be positive");
  if (!(f0 >= 0.0) || f0 >= 1.0)
    throw DomainError("||f(0)|| must lie in [0,1)");
  if (f0 == 0.0) return rho;  // keep the fixed point exact
  if (rho >= 1.0) return 1.0 + (rho - 1.0) * (1.0 + f0) / (1.0 - f0);
  return 1.0 + (rho - 1.0) * (1.0 - f0) / (1.0 + f0);
}

struct MappingCheck {
  std::string name;
  bool applicable = false;
  bool passed = false;
  double margin = 0.0;
  std::string note;
};

struct MappingReport {
  double rho = 0.0;
  double rho_f_value = 0.0;
  double f0 = 0.0;
  double f_sup = 0.0;
  std::vector<MappingCheck> checks;

  bool all_passed() const {
    for (const MappingCheck& c : checks)
      if (c.applicable && !c.passed) return false;
    return true;
  }
};

// Transport checks for f applied to T: the image lands in the rho_f ball
// when T is in the rho ball; strict spectral radius and strict operator
// radius are preserved.  Precondition violations disable the dependent
// checks instead of throwing.
inline MappingReport verify_mapping(const NcPolyMap& f, const OperatorTuple& T,
                                    double rho, int m_max) {
  if (f.n != T.n)
    throw DimensionError("map expects arity " + std::to_string(f.n) +
                         ", tuple has " + std::to_string(T.n));
  if (!(rho > 0.0)) throw DomainError("rho must be positive");

  MappingReport rep;
  rep.rho = rho;
  rep.f0 = f0_norm(f);
  rep.f_sup = sup_norm(f, 1.0);

  MappingCheck contraction;
  contraction.name = "map-contractive";
  contraction.applicable = true;
  contraction.margin = 1.0 + 1e-9 - rep.f_sup;
  contraction.passed = contraction.margin >= 0.0;
  if (!contraction.passed) contraction.note = "sup norm exceeds 1";
  rep.checks.push_back(contraction);

  MappingCheck f0check;
  f0check.name = "f0-strict";
  f0check.applicable = true;
  f0check.margin = 1.0 - rep.f0;
  f0check.passed = rep.f0 < 1.0;
  rep.checks.push_back(f0check);

  const bool class_ok = contraction.passed && f0check.passed;
  rep.rho_f_value = class_ok ? rho_f(rho, rep.f0) : 0.0;

  const OperatorTuple fT = eval_map(f, T);

  MappingCheck membership;
  membership.name = "image-membership";
  const PsdCertificate inT = in_class(T, rho, m_max);
  membership.applicable = class_ok && inT.verdict == Verdict::member;
  if (!membership.applicable) {
    membership.note = class_ok ? "input tuple not certified in the rho ball"
                               : "map preconditions failed";
  } else {
    const PsdCertificate out = in_class(fT, rep.rho_f_value, m_max);
    membership.passed = out.verdict == Verdict::member;
    double worst = 0.0;
    for (double w : out.min_eigs) worst = std::min(worst, w);
    membership.margin = worst;
    if (!membership.passed)
      membership.note =
          "image rejected at level " + std::to_string(out.rejected_level);
  }
  rep.checks.push_back(membership);

  MappingCheck spectral;
  spectral.name = "spectral-radius";
  const double rT = joint_spectral_radius(T);
  spectral.applicable = rT < 1.0;
  if (!spectral.applicable) {
    spectral.note = "input spectral radius >= 1";
  } else {
    const double rfT = joint_spectral_radius(fT);
    spectral.margin = 1.0 - rfT;
    spectral.passed = rfT < 1.0;
  }
  rep.checks.push_back(spectral);

  MappingCheck radius;
  radius.name = "operator-radius";
  if (!class_ok) {
    radius.applicable = false;
    radius.note = "map preconditions failed";
  } else {
    const double wT = omega(T, rho, m_max, 1e-4);
    radius.applicable = wT < 1.0;
    if (!radius.applicable) {
      radius.note = "input operator radius >= 1";
    } else {
      const double wfT = omega(fT, rep.rho_f_value, m_max, 1e-4);
      radius.margin = 1.0 - wfT;
      radius.passed = wfT < 1.0 + 1e-4;
    }
  }
  rep.checks.push_back(radius);

  return rep;
}

}  // namespace ncball
