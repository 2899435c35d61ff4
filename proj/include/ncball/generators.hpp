#pragma once
// Deterministic pseudo-random instance generators shared by the command-line
// driver, its verification harness, and the test suites: operator tuples
// normalized to a prescribed operator radius or joint spectral radius, and
// contractive polynomial maps with a prescribed constant-term norm.

#include <cstdint>

#include <ncball/freemaps.hpp>
#include <ncball/radii.hpp>

namespace ncball {

// Truncation level at which the driver evaluates by default: deep levels are
// affordable only while the word count stays small.
inline int default_level(int n) { return n == 1 ? 64 : n == 2 ? 8 : 5; }

struct TupleTarget {
  enum class Kind { inside_ball, spectral };
  Kind kind = Kind::inside_ball;
  double rho = 1.0;       // inside_ball: which ball to land in
  double margin = 0.3;    // inside_ball: radius lands at 1 - margin
  double r_target = 0.5;  // spectral: joint spectral radius to hit

  static TupleTarget inside(double rho, double margin) {
    TupleTarget t;
    t.kind = Kind::inside_ball;
    t.rho = rho;
    t.margin = margin;
    return t;
  }
  static TupleTarget spectral(double r_target) {
    TupleTarget t;
    t.kind = Kind::spectral;
    t.r_target = r_target;
    return t;
  }
};

inline OperatorTuple random_raw_tuple(std::uint64_t seed, int n, int d) {
  if (n < 1 || d < 1)
    throw DomainError("random_tuple: n and d must be >= 1");
  Rng rng(seed);
  std::vector<CMat> mats;
  mats.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) mats.push_back(ginibre(rng, d));
  return make_tuple(std::move(mats));
}

// Deterministic in seed.  inside_ball rescales a Ginibre draw so the bisected
// operator radius at rho equals 1 - margin (the radius is positively
// homogeneous, so the rescale is exact up to the bisection tolerance);
// spectral rescales so the joint spectral radius equals r_target (exact by
// homogeneity of the spectral radius).  level 0 means default_level(n).
inline OperatorTuple random_tuple(std::uint64_t seed, int n, int d,
                                  const TupleTarget& target, int level = 0) {
  OperatorTuple T = random_raw_tuple(seed, n, d);
  if (target.kind == TupleTarget::Kind::spectral) {
    if (!(target.r_target > 0.0))
      throw DomainError("random_tuple: r_target must be positive");
    const double r = joint_spectral_radius(T);
    if (!(r > 0.0)) throw Error("random_tuple: degenerate draw");
    return scale_tuple(T, target.r_target / r);
  }
  if (!(target.margin > 0.0 && target.margin < 1.0))
    throw DomainError("random_tuple: margin must lie in (0,1)");
  if (!(target.rho > 0.0))
    throw DomainError("random_tuple: rho must be positive");
  // Normalize the row first so the radius bisection starts from an O(1)
  // bracket regardless of dimension.
  const double row = row_norm(T);
  if (!(row > 0.0)) throw Error("random_tuple: degenerate draw");
  T = scale_tuple(T, 1.0 / row);
  const int m = level > 0 ? level : default_level(n);
  const double w = omega(T, target.rho, m, 1e-4);
  return scale_tuple(T, (1.0 - target.margin) / w);
}

// Contractive polynomial map with ||f(0)|| = f0_target and a random
// homogeneous part of the given degree: for a homogeneous part the sup norm
// is its exact coefficient-Gram value, so scaling it to 1 - f0 - slack leaves
// sup_norm(f, 1) <= 1 - slack strictly.
inline NcPolyMap random_contractive_map(Rng& rng, int n, int m_out,
                                        double f0_target, int degree,
                                        double slack = 0.05) {
  if (m_out < 1) throw DomainError("map output arity must be >= 1");
  if (!(f0_target >= 0.0) || f0_target + slack >= 1.0)
    throw DomainError("constant-term norm leaves no contraction room");
  if (degree < 1) throw DomainError("homogeneous degree must be >= 1");

  // Constant terms with joint norm exactly f0_target.
  std::vector<cplx> c0(static_cast<size_t>(m_out));
  double s = 0.0;
  for (cplx& c : c0) {
    c = rng.cnormal();
    s += std::norm(c);
  }
  for (cplx& c : c0) c *= f0_target / std::sqrt(s);

  // Random homogeneous part over all degree-`degree` words.
  std::vector<Word> words;
  {
    Word w(static_cast<size_t>(degree), 1);
    for (;;) {
      words.push_back(w);
      int k = degree - 1;
      while (k >= 0 && w[static_cast<size_t>(k)] == n) {
        w[static_cast<size_t>(k)] = 1;
        --k;
      }
      if (k < 0) break;
      ++w[static_cast<size_t>(k)];
    }
  }
  std::vector<NcPoly> comps(static_cast<size_t>(m_out));
  for (int j = 0; j < m_out; ++j) {
    if (f0_target > 0.0)
      comps[static_cast<size_t>(j)].emplace_back(Word{},
                                                 c0[static_cast<size_t>(j)]);
    for (const Word& w : words)
      comps[static_cast<size_t>(j)].emplace_back(w, rng.cnormal());
  }
  NcPolyMap hom = make_map(n, comps);
  // Rescale only the homogeneous coefficients.
  {
    NcPolyMap hom_only = hom;
    for (NcPoly& c : hom_only.components) {
      NcPoly keep;
      for (auto& [w, coeff] : c)
        if (!w.empty()) keep.emplace_back(w, coeff);
      c = std::move(keep);
    }
    const double hs = sup_norm(hom_only, 1.0);
    const double factor = hs > 0.0 ? (1.0 - f0_target - slack) / hs : 0.0;
    for (int j = 0; j < m_out; ++j)
      for (auto& [w, coeff] : hom.components[static_cast<size_t>(j)])
        if (!w.empty()) coeff *= factor;
  }
  return hom;
}

}  // namespace ncball
