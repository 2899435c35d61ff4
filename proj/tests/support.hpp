#pragma once

// Shared helpers for the unit suites.

#include "ncball/optuple.hpp"
#include "ncball/radii.hpp"

#include <cstdlib>
#include <string>

namespace testsup {

using namespace ncball;

inline double max_abs_diff(const CMat& A, const CMat& B) {
  return (A - B).cwiseAbs().maxCoeff();
}

inline CMat m2(cplx a, cplx b, cplx c, cplx d) {
  CMat M(2, 2);
  M << a, b, c, d;
  return M;
}

inline OperatorTuple scalar_tuple(std::initializer_list<cplx> vals) {
  std::vector<CMat> mats;
  for (cplx v : vals) {
    CMat M(1, 1);
    M(0, 0) = v;
    mats.push_back(M);
  }
  return make_tuple(std::move(mats));
}

// Compression of the left creation tuple to span{e_0, e_1, ..., e_n}:
// T_i maps the vacuum to e_i and kills everything else. Row norm 1,
// joint spectral radius 0, all length->=2 word products vanish.
inline OperatorTuple compressed_shift_tuple(int n) {
  const int d = n + 1;
  std::vector<CMat> mats;
  for (int i = 1; i <= n; ++i) {
    CMat M = CMat::Zero(d, d);
    M(i, 0) = cplx(1.0, 0.0);
    mats.push_back(M);
  }
  return make_tuple(std::move(mats));
}

// Random tuple scaled to a prescribed row norm.
inline OperatorTuple random_tuple_row(Rng& rng, int n, int d, double target) {
  std::vector<CMat> mats;
  for (int i = 0; i < n; ++i) mats.push_back(ginibre(rng, d));
  OperatorTuple t = make_tuple(std::move(mats));
  const double rn = row_norm(t);
  if (rn > 0.0) t = scale_tuple(t, cplx(target / rn, 0.0));
  return t;
}

// Random tuple scaled (via homogeneity of the radius) so its operator
// radius at rho is approximately the requested value.
inline OperatorTuple random_tuple_omega(Rng& rng, int n, int d, double rho,
                                        double target, int m = 6) {
  OperatorTuple t = random_tuple_row(rng, n, d, 0.5);
  const double w = omega(t, rho, m, 1e-6);
  return scale_tuple(t, cplx(target / w, 0.0));
}

inline OperatorTuple zero_tuple(int n, int d) {
  std::vector<CMat> mats(static_cast<size_t>(n), CMat::Zero(d, d));
  return make_tuple(std::move(mats));
}

inline std::string fixture_dir() {
  const char* env = std::getenv("NCBALL_FIXTURES");
  return env ? std::string(env) : std::string("fixtures");
}

inline std::string cli_bin() {
  const char* env = std::getenv("NCBALL_BIN");
  return env ? std::string(env) : std::string();
}

}  // namespace testsup
