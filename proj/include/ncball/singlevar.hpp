#pragma once
// Single-variable (n = 1) closed forms evaluated on disc grids: the kernel
// K_rho(z,T), a grid-based domination check, and the intertwiner-norm
// formula.  These are independent of the Fock truncation machinery and serve
// as its cross-checks.

#include <algorithm>
#include <cmath>
#include <limits>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <ncball/matrix.hpp>

namespace ncball {

struct DiscGrid {
  int radii = 32;
  int angles = 64;
  // Stay strictly inside the disc (resolvents are evaluated pointwise), but
  // close enough to the boundary that suprema attained there are captured:
  // for strictly contractive arguments the boundary gap contributes an
  // O(1 - max_radius) one-sided bias, and cross-oracle agreements at the
  // 1e-4 scale need that bias below ~3e-5.
  double max_radius = 0.99995;
};

// K_rho(z,T) = zT*(I-zT*)^{-1} + rho I + conj(z) T (I-conj(z) T)^{-1},
// Hermitian by construction (symmetrized against roundoff).
inline CMat kernel_K(cplx z, const CMat& T, double rho) {
  require_square(T, "kernel_K");
  if (!(rho > 0.0)) throw DomainError("rho must be positive");
  if (!(std::abs(z) < 1.0)) throw DomainError("|z| must be < 1");
  const std::int64_t d = T.rows();
  const CMat I = CMat::Identity(d, d);
  const CMat Ts = T.adjoint();
  CMat res1, res2;
  try {
    res1 = inverse(I - z * Ts);
    res2 = inverse(I - std::conj(z) * T);
  } catch (const SingularError& e) {
    throw PreconditionError(std::string("kernel resolvent singular: ") +
                            e.what());
  }
  CMat K = z * Ts * res1 + rho * I + std::conj(z) * T * res2;
  return 0.5 * (K + CMat(K.adjoint()));
}

enum class GridVerdict { passed, refuted };

struct Disc1dCertificate {
  double rho = 0.0;
  double c = 1.0;
  GridVerdict verdict = GridVerdict::passed;
  cplx refuted_z{0.0, 0.0};
  double worst_min_eig = 0.0;  // smallest min eigenvalue across grid points
  int points = 0;
  double tau_coeff = 0.0;
  // "passed" is necessary-conditions semantics; a refutation is conclusive.
};

namespace svdetail {

inline std::vector<cplx> grid_points(const DiscGrid& g) {
  std::vector<cplx> pts;
  pts.reserve(static_cast<size_t>(g.radii) * static_cast<size_t>(g.angles));
  for (int j = 1; j <= g.radii; ++j) {
    const double r = g.max_radius * static_cast<double>(j) /
                     static_cast<double>(g.radii);
    for (int i = 0; i < g.angles; ++i) {
      const double th = 2.0 * std::numbers::pi * static_cast<double>(i) /
                        static_cast<double>(g.angles);
      pts.push_back(std::polar(r, th));
    }
  }
  return pts;
}

// Closed-form eigensystem of a 2x2 Hermitian matrix (ascending order).  The
// eigenvector residual vanishes algebraically for either branch; the branch
// is chosen so the unnormalized vector never cancels.
struct Eig2 {
  double w0 = 0.0, w1 = 0.0;  // w0 <= w1
  Eigen::Vector2cd v0, v1;
};

inline Eig2 eig2(const Eigen::Matrix2cd& M) {
  Eig2 out;
  const double a = M(0, 0).real();
  const double c = M(1, 1).real();
  const cplx b = M(0, 1);
  const double ab = std::abs(b);
  const double h = 0.5 * (a - c);
  const double mean = 0.5 * (a + c);
  const double r = std::hypot(h, ab);
  out.w0 = mean - r;
  out.w1 = mean + r;
  if (ab == 0.0) {
    if (a >= c) {
      out.v1 << 1.0, 0.0;
      out.v0 << 0.0, 1.0;
    } else {
      out.v1 << 0.0, 1.0;
      out.v0 << 1.0, 0.0;
    }
    return out;
  }
  Eigen::Vector2cd v1;
  if (h > 0.0)
    v1 << cplx(h + r, 0.0), std::conj(b);
  else
    v1 << b, cplx(r - h, 0.0);
  v1 /= v1.norm();
  out.v1 = v1;
  out.v0 << -std::conj(v1(1)), std::conj(v1(0));
  return out;
}

}  // namespace svdetail

// PSD check of c^2 K_rho(z,Tp) - K_rho(z,T) over the disc grid.
inline Disc1dCertificate dominates_1d(const CMat& T, const CMat& Tp,
                                      double rho, double c,
                                      const DiscGrid& grid = DiscGrid{}) {
  require_square(T, "dominates_1d");
  require_square(Tp, "dominates_1d");
  if (T.rows() != Tp.rows())
    throw DimensionError("matrix size mismatch in dominates_1d");
  if (!(rho > 0.0)) throw DomainError("rho must be positive");
  if (!(c >= 1.0)) throw DomainError("c must be >= 1");

  if (grid.radii < 1 || grid.angles < 1)
    throw DomainError("dominates_1d: grid must have at least one point");

  Disc1dCertificate cert;
  cert.rho = rho;
  cert.c = c;
  cert.worst_min_eig = std::numeric_limits<double>::infinity();
  for (const cplx z : svdetail::grid_points(grid)) {
    const CMat D = (c * c) * kernel_K(z, Tp, rho) - kernel_K(z, T, rho);
    const double tau = tau_psd(max_abs(D));
    cert.tau_coeff = std::max(cert.tau_coeff, tau);
    const double w = min_eig_hermitian(D);
    ++cert.points;
    cert.worst_min_eig = std::min(cert.worst_min_eig, w);
    if (w < -tau) {
      cert.verdict = GridVerdict::refuted;
      cert.refuted_z = z;
      return cert;
    }
  }
  cert.verdict = GridVerdict::passed;
  return cert;
}

struct LNormReport {
  double value = 0.0;
  int refinements = 0;     // grid doublings performed
  bool converged = false;  // two consecutive refinements each moved <= 1e-5
  double last_increment = 0.0;
};

// sup over the disc of
//   || Delta_{rho,Tp*}(z)^{-1} (I - conj(z) Tp*) (I - conj(z) T*)^{-1}
//      Delta_{rho,T*}(z) ||
// with Delta_{rho,X}(z)^2 = rho I + (1-rho)(zX* + conj(z)X) + (rho-2)XX*,
// approached by grid refinement (each step doubles radii and angles).
inline LNormReport L_norm_1d(const CMat& T, const CMat& Tp, double rho,
                             const DiscGrid& grid = DiscGrid{}) {
  require_square(T, "L_norm_1d");
  require_square(Tp, "L_norm_1d");
  if (T.rows() != Tp.rows())
    throw DimensionError("matrix size mismatch in L_norm_1d");
  if (!(rho > 0.0)) throw DomainError("rho must be positive");
  if (grid.radii < 1 || grid.angles < 1)
    throw DomainError("L_norm_1d: grid must have at least one point");
  const std::int64_t d = T.rows();
  const CMat I = CMat::Identity(d, d);

  // Delta for the adjoint argument: Delta_{rho,X*}(z)^2 with X* plugged into
  // the defect formula.
  auto delta2_adj = [&](const CMat& X, cplx z) {
    CMat D = rho * I + (1.0 - rho) * (z * X + std::conj(z) * CMat(X.adjoint())) +
             (rho - 2.0) * CMat(X.adjoint() * X);
    return CMat(0.5 * (D + CMat(D.adjoint())));
  };
  auto value_at_general = [&](cplx z) {
    const CMat D2p = delta2_adj(Tp, z);
    const CMat D2 = delta2_adj(T, z);
    const double tau = tau_psd(std::max(max_abs(D2p), max_abs(D2)));
    const EigH ep = eig_hermitian(D2p, true, "L_norm_1d");
    const EigH e = eig_hermitian(D2, true, "L_norm_1d");
    const double minp = ep.w.minCoeff();
    const double mine = e.w.minCoeff();
    if (minp < tau || mine < -tau)
      throw NotInBallError(std::min(minp, mine),
                           "defect operator loses positivity on the disc");
    CMat half = CMat::Zero(d, d);
    CMat halfinv = CMat::Zero(d, d);
    for (std::int64_t i = 0; i < d; ++i) {
      const double w = std::max(e.w(i), 0.0);
      half += std::sqrt(w) * CMat(e.V.col(i) * e.V.col(i).adjoint());
    }
    for (std::int64_t i = 0; i < d; ++i)
      halfinv += (1.0 / std::sqrt(ep.w(i))) *
                 CMat(ep.V.col(i) * ep.V.col(i).adjoint());
    const CMat mid =
        (I - std::conj(z) * CMat(Tp.adjoint())) *
        inverse(CMat(I - std::conj(z) * CMat(T.adjoint())));
    return spectral_norm(CMat(halfinv * mid * half));
  };

  // d <= 2 runs on closed forms instead of LAPACK: a refinement pass visits
  // up to a few hundred thousand grid points, and that turns a per-point
  // cost of microseconds into nanoseconds without changing the values.
  auto value_at_1 = [&](cplx z) {
    const cplx t = T(0, 0);
    const cplx tp = Tp(0, 0);
    const double d2p =
        rho + 2.0 * (1.0 - rho) * (z * tp).real() + (rho - 2.0) * std::norm(tp);
    const double d2 =
        rho + 2.0 * (1.0 - rho) * (z * t).real() + (rho - 2.0) * std::norm(t);
    const double tau = tau_psd(std::max(std::abs(d2p), std::abs(d2)));
    if (d2p < tau || d2 < -tau)
      throw NotInBallError(std::min(d2p, d2),
                           "defect operator loses positivity on the disc");
    const cplx den = 1.0 - std::conj(z) * std::conj(t);
    if (!(std::abs(den) > 0.0)) throw SingularError(0.0, "L_norm_1d");
    const cplx num = 1.0 - std::conj(z) * std::conj(tp);
    return std::sqrt(std::max(d2, 0.0) / d2p) * std::abs(num / den);
  };

  Eigen::Matrix2cd T2, Tp2;
  if (d == 2) {
    T2 = T;
    Tp2 = Tp;
  }
  auto value_at_2 = [&](cplx z) {
    using M2 = Eigen::Matrix2cd;
    const M2 I2 = M2::Identity();
    auto d2_of = [&](const M2& X) {
      const M2 D = rho * I2 +
                   (1.0 - rho) * (z * X + std::conj(z) * X.adjoint()).eval() +
                   (rho - 2.0) * (X.adjoint() * X).eval();
      return M2(0.5 * (D + D.adjoint()));
    };
    const M2 D2p = d2_of(Tp2);
    const M2 D2 = d2_of(T2);
    const double tau = tau_psd(
        std::max(D2p.cwiseAbs().maxCoeff(), D2.cwiseAbs().maxCoeff()));
    const svdetail::Eig2 ep = svdetail::eig2(D2p);
    const svdetail::Eig2 e = svdetail::eig2(D2);
    if (ep.w0 < tau || e.w0 < -tau)
      throw NotInBallError(std::min(ep.w0, e.w0),
                           "defect operator loses positivity on the disc");
    const M2 half =
        std::sqrt(std::max(e.w1, 0.0)) * (e.v1 * e.v1.adjoint()) +
        std::sqrt(std::max(e.w0, 0.0)) * (e.v0 * e.v0.adjoint());
    const M2 halfinv =
        (1.0 / std::sqrt(ep.w1)) * (ep.v1 * ep.v1.adjoint()) +
        (1.0 / std::sqrt(ep.w0)) * (ep.v0 * ep.v0.adjoint());
    const M2 A2 = I2 - std::conj(z) * T2.adjoint();
    const cplx det = A2(0, 0) * A2(1, 1) - A2(0, 1) * A2(1, 0);
    if (!(std::abs(det) > 0.0)) throw SingularError(0.0, "L_norm_1d");
    M2 inv;
    inv << A2(1, 1), -A2(0, 1), -A2(1, 0), A2(0, 0);
    inv /= det;
    const M2 G0 = halfinv * (I2 - std::conj(z) * Tp2.adjoint()) * inv * half;
    const M2 G = G0.adjoint() * G0;
    const double gh = 0.5 * (G(0, 0).real() - G(1, 1).real());
    const double gmean = 0.5 * (G(0, 0).real() + G(1, 1).real());
    const double gr = std::hypot(gh, std::abs(G(0, 1)));
    return std::sqrt(std::max(gmean + gr, 0.0));
  };

  auto value_at = [&](cplx z) {
    if (d == 1) return value_at_1(z);
    if (d == 2) return value_at_2(z);
    return value_at_general(z);
  };

  LNormReport rep;
  DiscGrid g = grid;
  double prev = 0.0;
  int quiet = 0;  // consecutive refinements that moved the value by <= 1e-5
  for (int step = 0; step <= 4; ++step) {
    double best = 0.0;
    for (const cplx z : svdetail::grid_points(g))
      best = std::max(best, value_at(z));
    rep.value = best;
    rep.refinements = step;
    if (step > 0) {
      rep.last_increment = std::abs(best - prev);
      // One agreeing refinement is not trusted: a doubled grid can reproduce
      // the old maximum exactly (the argmax stays an old grid point) while
      // the true peak still falls between samples; this was observed to
      // stall 1e-3 below the supremum.  Require two consecutive quiet
      // refinements before declaring convergence.
      quiet = rep.last_increment <= 1e-5 ? quiet + 1 : 0;
      if (quiet >= 2) {
        rep.converged = true;
        return rep;
      }
    }
    prev = best;
    g.radii *= 2;
    g.angles *= 2;
  }
  return rep;
}

}  // namespace ncball
