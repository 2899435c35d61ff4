#include <catch2/catch_amalgamated.hpp>

#include "ncball/radii.hpp"
#include "support.hpp"

using namespace ncball;
using testsup::compressed_shift_tuple;
using testsup::random_tuple_row;
using testsup::scalar_tuple;

namespace {

// Exact radius of a 1x1 tuple (a): the (2-rho)/rho branch binds for rho<=1,
// power-boundedness |a/t|<=1 binds for rho>=1.
double scalar_omega(double a, double rho) {
  return std::abs(a) * std::max(1.0, (2.0 - rho) / rho);
}

OperatorTuple nilpotent2(double a) {
  CMat N = CMat::Zero(2, 2);
  N(0, 1) = a;
  return make_tuple({N});
}

}  // namespace

TEST_CASE("in_class pinned verdicts", "[radii]") {
  const OperatorTuple z = make_tuple({CMat::Zero(2, 2), CMat::Zero(2, 2)});
  for (double rho : {0.3, 1.0, 5.0})
    CHECK(in_class(z, rho, 3).verdict == Verdict::member);

  Rng rng(101);
  const OperatorTuple t = random_tuple_row(rng, 2, 2, 0.98);
  CHECK(in_class(t, 1.0, 4).verdict == Verdict::member);

  const PsdCertificate bad = in_class(scalar_tuple({cplx(1.5, 0)}), 1.0, 4);
  CHECK(bad.verdict == Verdict::rejected);
  CHECK(bad.rejected_level == 1);
  REQUIRE(bad.min_eigs.size() == 1);
  CHECK(bad.min_eigs[0] == Catch::Approx(-0.5).margin(1e-10));

  CHECK_THROWS_AS(in_class(t, 0.0, 3), DomainError);
}

TEST_CASE("in_class rejects on spectral radius with positive sections",
          "[radii]") {
  // rho = 3 keeps every finite section of the scalar 1+1e-7 positive while
  // the spectral radius sits just above 1.
  const PsdCertificate c = in_class(scalar_tuple({cplx(1.0 + 1e-7, 0)}), 3.0, 6);
  CHECK(c.verdict == Verdict::rejected);
  CHECK(c.rejected_level == -1);          // every section passed
  CHECK(c.min_eigs.size() == 6);
  for (double me : c.min_eigs) CHECK(me > 0.0);
  CHECK(c.jsr > 1.0 + 1e-9);
}

TEST_CASE("kernel-grid criterion agrees with sections", "[radii]") {
  Rng rng(103);
  const OperatorTuple good = random_tuple_row(rng, 2, 2, 0.9);
  CHECK(in_class(good, 1.0, 3, Criterion::kernel_grid).verdict ==
        Verdict::member);
  const PsdCertificate bad =
      in_class(scalar_tuple({cplx(1.5, 0)}), 1.0, 3, Criterion::kernel_grid);
  CHECK(bad.verdict == Verdict::rejected);
  CHECK(bad.rejected_level == 1);
}

TEST_CASE("omega trivial and row-norm cases", "[radii]") {
  const OperatorTuple z = make_tuple({CMat::Zero(3, 3), CMat::Zero(3, 3)});
  CHECK(omega(z, 1.7, 4, 1e-6) == 0.0);

  Rng rng(105);
  for (int trial = 0; trial < 5; ++trial) {
    const OperatorTuple t = random_tuple_row(rng, 2, 2, 0.5 + 0.4 * trial);
    const double w1 = omega(t, 1.0, 5, 1e-5);
    CHECK(w1 == Catch::Approx(row_norm(t)).margin(1e-4));
  }
  CHECK_THROWS_AS(omega(z, -1.0, 4, 1e-5), DomainError);
  CHECK_THROWS_AS(omega(z, 1.0, 4, 0.0), DomainError);
}

TEST_CASE("omega matches the compressed-shift formula", "[radii]") {
  const OperatorTuple t = compressed_shift_tuple(2);
  for (double rho : {0.5, 1.0, 2.0, 4.0}) {
    const double w = omega(t, rho, 8, 2e-5);
    CHECK(w == Catch::Approx(1.0 / rho).margin(1e-4));
  }
}

TEST_CASE("omega matches the scalar closed form", "[radii]") {
  const double a = 0.8;
  const OperatorTuple t = scalar_tuple({cplx(a, 0)});
  for (double rho : {0.4, 0.7, 1.0, 1.6, 2.0, 3.0}) {
    const double w = omega(t, rho, 128, 1e-5);
    CHECK(w == Catch::Approx(scalar_omega(a, rho)).margin(2e-3));
  }
}

TEST_CASE("omega matches the nilpotent closed form |a|/rho", "[radii]") {
  const OperatorTuple t = nilpotent2(1.3);
  for (double rho : {0.5, 1.0, 2.0, 3.0}) {
    const double w = omega(t, rho, 128, 1e-5);
    CHECK(w == Catch::Approx(1.3 / rho).margin(3e-3));
  }
}

TEST_CASE("omega is nonincreasing in rho and dominated by row/rho bounds",
          "[radii]") {
  Rng rng(107);
  const double tol = 1e-4;
  for (int trial = 0; trial < 3; ++trial) {
    const OperatorTuple t = random_tuple_row(rng, 2, 2, 0.8 + 0.3 * trial);
    double prev = std::numeric_limits<double>::infinity();
    for (double rho : {0.5, 1.0, 2.0, 4.0, 8.0}) {
      const double w = omega(t, rho, 6, tol);
      CHECK(w <= prev + 2.0 * tol);
      CHECK(w >= joint_spectral_radius(t) - 2.0 * tol);
      // the exact inequality row <= rho * omega, with bisection slack on w
      CHECK(row_norm(t) <= rho * (w + tol) + 1e-6);
      prev = w;
    }
    const double w_far = omega(t, 1000.0, 6, tol);
    CHECK(w_far <= prev + 2.0 * tol);
    CHECK(w_far - joint_spectral_radius(t) >= -2.0 * tol);
  }
}

TEST_CASE("omega is zero-padding invariant", "[radii]") {
  Rng rng(109);
  const OperatorTuple t = random_tuple_row(rng, 2, 2, 1.1);
  const double tol = 1e-4;
  const double w = omega(t, 1.5, 4, tol);
  const double wp = omega(zero_pad(t, 2), 1.5, 4, tol);
  CHECK(wp == Catch::Approx(w).margin(2.0 * tol));
}

TEST_CASE("rho_min pinned values", "[radii]") {
  const OperatorTuple z = make_tuple({CMat::Zero(2, 2)});
  CHECK(rho_min(z, 4, 1e-6) == 0.0);

  // scalar 0.5: exact threshold 2|a|/(1+|a|) = 2/3
  const double r = rho_min(scalar_tuple({cplx(0.5, 0)}), 128, 1e-6);
  CHECK(r == Catch::Approx(2.0 / 3.0).margin(2e-3));
  CHECK(r > 0.0);
  CHECK(r <= 1.0);

  CHECK_THROWS_AS(rho_min(scalar_tuple({cplx(1.1, 0)}), 4, 1e-6),
                  PreconditionError);
}

TEST_CASE("rho_min matches the scaled compressed-shift threshold", "[radii]") {
  // X = s rho0 T has omega_rho(X) = s rho0 / rho, so rho_X = s rho0.
  const double s = 0.8, rho0 = 1.5;
  const OperatorTuple X =
      scale_tuple(compressed_shift_tuple(2), cplx(s * rho0, 0));
  const double r = rho_min(X, 8, 1e-5);
  CHECK(r <= s * rho0 + 1e-4);
  CHECK(r >= s * rho0 * 0.93);  // finite-level acceptance bites from below
}

TEST_CASE("rho_min of the nilpotent tuple equals |a|", "[radii]") {
  const double r = rho_min(nilpotent2(0.6), 128, 1e-6);
  CHECK(r == Catch::Approx(0.6).margin(3e-3));
}

TEST_CASE("von Neumann inequality for certified members", "[radii]") {
  Rng rng(111);
  for (double rho : {1.0, 1.7}) {
    const OperatorTuple t = random_tuple_row(rng, 2, 2, 0.9);
    REQUIRE(in_class(t, rho, 4).verdict == Verdict::member);

    // Homogeneous prong: ||q(S^(k))|| equals the coefficient l2 norm at
    // truncation k, exactly.
    for (int deg = 1; deg <= 3; ++deg) {
      NcPoly q;
      const FockTruncation words = enumerate_words(2, deg);
      for (std::int64_t i = words.offsets[deg]; i < words.dim; ++i)
        q.emplace_back(words.words[static_cast<size_t>(i)], rng.cnormal());
      const double cnorm = homogeneous_coeff_norm(q, deg);
      CHECK(spectral_norm(eval_poly_creation(q, 2, deg)) ==
            Catch::Approx(cnorm).margin(1e-12));
      CHECK(spectral_norm(eval_poly(q, t)) <= rho * cnorm + 1e-9);
    }

    // General prong: the right side of the inequality is bounded above by
    // |p(0)| + rho * sum_k ||c_k||_2 (triangle over homogeneous parts).
    NcPoly p;
    const FockTruncation words = enumerate_words(2, 3);
    for (const Word& w : words.words) p.emplace_back(w, 0.5 * rng.cnormal());
    double upper = std::abs(p[0].second);
    for (int k = 1; k <= 3; ++k) upper += rho * homogeneous_coeff_norm(p, k);
    CHECK(spectral_norm(eval_poly(p, t)) <= upper + 1e-9);
  }
}

TEST_CASE("von Neumann inequality, scalar class with circle certificate",
          "[radii]") {
  Rng rng(113);
  const double a = 0.7, rho = 1.2;  // rho_min(0.7) = 1.4/1.7 < 1.2: member
  const OperatorTuple t = scalar_tuple({cplx(a, 0)});
  REQUIRE(in_class(t, rho, 64).verdict == Verdict::member);
  for (int trial = 0; trial < 10; ++trial) {
    NcPoly p;
    const int deg = 5;
    for (int k = 0; k <= deg; ++k)
      p.emplace_back(Word(static_cast<size_t>(k), 1), rng.cnormal());
    // q(z) = rho p(z) + (1-rho) p(0); sup over |z|=1 certified by a grid
    // plus the derivative slack sum_k k |q_k| * pi / N.
    const int N = 32768;
    double grid_max = 0.0, deriv = 0.0;
    for (int j = 0; j < N; ++j) {
      const double th = 2.0 * std::numbers::pi * j / N;
      cplx q = (1.0 - rho) * p[0].second;
      for (int k = 0; k <= deg; ++k) {
        q += rho * p[static_cast<size_t>(k)].second *
             std::polar(1.0, th * k);
      }
      grid_max = std::max(grid_max, std::abs(q));
    }
    for (int k = 1; k <= deg; ++k)
      deriv += k * rho * std::abs(p[static_cast<size_t>(k)].second);
    const double slack = deriv * std::numbers::pi / N;
    CHECK(slack < 5e-3);
    const double lhs = std::abs(eval_poly(p, t)(0, 0));
    CHECK(lhs <= grid_max + slack + 1e-12);
    // finite sections of the shift never exceed the circle sup
    const CMat qS = rho * eval_poly_creation(p, 1, deg + 6) +
                    (1.0 - rho) * p[0].second *
                        CMat::Identity(deg + 7, deg + 7);
    CHECK(spectral_norm(qS) <= grid_max + slack + 1e-9);
  }
}

TEST_CASE("omega reports expose safeguard flags", "[radii]") {
  Rng rng(115);
  const OperatorTuple t = random_tuple_row(rng, 2, 2, 1.2);
  const OmegaReport rep = omega_ex(t, 1.0, 4, 1e-4);
  CHECK(rep.value > 0.0);
  CHECK(rep.hi - rep.lo <= 1e-4);
  CHECK(rep.probes > 0);
  CHECK_FALSE(rep.degraded_scan);
}
