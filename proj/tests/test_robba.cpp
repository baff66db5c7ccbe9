#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "phigamma/robba.hpp"
#include "test_helpers.hpp"

using namespace phigamma;
using namespace phigamma::testing;

TEST_CASE("ring multiplication windows") {
  std::int64_t p = 3;
  RobbaElement T = RobbaElement::monomial_int(p, 1);
  RobbaElement Tinv = RobbaElement::monomial_int(p, -1);
  CHECK(approx_equal(mul(T, Tinv), RobbaElement::one(p)));

  std::mt19937_64 rng(5);
  RobbaElement f = random_series(rng, p, -2, 12);
  RobbaElement prod = mul(f, RobbaElement::one(p));
  CHECK(prod.lo() == f.lo());
  CHECK(prod.hi() == f.hi());
  CHECK(approx_equal(prod, f));

  // (1+T) * geometric series = 1 + O(T^hi)   [geometric-series oracle]
  std::int64_t hi = 15;
  std::vector<PadicNumber> geo;
  for (std::int64_t n = 0; n <= hi; ++n)
    geo.push_back(PadicNumber::from_int(p, (n % 2) ? -1 : 1));
  RobbaElement g = RobbaElement::from_coeffs(p, 0, std::move(geo), false);
  RobbaElement one = mul(RobbaElement::one_plus_T(p), g);
  CHECK(approx_equal(one, RobbaElement::one(p)));

  // window law of the spec for two unknown tails
  RobbaElement a = random_series(rng, p, -1, 7);
  RobbaElement b = random_series(rng, p, -2, 9);
  RobbaElement ab = mul(a, b);
  CHECK(ab.lo() == a.lo() + b.lo());
  CHECK(ab.hi() == std::min(a.hi() + b.lo(), b.hi() + a.lo()));
}

TEST_CASE("unit inverse") {
  std::int64_t p = 5;
  CHECK(approx_equal(unit_inverse(RobbaElement::one(p)), RobbaElement::one(p)));

  RobbaElement inv = unit_inverse(RobbaElement::one_plus_T(p), 12);
  for (std::int64_t n = 0; n <= 12; ++n) {
    PadicNumber want = PadicNumber::from_int(p, (n % 2) ? -1 : 1);
    CHECK(approx_equal(inv.coeff(n), want));
  }

  std::mt19937_64 rng(6);
  RobbaElement f = random_series(rng, p, 0, 10, true);
  f = add(f, RobbaElement::one(p));  // force, generically, a unit constant term
  if (f.coeff(0).is_unit()) {
    RobbaElement g = unit_inverse(f);
    CHECK(approx_equal(mul(f, g), RobbaElement::one(p)));
  }
  CHECK_THROWS_AS(unit_inverse(RobbaElement::monomial_int(p, 0, p)), std::domain_error);
}

TEST_CASE("phi on T, t, and 1") {
  for (std::int64_t p : {3, 5}) {
    CHECK(approx_equal(phi(RobbaElement::monomial_int(p, 1)), phi_of_T(p)));
    CHECK(approx_equal(phi(RobbaElement::one(p)), RobbaElement::one(p)));

    RobbaElement t = log_one_plus_T(p, 40);
    RobbaElement lhs = phi(t);
    RobbaElement rhs = t.scalar_mul(PadicNumber::from_int(p, p));
    CHECK(approx_equal(lhs, rhs));
  }
}

TEST_CASE("gamma action basics") {
  std::int64_t p = 3;
  std::mt19937_64 rng(7);
  RobbaElement f = random_series(rng, p, -3, 20);
  CHECK(approx_equal(gamma_act(PadicNumber::from_int(p, 1), f), f));

  PadicNumber g0 = PadicNumber::from_int(p, 1 + p);
  RobbaElement t = log_one_plus_T(p, 30);
  CHECK(approx_equal(gamma_act(g0, t), t.scalar_mul(g0)));

  // gamma(1+T) = (1+T)^gamma, coefficients binom(gamma, n)
  RobbaElement gt = gamma_act(g0, RobbaElement::one_plus_T(p), 15);
  for (std::int64_t n = 0; n <= 15; ++n)
    CHECK(approx_equal(gt.coeff(n), padic_binomial(g0, n)));

  // |gamma(f)| = |f| at radius within the window (Gauss norm invariance)
  RobbaElement h = random_series(rng, p, 0, 25, true);
  GaussNorm n1 = gauss_norm(h, 1, 2);
  GaussNorm n2 = gauss_norm(gamma_act(g0, h), 1, 2);
  CHECK(gauss_leq(n1, n2));
  CHECK(gauss_leq(n2, n1));
}

TEST_CASE("psi named values") {
  for (std::int64_t p : {3, 5}) {
    // psi(T) = -1
    RobbaElement T = RobbaElement::monomial_int(p, 1);
    CHECK(approx_equal(psi(T), RobbaElement::monomial_int(p, 0, -1)));

    // psi(t) = t/p on the ladder window
    RobbaElement t = log_one_plus_T(p, 60);
    RobbaElement lhs = psi(t);
    RobbaElement rhs = t.scalar_mul(PadicNumber::from_int(p, p).inv());
    CHECK(approx_equal(lhs, rhs));

    // psi(T^{-i-1}) = Q(T) T^{-i-1}, deg Q <= i, Q(0) = p^i
    for (std::int64_t i = 0; i <= 4; ++i) {
      RobbaElement y = psi(RobbaElement::monomial_int(p, -i - 1));
      CHECK(y.tail_exact());
      CHECK(y.lo() >= -i - 1);
      CHECK(y.hi() <= -1);
      PadicNumber q0 = y.coeff(-i - 1);
      CHECK(approx_equal(q0, PadicNumber::from_int(p, 1).mul_pow_p(i)));
    }
  }
}

TEST_CASE("psi of phi is the identity") {
  std::mt19937_64 rng(8);
  for (std::int64_t p : {3, 5}) {
    for (int trial = 0; trial < 20; ++trial) {
      RobbaElement f = random_series(rng, p, 0, 30);
      RobbaElement pf = phi(f);
      RobbaElement back = psi(pf);
      CHECK(approx_equal(back, f.truncated(back.hi())));
    }
  }
}

TEST_CASE("decomposition roundtrip") {
  std::mt19937_64 rng(9);
  for (std::int64_t p : {3, 5}) {
    for (int trial = 0; trial < 10; ++trial) {
      RobbaElement f = random_series(rng, p, -2, 3 * p + 24);
      auto comps = psi_decompose(f);
      REQUIRE(static_cast<std::int64_t>(comps.size()) == p);
      RobbaElement sum = RobbaElement::zero(p);
      RobbaElement opt = RobbaElement::one_plus_T(p);
      RobbaElement pw = RobbaElement::one(p);
      for (std::int64_t i = 0; i < p; ++i) {
        sum = add(sum, mul(pw, phi_laurent(comps[static_cast<size_t>(i)])));
        pw = mul(pw, opt);
      }
      CHECK(approx_equal(sum, f.truncated(sum.hi())));
    }
  }
}

TEST_CASE("psi commutes with gamma and the projection formula") {
  std::mt19937_64 rng(10);
  std::int64_t p = 3;
  PadicNumber g0 = PadicNumber::from_int(p, 4);
  for (int trial = 0; trial < 8; ++trial) {
    RobbaElement f = random_series(rng, p, 0, 45, true);
    RobbaElement a = psi(gamma_act(g0, f));
    RobbaElement b = gamma_act(g0, psi(f));
    CHECK(approx_equal(a.truncated(b.hi()), b.truncated(a.hi())));

    // psi(phi(a) x) = a psi(x)
    RobbaElement g = random_series(rng, p, 0, 12, true);
    RobbaElement x = random_series(rng, p, 0, 45, true);
    RobbaElement lhs = psi(mul(phi(g), x));
    RobbaElement rhs = mul(g, psi(x));
    std::int64_t h = std::min(lhs.hi(), rhs.hi());
    CHECK(approx_equal(lhs.truncated(h), rhs.truncated(h)));
  }
}

TEST_CASE("phi commutes with gamma") {
  std::mt19937_64 rng(11);
  std::int64_t p = 3;
  PadicNumber g0 = PadicNumber::from_int(p, 2);  // generator of Z_3^*
  for (int trial = 0; trial < 8; ++trial) {
    RobbaElement f = random_series(rng, p, 0, 30);
    RobbaElement a = phi(gamma_act(g0, f));
    RobbaElement b = gamma_act(g0, phi(f));
    std::int64_t h = std::min(a.hi(), b.hi());
    CHECK(approx_equal(a.truncated(h), b.truncated(h)));
  }
}

TEST_CASE("gamma minus one raises T-valuation on integral models") {
  std::mt19937_64 rng(12);
  std::int64_t p = 3;
  for (int M : {1, 2}) {
    PadicNumber gm = PadicNumber::from_int(p, 1 + (M == 1 ? p : p * p));
    for (int trial = 0; trial < 6; ++trial) {
      RobbaElement f = random_series(rng, p, 0, 25, true);
      RobbaElement d = sub(gamma_act(gm, f), f);
      // (gamma-1) f lands in (p, T)^M-deepened integral span: every certified
      // coefficient at T^j with j < valuation shift must be divisible by p
      for (std::int64_t j = 0; j <= d.hi(); ++j) {
        PadicNumber c = d.coeff(j);
        if (c.is_zero_ish()) continue;
        CHECK(c.valuation() + std::min<std::int64_t>(j, M) >= M);
      }
    }
  }
}

TEST_CASE("G_gamma operator") {
  std::int64_t p = 3;
  std::mt19937_64 rng(13);
  RobbaElement x = random_series(rng, p, 0, 30);
  CHECK(approx_equal(g_gamma(PadicNumber::from_int(p, 1), x), x.shift(1)));

  // (gamma0 - 1)((1+T) phi(x)) = (1+T) phi(G_gamma0(x)) for gamma0 = 1+p
  PadicNumber g0 = PadicNumber::from_int(p, 1 + p);
  RobbaElement opt = RobbaElement::one_plus_T(p);
  RobbaElement lhsFull = mul(opt, phi(x));
  RobbaElement lhs = sub(gamma_act(g0, lhsFull), lhsFull);
  RobbaElement rhs = mul(opt, phi(g_gamma(g0, x)));
  std::int64_t h = std::min(lhs.hi(), rhs.hi());
  CHECK(approx_equal(lhs.truncated(h), rhs.truncated(h)));

  // linearity
  RobbaElement y = random_series(rng, p, 0, 30);
  PadicNumber c = random_scalar(rng, p);
  RobbaElement left = g_gamma(g0, add(x.scalar_mul(c), y));
  RobbaElement right = add(g_gamma(g0, x).scalar_mul(c), g_gamma(g0, y));
  CHECK(approx_equal(left, right));
}

TEST_CASE("residue") {
  std::int64_t p = 3;
  std::mt19937_64 rng(14);
  RobbaElement f = random_series(rng, p, 0, 10);
  CHECK(residue(f).is_exact_zero());

  CHECK(approx_equal(residue(RobbaElement::monomial_int(p, -1)), PadicNumber::from_int(p, 1)));

  // residue((1+T)^{-1} g) = g(0) for polynomial g
  RobbaElement g = random_series(rng, p, 0, 6, true);
  RobbaElement expr = mul(g, RobbaElement::monomial_int(p, -1));  // g * T^{-1}
  // Res(g/T ... ) is not g(0); instead check via the definition on (1+T)^{-1}:
  // f = (1+T)^{-1} g has Res(f) = coeff of T^{-1} in f/(1+T)... use direct:
  // Res(g * T^{-1}) = [T^0](g * (1-T+T^2-...)) computed against expansion
  PadicNumber want = PadicNumber::zero(p);
  for (std::int64_t n = 0; n <= std::min<std::int64_t>(g.hi(), 0); ++n) want = add(want, g.coeff(0));
  CHECK(approx_equal(residue(expr), g.coeff(0)));

  // Gamma-invariance in the twisted sense: gamma * Res(gamma(f)) = Res(f)
  PadicNumber g0 = PadicNumber::from_int(p, 4);
  RobbaElement h = random_series(rng, p, -5, 12);
  PadicNumber lhs = mul(g0, residue(gamma_act(g0, h)));
  CHECK(approx_equal(lhs, residue(h)));
}

TEST_CASE("log(1+T) coefficients") {
  std::int64_t p = 5;
  RobbaElement t = log_one_plus_T(p, 30);
  CHECK(approx_equal(t.coeff(1), PadicNumber::from_int(p, 1)));
  CHECK(t.coeff(p).valuation() == -1);
}

TEST_CASE("gauss norms") {
  std::int64_t p = 3;
  CHECK(gauss_norm(RobbaElement::one(p), 2).exp_num == 0);
  RobbaElement tk = RobbaElement::monomial_int(p, 7);
  GaussNorm n = gauss_norm(tk, 2);  // |T^7| at radius p^{-2}
  CHECK(n.exp_num == -14);

  // |phi(f)| <= |f| on R+
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    RobbaElement f = random_series(rng, p, 0, 20);
    CHECK(gauss_leq(gauss_norm(phi(f), 1), gauss_norm(f, 1)));
  }
}

TEST_CASE("neumann solver for 1 - lambda phi") {
  std::int64_t p = 3;
  PadicNumber lam = PadicNumber::from_int(p, p);
  RobbaElement y = RobbaElement::monomial_int(p, 1).padded(25);
  RobbaElement x = neumann_solve_phi(lam, y, 1);
  RobbaElement resid = sub(sub(x, phi(x).scalar_mul(lam)), y);
  CHECK(resid.is_zero_ish());

  CHECK(neumann_solve_phi(lam, RobbaElement::zero(p), 1).is_zero_ish());
  // v(lambda) + shift <= 0 violates the contraction
  CHECK_THROWS_AS(neumann_solve_phi(PadicNumber::from_int(p, p).inv(), y, 1),
                  std::domain_error);
}

TEST_CASE("psi surjectivity solver") {
  std::int64_t p = 3;
  for (std::int64_t lam_int : {1, 2, 3}) {
    PadicNumber lam = PadicNumber::from_int(p, lam_int);
    for (std::int64_t i = 0; i <= 5; ++i) {
      RobbaElement y = RobbaElement::monomial_int(p, i).padded(40);
      RobbaElement x = psi_surjectivity_solve(lam, y);
      RobbaElement resid = sub(sub(x, psi(x).scalar_mul(lam)), y);
      CHECK(resid.truncated(psi(x).hi()).is_zero_ish());
    }
  }
  CHECK(psi_surjectivity_solve(PadicNumber::from_int(3, 1), RobbaElement::zero(3).padded(10))
            .is_zero_ish());

  // identity (lambda psi - 1)(T phi(T^i)) = -lambda T^i - T phi(T)^i
  std::int64_t p2 = 3;
  PadicNumber lam = PadicNumber::from_int(p2, 7);
  for (std::int64_t i = 0; i <= 5; ++i) {
    RobbaElement tphiti = phi_of_T_pow(p2, i).shift(1);
    RobbaElement lhs = sub(psi(tphiti.padded(60)).scalar_mul(lam), tphiti);
    RobbaElement rhs = sub(RobbaElement::monomial_int(p2, i).scalar_mul(neg(lam)), tphiti);
    std::int64_t h = std::min(lhs.hi(), rhs.hi());
    CHECK(approx_equal(lhs.truncated(h), rhs.truncated(h)));
  }
}

TEST_CASE("psi tail gain bound is empirically sound") {
  // the certification of psi on unknown tails relies on:
  //   v_p([T^j] psi(T^n)) >= ceil((n - p*j)/(p-1)) - 1
  for (std::int64_t p : {3, 5}) {
    for (std::int64_t n = 1; n <= 150; n += (p == 3 ? 1 : 3)) {
      RobbaElement y = psi(RobbaElement::monomial_int(p, n));
      for (std::int64_t j = y.lo(); j <= y.hi(); ++j) {
        PadicNumber c = y.coeff(j);
        std::int64_t num = n - p * j;
        std::int64_t bound = num <= 0 ? 0 : std::max<std::int64_t>(0, (num + p - 2) / (p - 1) - 1);
        if (c.is_zero_ish()) {
          // consistent with the bound up to the precision actually carried
          CHECK(c.abs_prec() >= std::min<std::int64_t>(bound, 18));
        } else {
          CHECK(c.valuation() >= bound);
        }
      }
    }
  }
}

TEST_CASE("laurent phi matches positive phi through multiplication") {
  std::int64_t p = 3;
  // phi(T^-1) * phi(T) = 1
  RobbaElement a = phi_laurent(RobbaElement::monomial_int(p, -1).padded(10));
  RobbaElement prod = mul(a, phi_of_T(p));
  CHECK(approx_equal(prod, RobbaElement::one(p)));
}

TEST_CASE("series literal and json round-trips") {
  std::int64_t p = 3;
  RobbaElement f = RobbaElement::parse(p, "1 + 3*T^-1 + O(T^40, p^20)");
  CHECK(f.lo() == -1);
  CHECK(f.hi() == 39);
  CHECK(approx_equal(f.coeff(-1), PadicNumber::from_int(p, 3)));
  RobbaElement g = RobbaElement::parse(p, f.to_string());
  CHECK(approx_equal(f, g));

  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 25; ++trial) {
    RobbaElement h = random_series(rng, p, -3, 12);
    RobbaElement back = RobbaElement::from_json(h.to_json());
    CHECK(back.lo() == h.lo());
    CHECK(back.hi() == h.hi());
    CHECK(approx_equal(back, h));
  }
}

TEST_CASE("annulus tag validation") {
  std::int64_t p = 3;
  std::vector<PadicNumber> c = {PadicNumber::from_int(p, p * p), PadicNumber::from_int(p, p),
                                PadicNumber::from_int(p, 1)};
  RobbaElement f = RobbaElement::from_coeffs(p, -2, std::move(c), false);
  CHECK_NOTHROW(f.set_annulus(1));
  std::vector<PadicNumber> bad = {PadicNumber::from_int(p, 1), PadicNumber::from_int(p, 1),
                                  PadicNumber::from_int(p, 1)};
  RobbaElement g = RobbaElement::from_coeffs(p, -2, std::move(bad), false);
  CHECK_THROWS_AS(g.set_annulus(1), std::invalid_argument);
}

TEST_CASE("p = 2 is gated") {
  CHECK_THROWS_AS(require_odd_prime(2), std::domain_error);
  CHECK_NOTHROW(require_odd_prime(2, true));
  CHECK_NOTHROW(require_odd_prime(3));
}
