#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <random>

#include "phigamma/padic.hpp"

using namespace phigamma;

namespace {

// Independent oracle: exact 128-bit integer arithmetic reduced mod p^k.
std::uint64_t mod_pow(std::int64_t p, int k) {
  std::uint64_t m = 1;
  for (int i = 0; i < k; ++i) m *= static_cast<std::uint64_t>(p);
  return m;
}

std::uint64_t int_mod(__int128 n, std::uint64_t m) {
  __int128 r = n % static_cast<__int128>(m);
  if (r < 0) r += m;
  return static_cast<std::uint64_t>(r);
}

bool matches_int(const PadicNumber& x, std::int64_t p, __int128 expected) {
  std::int64_t abs = std::min<std::int64_t>(x.abs_prec(), 18);
  if (abs <= 0) return true;
  std::uint64_t m = mod_pow(p, static_cast<int>(abs));
  std::uint64_t got = x.is_zero_ish() ? 0 : x.residue_above(0, static_cast<int>(abs));
  return got == int_mod(expected, m);
}

}  // namespace

TEST_CASE("add identities and cancellation") {
  for (std::int64_t p : {2, 3, 5, 7}) {
    PadicNumber x = PadicNumber::from_int(p, 1234567);
    CHECK(add(PadicNumber::zero(p), x).same_value_at_shared_prec(x));

    // p^2 * 1 at abs prec 10 plus its negative: zero to abs prec 10
    PadicNumber a = PadicNumber::from_int(p, p * p).with_abs_prec(10);
    PadicNumber b = neg(a);
    PadicNumber s = add(a, b);
    CHECK(s.is_zero_ish());
    CHECK(s.abs_prec() == 10);
  }
}

TEST_CASE("add matches exact integer oracle") {
  std::int64_t p = 5;
  PadicNumber a = PadicNumber::from_int(p, 1 + p);
  PadicNumber b = PadicNumber::from_int(p, p);
  PadicNumber s = add(a, b);
  CHECK(matches_int(s, p, 1 + 2 * p));
  CHECK(s.abs_prec() == std::min(a.abs_prec(), b.abs_prec()));
}

TEST_CASE("mul and inv basics") {
  std::int64_t p = 3;
  PadicNumber x = PadicNumber::from_int(p, 7 * 9);
  CHECK(mul(x, PadicNumber::from_int(p, 1)).same_value_at_shared_prec(x));

  PadicNumber pinv = PadicNumber::from_int(p, p).inv();
  CHECK(pinv.valuation() == -1);
  CHECK(pinv.unit() == 1);

  PadicNumber a = PadicNumber::from_int(p, 1 + p);
  PadicNumber b = PadicNumber::from_int(p, 1 - p);
  CHECK(matches_int(mul(a, b), p, 1 - static_cast<__int128>(p) * p));
  CHECK_THROWS_AS(PadicNumber::zero_at(p, 8).inv(), std::domain_error);
}

TEST_CASE("mul valuation additivity is exact, randomized inverses") {
  std::mt19937_64 rng(42);
  for (std::int64_t p : {2, 3, 5, 7}) {
    for (int trial = 0; trial < 1000; ++trial) {
      std::int64_t n = static_cast<std::int64_t>(rng() % 1000000) + 1;
      std::int64_t m = static_cast<std::int64_t>(rng() % 1000000) + 1;
      PadicNumber a = PadicNumber::from_int(p, n);
      PadicNumber b = PadicNumber::from_int(p, m);
      CHECK(mul(a, b).valuation() == a.valuation() + b.valuation());
      PadicNumber one = mul(a.inv(), a);
      CHECK(sub(one, PadicNumber::from_int(p, 1)).is_zero_ish());
    }
  }
}

TEST_CASE("binomial coefficients") {
  std::int64_t p = 5;
  PadicNumber g = PadicNumber::from_int(p, 1 + p);
  CHECK(padic_binomial(g, 0).same_value_at_shared_prec(PadicNumber::from_int(p, 1)));
  CHECK(padic_binomial(g, 1).same_value_at_shared_prec(g));

  // integer case: binom(1, n) = 0 for n >= 2
  PadicNumber one = PadicNumber::from_int(p, 1);
  for (int n = 2; n <= 6; ++n) CHECK(padic_binomial(one, n).is_zero_ish());

  // binom(1+p, 2) = p(1+p)/2 for odd p  (exact rational oracle)
  PadicNumber expect = PadicNumber::from_ratio(p, p * (1 + p), 2);
  CHECK(approx_equal(padic_binomial(g, 2), expect));
}

TEST_CASE("binomial Pascal identity at shared precision") {
  std::mt19937_64 rng(7);
  for (std::int64_t p : {3, 5}) {
    for (int trial = 0; trial < 50; ++trial) {
      PadicNumber g = PadicNumber::from_int(p, static_cast<std::int64_t>(rng() % 100000) * p + 1);
      PadicNumber gm1 = sub(g, PadicNumber::from_int(p, 1));
      for (int n = 1; n <= 12; ++n) {
        PadicNumber lhs = padic_binomial(g, n);
        PadicNumber rhs = add(padic_binomial(gm1, n), padic_binomial(gm1, n - 1));
        CHECK(approx_equal(lhs, rhs));
      }
    }
  }
}

TEST_CASE("binomial continuity certificate is sound") {
  // binom(., n) on Z_p: congruence mod p^K in the argument gives congruence
  // mod p^{K - floor(log_p n) - 1} in the value; the implementation certifies
  // exactly this, so two lifts of the same truncation must agree within it.
  std::mt19937_64 rng(13);
  for (std::int64_t p : {3, 5}) {
    for (int trial = 0; trial < 300; ++trial) {
      int K = 6 + static_cast<int>(rng() % 10);
      std::int64_t base = static_cast<std::int64_t>(rng() % 100000);
      std::int64_t lift = base + static_cast<std::int64_t>(mod_pow(p, K));
      std::int64_t n = 2 + static_cast<std::int64_t>(rng() % 119);
      PadicNumber a = PadicNumber::from_int(p, base).with_abs_prec(K);
      PadicNumber b = PadicNumber::from_int(p, lift).with_abs_prec(K);
      CHECK(approx_equal(padic_binomial(a, n), padic_binomial(b, n)));
    }
  }
}

TEST_CASE("binomial precision loss is tracked") {
  std::int64_t p = 3;
  PadicNumber g = PadicNumber::from_int(p, 4);  // unit, 20 digits
  PadicNumber b = padic_binomial(g, 27);
  CHECK(b.abs_prec() <= g.abs_prec());
  CHECK(b.abs_prec() >= g.abs_prec() - 4);  // floor(log_3 27) + 1 = 4
}

TEST_CASE("teichmuller and unit logarithms") {
  std::int64_t p = 7;
  for (std::int64_t a = 1; a < p; ++a) {
    PadicNumber t = teichmuller(p, a);
    CHECK(approx_equal(t.pow_int(p - 1), PadicNumber::from_int(p, 1)));
    CHECK(t.residue_above(0, 1) == static_cast<std::uint64_t>(a));
  }
  PadicNumber g = PadicNumber::from_int(p, 1 + p);
  PadicNumber lg = log_unit1(g);
  CHECK(lg.valuation() == 1);
  CHECK(approx_equal(exp_small(lg), g));
  // g^e with integer e agrees with pow_int
  PadicNumber e = PadicNumber::from_int(p, 12);
  CHECK(approx_equal(pow_unit1(g, e), g.pow_int(12)));
}

TEST_CASE("literal format round-trips bit-exactly") {
  std::mt19937_64 rng(99);
  for (std::int64_t p : {2, 3, 5, 7}) {
    for (int trial = 0; trial < 200; ++trial) {
      PadicNumber x = PadicNumber::from_residue(p, static_cast<std::int64_t>(rng() % 7) - 3,
                                                static_cast<std::int64_t>(rng() % 100000),
                                                3 + static_cast<int>(rng() % 15));
      PadicNumber y = PadicNumber::parse(p, x.to_string());
      CHECK(x.to_string() == y.to_string());
      CHECK(x.valuation() == y.valuation());
      CHECK(x.unit() == y.unit());
      CHECK(x.rel_prec() == y.rel_prec());
    }
  }
  CHECK(PadicNumber::parse(3, "0").is_exact_zero());
  CHECK_THROWS_AS(PadicNumber::parse(3, "junk + O(3^2)"), std::invalid_argument);
  CHECK_THROWS_AS(add(PadicNumber::from_int(3, 1), PadicNumber::from_int(5, 1)),
                  std::invalid_argument);
}

TEST_CASE("coefficient ring guards the modulus cap") {
  CoefficientRing ring;
  ring.p = 7;
  ring.cap = 20;
  CHECK_NOTHROW(ring.validate());
  ring.cap = 40;
  CHECK_THROWS_AS(ring.validate(), std::overflow_error);
}
