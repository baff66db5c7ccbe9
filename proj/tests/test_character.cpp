#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "phigamma/character.hpp"
#include "test_helpers.hpp"

using namespace phigamma;
using namespace phigamma::testing;

TEST_CASE("evaluation of named characters") {
  std::int64_t p = 5;
  Character triv = Character::trivial(p);
  Character x = Character::x_char(p);
  Character chi = Character::chi_char(p);

  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    PadicNumber u = random_scalar(rng, p);
    CHECK(approx_equal(triv.eval(u), PadicNumber::from_int(p, 1)));
    CHECK(approx_equal(x.eval(u), u));
  }
  CHECK(approx_equal(x.eval(PadicNumber::from_int(p, p)), PadicNumber::from_int(p, p)));
  CHECK(approx_equal(chi.eval(PadicNumber::from_int(p, p)), PadicNumber::from_int(p, 1)));
  // chi on units is the identity
  PadicNumber u = PadicNumber::from_int(p, 7);
  CHECK(approx_equal(chi.eval(u), u));

  // eval(x^{-2}, gamma0) = gamma0^{-2}
  Character xm2 = Character::x_pow(p, -2);
  CHECK(approx_equal(xm2.eval(xm2.gamma0()), xm2.gamma0().pow_int(-2)));

  CHECK_THROWS_AS(x.eval(PadicNumber::zero_at(p, 10)), std::domain_error);
}

TEST_CASE("multiplicativity on random pairs") {
  std::int64_t p = 3;
  std::mt19937_64 rng(2);
  std::vector<Character> cs = {Character::x_pow(p, -2), Character::chi_x_pow(p, 1),
                               Character::from_weight(p, PadicNumber::from_int(p, 7), 2)};
  for (const auto& d : cs) {
    for (int trial = 0; trial < 500; ++trial) {
      PadicNumber a = random_scalar(rng, p);
      PadicNumber b = random_scalar(rng, p);
      CHECK(approx_equal(d.eval(mul(a, b)), mul(d.eval(a), d.eval(b))));
    }
  }
}

TEST_CASE("quotients and twists") {
  std::int64_t p = 3;
  Character d = Character::from_weight(p, PadicNumber::from_int(p, 10), 1);
  SpecialResult s = is_special(d.quotient(d));
  CHECK(s.decided == Trilean::kYes);
  CHECK(s.kind == SpecialKind::kXMinusI);
  CHECK(s.i == 0);

  Character xi = Character::trivial(p).twist_by_xk(3);
  CHECK(xi.same_at_precision(Character::x_pow(p, 3)));

  // chi*x^3 / x = chi*x^2
  Character lhs = Character::chi_x_pow(p, 3).quotient(Character::x_char(p));
  CHECK(lhs.same_at_precision(Character::chi_x_pow(p, 2)));
}

TEST_CASE("special recognition round-trips") {
  for (std::int64_t p : {3, 5}) {
    for (std::int64_t i = 0; i <= 10; ++i) {
      SpecialResult a = is_special(Character::x_pow(p, -i));
      CHECK(a.decided == Trilean::kYes);
      CHECK(a.kind == SpecialKind::kXMinusI);
      CHECK(a.i == i);
      SpecialResult b = is_special(Character::chi_x_pow(p, i));
      CHECK(b.decided == Trilean::kYes);
      CHECK(b.kind == SpecialKind::kChiXI);
      CHECK(b.i == i);
    }
  }
  // delta(p) = 2 (unit != 1), weight 0 -> regular
  Character d = Character::from_weight(5, PadicNumber::from_int(5, 2), 0);
  SpecialResult s = is_special(d);
  CHECK(s.decided == Trilean::kYes);
  CHECK(s.kind == SpecialKind::kNone);
}

TEST_CASE("weight detection") {
  std::int64_t p = 3;
  for (std::int64_t k : {-7, -1, 0, 2, 13}) {
    Character d = Character::from_weight(p, PadicNumber::from_int(p, 5), k);
    // rebuild without declared weight
    Character undeclared(p, d.value_at_p(), d.gamma0_value(), d.torsion_index());
    auto w = undeclared.detect_weight();
    REQUIRE(w.has_value());
    CHECK(*w == k);
  }
  // non-algebraic unit part: gamma0 -> 1 + p + p^2 is not gamma0^{-k} for small k
  Character nd(p, PadicNumber::from_int(p, 2), PadicNumber::from_int(p, 1 + p + p * p), 0);
  CHECK(!nd.detect_weight(50).has_value());
}

TEST_CASE("tuple regularity is order sensitive") {
  std::int64_t p = 3;
  ParameterTuple t1;  // d = 1: vacuous
  t1.push_back(Character::from_weight(p, PadicNumber::from_int(p, 2), 0));
  CHECK(tuple_regular(t1) == Trilean::kYes);

  ParameterTuple t2 = {Character::trivial(p), Character::trivial(p)};
  CHECK(tuple_regular(t2) == Trilean::kNo);  // quotient trivial = x^{-0}

  // delta1/delta2 = chi*x^2 is special in this order but x^{-...}-free reversed
  ParameterTuple t3 = {Character::chi_x_pow(p, 2), Character::trivial(p)};
  CHECK(tuple_regular(t3) == Trilean::kNo);
  ParameterTuple t4 = {Character::trivial(p), Character::chi_x_pow(p, 2)};
  // quotient (triv)/(chi x^2): delta(p) = p^{-2}, units part u^{-3}: neither form
  CHECK(tuple_regular(t4) == Trilean::kYes);
}

TEST_CASE("bien place") {
  std::int64_t p = 3;
  Character reg = Character::from_weight(p, PadicNumber::from_int(p, 2), 0);
  CHECK(is_bien_place(reg) == Trilean::kYes);
  CHECK(is_bien_place(Character::chi_x_pow(p, 2)) == Trilean::kNo);  // delta(p) = p^2
  CHECK(is_bien_place(Character::trivial(p)) == Trilean::kNo);       // 1 - delta(p) = 0
}

TEST_CASE("crystalline predicates") {
  std::int64_t p = 3;
  // d = 1, delta = x^{-k}: in A_1
  {
    ParameterTuple t = {Character::x_pow(p, -4)};
    auto c = crystalline_param_predicates(t);
    CHECK(c.in_a_d == Trilean::kYes);
    CHECK(c.weights == std::vector<std::int64_t>{4});
  }
  // equal weights: in B_d, not in A_d
  {
    ParameterTuple t = {Character::from_weight(p, PadicNumber::from_int(p, 2), 1),
                        Character::from_weight(p, PadicNumber::from_int(p, 5), 1)};
    auto c = crystalline_param_predicates(t);
    CHECK(c.in_b_d == Trilean::kYes);
    CHECK(c.in_a_d == Trilean::kNo);
  }
  // ratio of delta(p) equal to p violates (a)
  {
    ParameterTuple t = {Character::from_weight(p, PadicNumber::from_int(p, 2 * p), 0),
                        Character::from_weight(p, PadicNumber::from_int(p, 2), 1)};
    auto c = crystalline_param_predicates(t);
    CHECK(c.in_a_d == Trilean::kNo);
  }
  // A_d implies B_d implies regular on a sampled tuple
  {
    ParameterTuple t = {Character::from_weight(p, PadicNumber::from_int(p, 2), -3),
                        Character::from_weight(p, PadicNumber::from_int(p, 7), 2),
                        Character::from_weight(p, PadicNumber::from_int(p, 5 * 9), 8)};
    auto c = crystalline_param_predicates(t);
    CHECK(c.in_a_d == Trilean::kYes);
    CHECK(c.in_b_d == Trilean::kYes);
    CHECK(tuple_regular(t) == Trilean::kYes);
  }
}

TEST_CASE("shorthand parsing and json") {
  std::int64_t p = 3;
  CHECK(Character::parse(p, "x^-3").same_at_precision(Character::x_pow(p, -3)));
  CHECK(Character::parse(p, "chi*x^2").same_at_precision(Character::chi_x_pow(p, 2)));
  CHECK(Character::parse(p, "chi").same_at_precision(Character::chi_char(p)));
  CHECK(Character::parse(p, "triv").same_at_precision(Character::trivial(p)));
  CHECK_THROWS_AS(Character::parse(p, "bogus"), std::invalid_argument);

  Character d = Character::from_weight(p, PadicNumber::from_int(p, 10), 2);
  Character back = Character::from_json(d.to_json());
  CHECK(back.same_at_precision(d));
  CHECK(Character::parse(p, "custom:" + d.to_json()).same_at_precision(d));

  CHECK_THROWS_AS(Character::from_weight(2, PadicNumber::from_int(2, 2), 0), std::domain_error);
}
