#ifndef PHIGAMMA_CHARACTER_HPP
#define PHIGAMMA_CHARACTER_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phigamma/padic.hpp"

namespace phigamma {

// Three-valued answer for predicates that may be undecidable at the working
// precision.  Never silently coerced to bool.
enum class Trilean { kYes, kNo, kIndeterminate };
inline bool is_yes(Trilean t) { return t == Trilean::kYes; }
inline bool is_no(Trilean t) { return t == Trilean::kNo; }

struct IndeterminateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Continuous character delta: Q_p^* -> Q_p^*, stored through its values on
// the generators p, gamma0 = 1+p (topological generator of 1+pZ_p) and the
// torsion component on mu_{p-1}.
class Character {
 public:
  Character() : p_(0), torsion_(0) {}
  Character(std::int64_t p, PadicNumber value_at_p, PadicNumber gamma0_value,
            std::int64_t torsion_index, std::optional<std::int64_t> weight = {});

  static Character trivial(std::int64_t p);
  // the identity character x
  static Character x_char(std::int64_t p);
  // cyclotomic chi = x|x|: chi(p) = 1, chi restricted to units is the identity
  static Character chi_char(std::int64_t p);
  static Character x_pow(std::int64_t p, std::int64_t k);
  static Character chi_x_pow(std::int64_t p, std::int64_t i);
  // unramified-at-units character of declared weight k: delta(u) = u^{-k},
  // delta(p) given
  static Character from_weight(std::int64_t p, const PadicNumber& value_at_p, std::int64_t k);

  std::int64_t prime() const { return p_; }
  const PadicNumber& value_at_p() const { return vp_; }
  const PadicNumber& gamma0_value() const { return g0_; }
  std::int64_t torsion_index() const { return torsion_; }
  std::optional<std::int64_t> declared_weight() const { return weight_; }
  PadicNumber gamma0() const { return PadicNumber::from_int(p_, 1 + p_); }

  PadicNumber eval(const PadicNumber& u) const;  // throws on zero-ish u
  // value on a unit of Z_p^* (valuation-0 part only)
  PadicNumber eval_unit(const PadicNumber& u) const;

  Character quotient(const Character& rhs) const;
  Character product(const Character& rhs) const;
  Character inverse() const;
  Character twist_by_xk(std::int64_t k) const;

  // detect an integer k with delta|units = (u -> u^{-k}), |k| <= bound
  std::optional<std::int64_t> detect_weight(std::int64_t bound = 200) const;

  bool same_at_precision(const Character& rhs) const;

  std::string to_json() const;
  static Character from_json(const std::string& text);
  // shorthand: "x^-3", "chi*x^2", "triv", "custom:{json}"
  static Character parse(std::int64_t p, const std::string& text);
  std::string describe() const;

 private:
  std::int64_t p_;
  PadicNumber vp_;
  PadicNumber g0_;
  std::int64_t torsion_;  // component on mu_{p-1}, modulo p-1
  std::optional<std::int64_t> weight_;
};

// classification of the special characters x^{-i} and chi*x^i
enum class SpecialKind { kNone, kXMinusI, kChiXI };
struct SpecialResult {
  Trilean decided = Trilean::kIndeterminate;
  SpecialKind kind = SpecialKind::kNone;
  std::int64_t i = -1;
};
SpecialResult is_special(const Character& delta);

using ParameterTuple = std::vector<Character>;

Trilean tuple_regular(const ParameterTuple& t);

// both conditions of the "bien place" definition, coefficients a field
Trilean is_bien_place(const Character& delta);

struct CrystallinePredicates {
  Trilean in_b_d = Trilean::kIndeterminate;  // all weights algebraic
  Trilean in_a_d = Trilean::kIndeterminate;  // (a) ratios, (b) weights, (c) strictly increasing
  std::vector<std::int64_t> weights;
};
CrystallinePredicates crystalline_param_predicates(const ParameterTuple& t);

}  // namespace phigamma

#endif
