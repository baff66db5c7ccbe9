#include "phigamma/character.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "phigamma/json_util.hpp"
#include "phigamma/robba.hpp"

namespace phigamma {

namespace {

std::int64_t mod_torsion(std::int64_t p, std::int64_t k) {
  std::int64_t m = p - 1;
  std::int64_t r = k % m;
  return r < 0 ? r + m : r;
}

// equality with at least min_digits certified agreement
Trilean eq_certified(const PadicNumber& a, const PadicNumber& b, std::int64_t min_digits = 5) {
  PadicNumber d = sub(a, b);
  if (!d.is_zero_ish()) return Trilean::kNo;
  return d.abs_prec() >= min_digits ? Trilean::kYes : Trilean::kIndeterminate;
}

Trilean tri_and(Trilean a, Trilean b) {
  if (a == Trilean::kNo || b == Trilean::kNo) return Trilean::kNo;
  if (a == Trilean::kYes && b == Trilean::kYes) return Trilean::kYes;
  return Trilean::kIndeterminate;
}

}  // namespace

Character::Character(std::int64_t p, PadicNumber value_at_p, PadicNumber gamma0_value,
                     std::int64_t torsion_index, std::optional<std::int64_t> weight)
    : p_(p), vp_(std::move(value_at_p)), g0_(std::move(gamma0_value)),
      torsion_(mod_torsion(p, torsion_index)), weight_(weight) {
  require_odd_prime(p);
  if (vp_.is_zero_ish()) throw std::invalid_argument("Character: delta(p) must be nonzero");
  if (!g0_.is_unit()) throw std::invalid_argument("Character: delta(gamma0) must be a unit");
  if (!sub(g0_, PadicNumber::from_int(p, 1)).is_zero_ish() &&
      sub(g0_, PadicNumber::from_int(p, 1)).valuation() < 1)
    throw std::invalid_argument("Character: delta(gamma0) must be congruent to 1 mod p");
  if (weight_) {
    PadicNumber want = gamma0().pow_int(-*weight_);
    if (!approx_equal(g0_, want))
      throw std::invalid_argument("Character: declared weight contradicts gamma0 value");
    if (mod_torsion(p, -*weight_) != torsion_)
      throw std::invalid_argument("Character: declared weight contradicts torsion index");
  }
}

Character Character::trivial(std::int64_t p) { return x_pow(p, 0); }

Character Character::x_pow(std::int64_t p, std::int64_t k) {
  PadicNumber vp = PadicNumber::from_int(p, 1).mul_pow_p(k);
  PadicNumber g0 = PadicNumber::from_int(p, 1 + p).pow_int(k);
  return Character(p, vp, g0, k, -k);
}

Character Character::x_char(std::int64_t p) { return x_pow(p, 1); }

Character Character::chi_char(std::int64_t p) { return chi_x_pow(p, 0); }

Character Character::chi_x_pow(std::int64_t p, std::int64_t i) {
  PadicNumber vp = PadicNumber::from_int(p, 1).mul_pow_p(i);
  PadicNumber g0 = PadicNumber::from_int(p, 1 + p).pow_int(1 + i);
  return Character(p, vp, g0, 1 + i, -(1 + i));
}

Character Character::from_weight(std::int64_t p, const PadicNumber& value_at_p, std::int64_t k) {
  PadicNumber g0 = PadicNumber::from_int(p, 1 + p).pow_int(-k);
  return Character(p, value_at_p, g0, -k, k);
}

PadicNumber Character::eval_unit(const PadicNumber& u) const {
  if (!u.is_unit()) throw std::domain_error("Character::eval_unit: not a unit");
  // u = omega(u) <u>, delta(u) = omega(u)^torsion * g0^{log<u>/log(gamma0)}
  PadicNumber om = teichmuller(p_, static_cast<std::int64_t>(u.residue_above(0, 1)), u.rel_prec());
  PadicNumber principal = mul(u, om.inv());
  PadicNumber e = mul(log_unit1(principal), log_unit1(gamma0()).inv());
  PadicNumber out = pow_unit1(g0_, e);
  return mul(out, om.pow_int(torsion_));
}

PadicNumber Character::eval(const PadicNumber& u) const {
  if (u.is_zero_ish()) throw std::domain_error("Character::eval: argument indistinguishable from zero");
  PadicNumber unit = u.mul_pow_p(-u.valuation());
  return mul(vp_.pow_int(u.valuation()), eval_unit(unit));
}

Character Character::product(const Character& rhs) const {
  std::optional<std::int64_t> w;
  if (weight_ && rhs.weight_) w = *weight_ + *rhs.weight_;
  return Character(p_, mul(vp_, rhs.vp_), mul(g0_, rhs.g0_), torsion_ + rhs.torsion_, w);
}

Character Character::inverse() const {
  std::optional<std::int64_t> w;
  if (weight_) w = -*weight_;
  return Character(p_, vp_.inv(), g0_.inv(), -torsion_, w);
}

Character Character::quotient(const Character& rhs) const { return product(rhs.inverse()); }

Character Character::twist_by_xk(std::int64_t k) const { return product(x_pow(p_, k)); }

std::optional<std::int64_t> Character::detect_weight(std::int64_t bound) const {
  if (weight_) return weight_;
  // candidate from e = -log(g0)/log(gamma0) in Z_p
  PadicNumber e = neg(mul(log_unit1(g0_), log_unit1(gamma0()).inv()));
  std::int64_t digits_needed = 1;
  std::int64_t q = p_;
  while (q <= 2 * bound + 1) {
    q *= p_;
    ++digits_needed;
  }
  if (!e.is_zero_ish() && e.valuation() < 0) return std::nullopt;
  std::int64_t avail = e.is_zero_ish() ? e.abs_prec() : e.abs_prec();
  if (avail < digits_needed) return std::nullopt;
  std::uint64_t m = pow_u64(static_cast<std::uint64_t>(p_), static_cast<unsigned>(digits_needed));
  std::uint64_t r = e.is_zero_ish() ? 0 : e.residue_above(0, static_cast<int>(digits_needed));
  for (std::int64_t k : {static_cast<std::int64_t>(r), static_cast<std::int64_t>(r) - static_cast<std::int64_t>(m)}) {
    if (k < -bound || k > bound) continue;
    if (mod_torsion(p_, -k) != torsion_) continue;
    if (approx_equal(g0_, gamma0().pow_int(-k))) return k;
  }
  return std::nullopt;
}

bool Character::same_at_precision(const Character& rhs) const {
  return approx_equal(vp_, rhs.vp_) && approx_equal(g0_, rhs.g0_) && torsion_ == rhs.torsion_;
}

SpecialResult is_special(const Character& delta) {
  std::int64_t p = delta.prime();
  SpecialResult res;
  std::int64_t v = delta.value_at_p().valuation();
  PadicNumber unit = delta.value_at_p().mul_pow_p(-v);
  Trilean unit_is_one = eq_certified(unit, PadicNumber::from_int(p, 1));
  if (unit_is_one == Trilean::kNo) {
    res.decided = Trilean::kYes;
    res.kind = SpecialKind::kNone;
    return res;
  }
  // delta(p) consistent with p^v: x^{-i} needs v = -i <= 0, chi*x^i needs v = i >= 0
  auto units_match = [&](std::int64_t k) {
    // delta restricted to units equals u -> u^{k}?
    Trilean g = eq_certified(delta.gamma0_value(), delta.gamma0().pow_int(k));
    Trilean t = (delta.torsion_index() == ((k % (p - 1)) + (p - 1)) % (p - 1)) ? Trilean::kYes
                                                                               : Trilean::kNo;
    return tri_and(g, t);
  };
  if (v <= 0) {
    std::int64_t i = -v;
    Trilean m = tri_and(unit_is_one, units_match(-i));
    if (m == Trilean::kYes) {
      res.decided = Trilean::kYes;
      res.kind = SpecialKind::kXMinusI;
      res.i = i;
      return res;
    }
    if (m == Trilean::kIndeterminate) {
      res.decided = Trilean::kIndeterminate;
      return res;
    }
  }
  if (v >= 0) {
    std::int64_t i = v;
    Trilean m = tri_and(unit_is_one, units_match(1 + i));
    if (m == Trilean::kYes) {
      res.decided = Trilean::kYes;
      res.kind = SpecialKind::kChiXI;
      res.i = i;
      return res;
    }
    if (m == Trilean::kIndeterminate) {
      res.decided = Trilean::kIndeterminate;
      return res;
    }
  }
  res.decided = Trilean::kYes;
  res.kind = SpecialKind::kNone;
  return res;
}

Trilean tuple_regular(const ParameterTuple& t) {
  Trilean acc = Trilean::kYes;
  for (size_t i = 0; i < t.size(); ++i)
    for (size_t j = i + 1; j < t.size(); ++j) {
      SpecialResult s = is_special(t[i].quotient(t[j]));
      if (s.decided == Trilean::kIndeterminate) {
        acc = Trilean::kIndeterminate;
        continue;
      }
      if (s.kind != SpecialKind::kNone) return Trilean::kNo;
    }
  return acc;
}

Trilean is_bien_place(const Character& delta) {
  // over a field both conditions reduce to: delta(p) is not a power of p,
  // i.e. its unit part differs from 1 ((i) at i = -v, (ii) then vacuous)
  std::int64_t v = delta.value_at_p().valuation();
  PadicNumber unit = delta.value_at_p().mul_pow_p(-v);
  Trilean unit_is_one = eq_certified(unit, PadicNumber::from_int(delta.prime(), 1));
  if (unit_is_one == Trilean::kYes) return Trilean::kNo;
  if (unit_is_one == Trilean::kNo) return Trilean::kYes;
  return Trilean::kIndeterminate;
}

CrystallinePredicates crystalline_param_predicates(const ParameterTuple& t) {
  CrystallinePredicates out;
  std::int64_t p = t.empty() ? 3 : t[0].prime();
  Trilean b = Trilean::kYes;
  for (const auto& d : t) {
    auto w = d.detect_weight();
    if (!w) {
      b = d.declared_weight() ? Trilean::kYes : Trilean::kNo;
      if (b == Trilean::kNo) break;
    }
    out.weights.push_back(w ? *w : 0);
  }
  out.in_b_d = b;
  if (b != Trilean::kYes) {
    out.in_a_d = b;
    return out;
  }
  // (c) strictly increasing
  Trilean c = Trilean::kYes;
  for (size_t i = 1; i < out.weights.size(); ++i)
    if (out.weights[i - 1] >= out.weights[i]) c = Trilean::kNo;
  // (a) delta_i(p)/delta_j(p) != p^{+-1}
  Trilean a = Trilean::kYes;
  for (size_t i = 0; i < t.size() && a != Trilean::kNo; ++i)
    for (size_t j = i + 1; j < t.size() && a != Trilean::kNo; ++j) {
      PadicNumber ratio = div(t[i].value_at_p(), t[j].value_at_p());
      for (std::int64_t s : {-1, 1}) {
        if (ratio.valuation() != s) continue;
        Trilean eq = eq_certified(ratio.mul_pow_p(-s), PadicNumber::from_int(p, 1));
        if (eq == Trilean::kYes) a = Trilean::kNo;
        else if (eq == Trilean::kIndeterminate && a == Trilean::kYes) a = Trilean::kIndeterminate;
      }
    }
  out.in_a_d = tri_and(a, tri_and(b, c));
  return out;
}

std::string Character::to_json() const {
  nlohmann::json j;
  j["p"] = p_;
  j["vp_valuation"] = vp_.valuation();
  j["vp_unit"] = vp_.unit();
  j["vp_rel"] = vp_.rel_prec();
  j["gamma0_value"] = scalar_to_json(g0_);
  j["torsion_index"] = torsion_;
  if (weight_) j["weight"] = *weight_;
  return j.dump();
}

Character Character::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  std::int64_t p = j.at("p").get<std::int64_t>();
  PadicNumber vp = PadicNumber::from_parts(p, j.at("vp_valuation").get<std::int64_t>(),
                                           j.at("vp_unit").get<std::uint64_t>(),
                                           j.value("vp_rel", kDefaultPrec));
  PadicNumber g0 = scalar_from_json(p, j.at("gamma0_value"));
  std::optional<std::int64_t> w;
  if (j.contains("weight")) w = j.at("weight").get<std::int64_t>();
  return Character(p, vp, g0, j.at("torsion_index").get<std::int64_t>(), w);
}

Character Character::parse(std::int64_t p, const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s == "triv" || s == "x^0" || s == "1") return trivial(p);
  if (s.rfind("custom:", 0) == 0) return from_json(s.substr(7));
  auto parse_exp = [&](const std::string& str, size_t pos) -> std::int64_t {
    if (pos >= str.size()) return 1;
    if (str[pos] != '^') throw std::invalid_argument("Character::parse: '^' expected");
    return std::stoll(str.substr(pos + 1));
  };
  if (s  == "chi") return chi_char(p);
  if (s.rfind("chi*x", 0) == 0) return chi_x_pow(p, parse_exp(s, 5));
  if (s.rfind("chi", 0) == 0 && s.size() > 3 && s[3] == '^')
    throw std::invalid_argument("Character::parse: powers of chi are not supported; use chi*x^i");
  if (s.rfind("x", 0) == 0) return x_pow(p, parse_exp(s, 1));
  throw std::invalid_argument("Character::parse: unrecognized shorthand '" + text + "'");
}

std::string Character::describe() const {
  SpecialResult s = is_special(*this);
  std::ostringstream os;
  if (s.decided == Trilean::kYes && s.kind == SpecialKind::kXMinusI) {
    os << "x^-" << s.i;
  } else if (s.decided == Trilean::kYes && s.kind == SpecialKind::kChiXI) {
    os << "chi*x^" << s.i;
  } else {
    os << "delta(p)=" << vp_.to_string() << ", delta(gamma0)=" << g0_.to_string()
       << ", torsion=" << torsion_;
    if (weight_) os << ", weight=" << *weight_;
  }
  return os.str();
}

}  // namespace phigamma
