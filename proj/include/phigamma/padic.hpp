#ifndef PHIGAMMA_PADIC_HPP
#define PHIGAMMA_PADIC_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace phigamma {

// Default absolute working precision (digits of p).
inline constexpr int kDefaultPrec = 20;

// Valuation sentinel for exact zero.
inline constexpr std::int64_t kValInf = (std::int64_t{1} << 60);

// 64-bit modular kernel.  All moduli are p^e and must stay below 2^62; the
// helpers throw std::overflow_error past that cap.
std::uint64_t pow_u64(std::uint64_t base, unsigned exp);
std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t m);
std::uint64_t powmod_u64(std::uint64_t a, std::uint64_t e, std::uint64_t m);
std::uint64_t invmod_pp(std::uint64_t a, std::int64_t p, int e);  // inverse mod p^e, a coprime to p

int max_exp_for_prime(std::int64_t p);  // largest e with p^e < 2^62

// Capped-precision scalar of Q_p.  Value is u*p^v known modulo p^{v+r}:
//   - nonzero form: r >= 1, 0 < u < p^r, p does not divide u;
//   - zero form:    u = 0, r = 0, and v records the absolute precision
//     ("zero mod p^v"); v = kValInf means exact zero.
// Absolute precision v+r is never silently increased by any operation.
class PadicNumber {
 public:
  PadicNumber() : p_(0), v_(kValInf), u_(0), r_(0) {}  // exact zero, prime-wildcard

  static PadicNumber zero(std::int64_t p);
  static PadicNumber zero_at(std::int64_t p, std::int64_t abs_prec);
  static PadicNumber from_int(std::int64_t p, std::int64_t n, int rel = kDefaultPrec);
  static PadicNumber from_ratio(std::int64_t p, std::int64_t num, std::int64_t den,
                                int rel = kDefaultPrec);
  // residue*p^shift known modulo p^{shift+digits}; normalizes into canonical form
  static PadicNumber from_residue(std::int64_t p, std::int64_t shift, std::int64_t residue,
                                  int digits);
  static PadicNumber from_parts(std::int64_t p, std::int64_t v, std::uint64_t u, int r);

  std::int64_t prime() const { return p_; }
  std::int64_t valuation() const { return v_; }
  std::uint64_t unit() const { return u_; }
  int rel_prec() const { return r_; }
  std::int64_t abs_prec() const { return v_ == kValInf ? kValInf : v_ + r_; }

  bool is_zero_ish() const { return u_ == 0; }
  bool is_exact_zero() const { return u_ == 0 && v_ == kValInf; }
  // certifiably a unit (v = 0 and at least one known digit)
  bool is_unit() const { return !is_zero_ish() && v_ == 0; }

  PadicNumber with_abs_prec(std::int64_t abs) const;  // truncate only
  PadicNumber with_rel_prec(int rel) const;

  // residue of the value * p^{-v0} modulo p^{digits}; requires v_ >= v0
  std::uint64_t residue_above(std::int64_t v0, int digits) const;

  friend PadicNumber add(const PadicNumber& a, const PadicNumber& b);
  friend PadicNumber sub(const PadicNumber& a, const PadicNumber& b);
  friend PadicNumber mul(const PadicNumber& a, const PadicNumber& b);
  friend PadicNumber neg(const PadicNumber& a);
  PadicNumber inv() const;          // throws on indistinguishable zero
  PadicNumber pow_int(std::int64_t n) const;
  PadicNumber mul_pow_p(std::int64_t k) const;  // exact shift by p^k

  bool same_value_at_shared_prec(const PadicNumber& b) const;

  std::string to_string() const;    // "u*p^v + O(p^k)" literal, bit-exact roundtrip
  static PadicNumber parse(std::int64_t p, const std::string& text);

 private:
  std::int64_t p_;
  std::int64_t v_;
  std::uint64_t u_;
  int r_;
  static std::int64_t common_prime(const PadicNumber& a, const PadicNumber& b);
};

PadicNumber add(const PadicNumber& a, const PadicNumber& b);
PadicNumber sub(const PadicNumber& a, const PadicNumber& b);
PadicNumber mul(const PadicNumber& a, const PadicNumber& b);
PadicNumber neg(const PadicNumber& a);

inline PadicNumber div(const PadicNumber& a, const PadicNumber& b) { return mul(a, b.inv()); }
inline bool approx_equal(const PadicNumber& a, const PadicNumber& b) {
  return sub(a, b).is_zero_ish();
}

// Teichmueller lift of a mod p (the (p-1)-th root of unity congruent to a).
PadicNumber teichmuller(std::int64_t p, std::int64_t a, int rel = kDefaultPrec);

// Iwasawa logarithm / exponential on 1 + pZ_p (p odd).
PadicNumber log_unit1(const PadicNumber& x);
PadicNumber exp_small(const PadicNumber& y);
// g^e for g in 1+pZ_p and e in Z_p.
PadicNumber pow_unit1(const PadicNumber& g, const PadicNumber& e);

// Generalized binomial coefficient binom(gamma, n) for gamma in Z_p, n >= 0.
// Computed from an exact integer representative of gamma; the p-adic result is
// integral, and the certified precision loses floor(log_p n)+1 digits (the
// modulus of continuity of the integer-valued polynomial binom(.,n)).
PadicNumber padic_binomial(const PadicNumber& gamma, std::int64_t n);

// binom for arbitrary gamma in Q_p by the plain product formula (no
// integrality, ordinary precision propagation)
PadicNumber padic_binomial_general(const PadicNumber& gamma, std::int64_t n);

// v_p(n!) by Legendre's formula.
std::int64_t factorial_valuation(std::int64_t p, std::int64_t n);

// Exact integer binomial binom(n, k) as a PadicNumber at full default precision.
PadicNumber int_binomial(std::int64_t p, std::int64_t n, std::int64_t k, int rel = kDefaultPrec);

// Coefficient mode shared by a whole computation.
struct CoefficientRing {
  enum class Mode { kQpCapped, kResidueRing };
  Mode mode = Mode::kQpCapped;
  std::int64_t p = 3;
  int cap = kDefaultPrec;  // absolute cap N

  void validate() const;
};

}  // namespace phigamma

#endif
