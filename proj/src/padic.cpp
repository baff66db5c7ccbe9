#include "phigamma/padic.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <vector>

namespace phigamma {

namespace {
constexpr std::uint64_t kModCap = std::uint64_t{1} << 62;
}

std::uint64_t pow_u64(std::uint64_t base, unsigned exp) {
  std::uint64_t acc = 1;
  for (unsigned i = 0; i < exp; ++i) {
    if (base != 0 && acc > kModCap / base)
      throw std::overflow_error("pow_u64: p-adic modulus cap (2^62) exceeded");
    acc *= base;
  }
  return acc;
}

std::uint64_t mulmod_u64(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

std::uint64_t powmod_u64(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
  std::uint64_t acc = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) acc = mulmod_u64(acc, a, m);
    a = mulmod_u64(a, a, m);
    e >>= 1;
  }
  return acc;
}

std::uint64_t invmod_pp(std::uint64_t a, std::int64_t p, int e) {
  // unit group of Z/p^e has order p^{e-1}(p-1)
  std::uint64_t m = pow_u64(static_cast<std::uint64_t>(p), static_cast<unsigned>(e));
  if (a % p == 0) throw std::domain_error("invmod_pp: not a unit");
  std::uint64_t order = (m / static_cast<std::uint64_t>(p)) * static_cast<std::uint64_t>(p - 1);
  return powmod_u64(a % m, order - 1, m);
}

int max_exp_for_prime(std::int64_t p) {
  int e = 0;
  std::uint64_t acc = 1;
  while (acc <= kModCap / static_cast<std::uint64_t>(p)) {
    acc *= static_cast<std::uint64_t>(p);
    ++e;
  }
  return e;
}

void CoefficientRing::validate() const {
  if (p < 2) throw std::invalid_argument("CoefficientRing: p must be >= 2");
  if (cap < 1) throw std::invalid_argument("CoefficientRing: cap must be >= 1");
  if (cap > max_exp_for_prime(p))
    throw std::overflow_error("CoefficientRing: p^cap exceeds the 2^62 modulus cap");
}

std::int64_t PadicNumber::common_prime(const PadicNumber& a, const PadicNumber& b) {
  if (a.p_ == 0) return b.p_;
  if (b.p_ == 0) return a.p_;
  if (a.p_ != b.p_) throw std::invalid_argument("PadicNumber: prime mismatch");
  return a.p_;
}

PadicNumber PadicNumber::zero(std::int64_t p) {
  PadicNumber z;
  z.p_ = p;
  return z;
}

PadicNumber PadicNumber::zero_at(std::int64_t p, std::int64_t abs_prec) {
  PadicNumber z;
  z.p_ = p;
  z.v_ = abs_prec;
  return z;
}

PadicNumber PadicNumber::from_parts(std::int64_t p, std::int64_t v, std::uint64_t u, int r) {
  if (r <= 0 || u == 0) return zero_at(p, v + std::max(r, 0));
  std::uint64_t m = pow_u64(static_cast<std::uint64_t>(p), static_cast<unsigned>(r));
  u %= m;
  if (u == 0) return zero_at(p, v + r);
  // strip p-factors of u into v, preserving absolute precision v+r
  while (u % static_cast<std::uint64_t>(p) == 0) {
    u /= static_cast<std::uint64_t>(p);
    ++v;
    --r;
  }
  PadicNumber x;
  x.p_ = p;
  x.v_ = v;
  x.u_ = u;
  x.r_ = r;
  return x;
}

PadicNumber PadicNumber::from_residue(std::int64_t p, std::int64_t shift, std::int64_t residue,
                                      int digits) {
  if (digits <= 0) return zero_at(p, shift + digits);
  std::uint64_t m = pow_u64(static_cast<std::uint64_t>(p), static_cast<unsigned>(digits));
  std::int64_t rr = residue % static_cast<std::int64_t>(m);
  if (rr < 0) rr += static_cast<std::int64_t>(m);
  return from_parts(p, shift, static_cast<std::uint64_t>(rr), digits);
}

PadicNumber PadicNumber::from_int(std::int64_t p, std::int64_t n, int rel) {
  if (n == 0) return zero(p);
  std::int64_t v = 0;
  while (n % p == 0) {
    n /= p;
    ++v;
  }
  std::uint64_t m = pow_u64(static_cast<std::uint64_t>(p), static_cast<unsigned>(rel));
  std::int64_t rr = n % static_cast<std::int64_t>(m);
  if (rr < 0) rr += static_cast<std::int64_t>(m);
  return from_parts(p, v, static_cast<std::uint64_t>(rr), rel);
}

PadicNumber PadicNumber::from_ratio(std::int64_t p, std::int64_t num, std::int64_t den, int rel) {
  if (den == 0) throw std::invalid_argument("from_ratio: zero denominator");
  return mul(from_int(p, num, rel), from_int(p, den, rel).inv());
}

PadicNumber PadicNumber::with_abs_prec(std::int64_t abs) const {
  if (is_zero_ish()) return zero_at(p_, std::min(v_, abs));
  if (abs <= v_) return zero_at(p_, abs);
  int r2 = static_cast<int>(std::min<std::int64_t>(r_, abs - v_));
  if (r2 == r_) return *this;
  return from_parts(p_, v_, u_ % pow_u64(static_cast<std::uint64_t>(p_), static_cast<unsigned>(r2)),
                    r2);
}

PadicNumber PadicNumber::with_rel_prec(int rel) const {
  if (is_zero_ish() || rel >= r_) return *this;
  return with_abs_prec(v_ + rel);
}

std::uint64_t PadicNumber::residue_above(std::int64_t v0, int digits) const {
  std::uint64_t m = pow_u64(static_cast<std::uint64_t>(p_), static_cast<unsigned>(digits));
  if (is_zero_ish()) return 0;
  if (v_ < v0) throw std::domain_error("residue_above: valuation below requested floor");
  std::int64_t sh = v_ - v0;
  if (sh >= digits) return 0;
  return mulmod_u64(u_ % m, pow_u64(static_cast<std::uint64_t>(p_), static_cast<unsigned>(sh)) % m,
                    m);
}

PadicNumber add(const PadicNumber& a, const PadicNumber& b) {
  std::int64_t p = PadicNumber::common_prime(a, b);
  if (p == 0) return PadicNumber();
  std::int64_t abs = std::min(a.abs_prec(), b.abs_prec());
  if (a.is_zero_ish() && b.is_zero_ish()) return PadicNumber::zero_at(p, abs);
  if (a.is_zero_ish()) return b.with_abs_prec(abs);
  if (b.is_zero_ish()) return a.with_abs_prec(abs);
  std::int64_t m0 = std::min(a.v_, b.v_);
  if (abs <= m0) return PadicNumber::zero_at(p, abs);
  int k = static_cast<int>(abs - m0);
  std::uint64_t m = pow_u64(static_cast<std::uint64_t>(p), static_cast<unsigned>(k));
  std::uint64_t s = a.residue_above(m0, k);
  s = (s + b.residue_above(m0, k)) % m;
  return PadicNumber::from_parts(p, m0, s, k);
}

PadicNumber neg(const PadicNumber& a) {
  if (a.is_zero_ish()) return a;
  std::uint64_t m = pow_u64(static_cast<std::uint64_t>(a.p_), static_cast<unsigned>(a.r_));
  return PadicNumber::from_parts(a.p_, a.v_, m - a.u_, a.r_);
}

PadicNumber sub(const PadicNumber& a, const PadicNumber& b) { return add(a, neg(b)); }

PadicNumber mul(const PadicNumber& a, const PadicNumber& b) {
  std::int64_t p = PadicNumber::common_prime(a, b);
  if (p == 0) return PadicNumber();
  if (a.is_exact_zero() || b.is_exact_zero()) return PadicNumber::zero(p);
  if (a.is_zero_ish() || b.is_zero_ish()) {
    // O(p^k) * (u p^v + ...) = O(p^{k+v}); for two zeros the bounds add
    std::int64_t bound;
    if (a.is_zero_ish() && b.is_zero_ish())
      bound = a.v_ + b.v_;
    else if (a.is_zero_ish())
      bound = a.v_ + b.v_;
    else
      bound = b.v_ + a.v_;
    return PadicNumber::zero_at(p, bound);
  }
  int r = std::min(a.r_, b.r_);
  std::uint64_t m = pow_u64(static_cast<std::uint64_t>(p), static_cast<unsigned>(r));
  return PadicNumber::from_parts(p, a.v_ + b.v_, mulmod_u64(a.u_ % m, b.u_ % m, m), r);
}

PadicNumber PadicNumber::inv() const {
  if (is_zero_ish())
    throw std::domain_error("PadicNumber::inv: value indistinguishable from zero");
  return from_parts(p_, -v_, invmod_pp(u_, p_, r_), r_);
}

PadicNumber PadicNumber::pow_int(std::int64_t n) const {
  if (n == 0) return from_int(p_, 1, is_zero_ish() ? kDefaultPrec : r_);
  PadicNumber base = n > 0 ? *this : inv();
  std::uint64_t e = static_cast<std::uint64_t>(n > 0 ? n : -n);
  PadicNumber acc = from_int(p_, 1, base.is_zero_ish() ? kDefaultPrec : base.r_);
  while (e) {
    if (e & 1) acc = mul(acc, base);
    base = mul(base, base);
    e >>= 1;
  }
  return acc;
}

PadicNumber PadicNumber::mul_pow_p(std::int64_t k) const {
  if (is_exact_zero()) return *this;
  if (is_zero_ish()) return zero_at(p_, v_ + k);
  return from_parts(p_, v_ + k, u_, r_);
}

bool PadicNumber::same_value_at_shared_prec(const PadicNumber& b) const {
  return sub(*this, b).is_zero_ish();
}

std::string PadicNumber::to_string() const {
  std::ostringstream os;
  if (is_exact_zero()) return "0";
  if (is_zero_ish()) {
    os << "O(" << p_ << "^" << v_ << ")";
    return os.str();
  }
  os << u_;
  if (v_ != 0) os << "*" << p_ << "^" << v_;
  os << " + O(" << p_ << "^" << abs_prec() << ")";
  return os.str();
}

PadicNumber PadicNumber::parse(std::int64_t p, const std::string& text) {
  // grammar: "0" | "O(p^k)" | "u[*p^v] + O(p^k)"
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
  if (s == "0") return zero(p);
  auto parse_int = [](const std::string& str, size_t& i) {
    bool negv = false;
    if (i < str.size() && (str[i] == '-' || str[i] == '+')) negv = str[i++] == '-';
    std::int64_t val = 0;
    size_t start = i;
    while (i < str.size() && std::isdigit(static_cast<unsigned char>(str[i])))
      val = val * 10 + (str[i++] - '0');
    if (i == start) throw std::invalid_argument("PadicNumber::parse: integer expected");
    return negv ? -val : val;
  };
  size_t i = 0;
  auto parse_big_o = [&]() {
    // at "O(p^k)"
    if (s.compare(i, 2, "O(") != 0) throw std::invalid_argument("PadicNumber::parse: bad O-term");
    i += 2;
    std::int64_t pp = parse_int(s, i);
    if (pp != p) throw std::invalid_argument("PadicNumber::parse: prime mismatch");
    if (i >= s.size() || s[i] != '^') throw std::invalid_argument("PadicNumber::parse: '^' expected");
    ++i;
    std::int64_t k = parse_int(s, i);
    if (i >= s.size() || s[i] != ')') throw std::invalid_argument("PadicNumber::parse: ')' expected");
    ++i;
    return k;
  };
  if (s[0] == 'O') {
    std::int64_t k = parse_big_o();
    if (i != s.size()) throw std::invalid_argument("PadicNumber::parse: trailing input");
    return zero_at(p, k);
  }
  std::int64_t u = parse_int(s, i);
  std::int64_t v = 0;
  if (i < s.size() && s[i] == '*') {
    ++i;
    std::int64_t pp = parse_int(s, i);
    if (pp != p) throw std::invalid_argument("PadicNumber::parse: prime mismatch");
    if (i >= s.size() || s[i] != '^') throw std::invalid_argument("PadicNumber::parse: '^' expected");
    ++i;
    v = parse_int(s, i);
  }
  if (s.compare(i, 1, "+") != 0) throw std::invalid_argument("PadicNumber::parse: '+ O(...)' expected");
  ++i;
  std::int64_t k = parse_big_o();
  if (i != s.size()) throw std::invalid_argument("PadicNumber::parse: trailing input");
  if (k <= v) return zero_at(p, k);
  return from_residue(p, v, u, static_cast<int>(k - v));
}

PadicNumber teichmuller(std::int64_t p, std::int64_t a, int rel) {
  a %= p;
  if (a < 0) a += p;
  if (a == 0) return PadicNumber::zero(p);
  if (p == 2) return PadicNumber::from_int(2, 1, rel);
  std::uint64_t m = pow_u64(static_cast<std::uint64_t>(p), static_cast<unsigned>(rel));
  std::uint64_t x = static_cast<std::uint64_t>(a);
  for (int i = 0; i < rel + 1; ++i) x = powmod_u64(x, static_cast<std::uint64_t>(p), m);
  return PadicNumber::from_parts(p, 0, x, rel);
}

PadicNumber log_unit1(const PadicNumber& x) {
  std::int64_t p = x.prime();
  if (p == 2) throw std::domain_error("log_unit1: p = 2 not supported here");
  PadicNumber y = sub(x, PadicNumber::from_int(p, 1));
  if (!y.is_zero_ish() && y.valuation() < 1)
    throw std::domain_error("log_unit1: argument not congruent to 1 mod p");
  std::int64_t target = x.abs_prec();
  PadicNumber acc = PadicNumber::zero_at(p, target);
  PadicNumber yk = y;
  for (std::int64_t k = 1;; ++k) {
    if (yk.is_zero_ish() || yk.valuation() - factorial_valuation(p, k) > target) break;
    PadicNumber term = mul(yk, PadicNumber::from_int(p, k).inv());
    if (k % 2 == 0) term = neg(term);
    acc = add(acc, term);
    yk = mul(yk, y);
    if (k > 4 * (target + 2)) break;
  }
  return acc;
}

PadicNumber exp_small(const PadicNumber& y) {
  std::int64_t p = y.prime();
  if (p == 2) throw std::domain_error("exp_small: p = 2 not supported here");
  if (!y.is_zero_ish() && y.valuation() < 1)
    throw std::domain_error("exp_small: argument valuation must be >= 1");
  std::int64_t target = y.abs_prec();
  PadicNumber acc = PadicNumber::from_int(p, 1);
  PadicNumber num = y;  // y^k / k!
  for (std::int64_t k = 1;; ++k) {
    if (num.is_zero_ish() || num.valuation() > target) break;
    acc = add(acc, num);
    num = mul(num, y);
    num = mul(num, PadicNumber::from_int(p, k + 1).inv());
    if (k > 4 * (target + 2)) break;
  }
  return acc;
}

PadicNumber pow_unit1(const PadicNumber& g, const PadicNumber& e) {
  return exp_small(mul(e, log_unit1(g)));
}

std::int64_t factorial_valuation(std::int64_t p, std::int64_t n) {
  std::int64_t s = 0;
  for (std::int64_t q = p; q <= n; q *= p) {
    s += n / q;
    if (q > n / p) break;
  }
  return s;
}

namespace {
// (valuation, unit residue mod p^digits, sign) of an exact nonzero integer
struct VU {
  std::int64_t v;
  std::uint64_t u;
};
VU split_int(std::int64_t p, std::int64_t n, std::uint64_t m) {
  bool negv = n < 0;
  std::uint64_t a = static_cast<std::uint64_t>(negv ? -n : n);
  std::int64_t v = 0;
  while (a % static_cast<std::uint64_t>(p) == 0) {
    a /= static_cast<std::uint64_t>(p);
    ++v;
  }
  std::uint64_t u = a % m;
  if (negv) u = (m - u) % m;
  return {v, u};
}
}  // namespace

PadicNumber padic_binomial(const PadicNumber& gamma, std::int64_t n) {
  std::int64_t p = gamma.prime();
  if (n < 0) throw std::invalid_argument("padic_binomial: n must be >= 0");
  if (n == 0) return PadicNumber::from_int(p, 1, gamma.is_zero_ish() ? kDefaultPrec : gamma.rel_prec());
  if (gamma.is_zero_ish()) {
    // binom(0,n) = 0 exactly only for exact zero; else track the bound
    if (gamma.is_exact_zero()) return PadicNumber::zero(p);
  } else if (gamma.valuation() < 0) {
    throw std::domain_error("padic_binomial: gamma must lie in Z_p");
  }
  if (n == 1) return gamma;

  std::int64_t abs_in = std::min<std::int64_t>(gamma.abs_prec(), max_exp_for_prime(p) - 2);
  int w = static_cast<int>(abs_in);
  if (w <= 0) return PadicNumber::zero_at(p, 0);
  std::uint64_t m = pow_u64(static_cast<std::uint64_t>(p), static_cast<unsigned>(w));
  // exact integer representative of gamma mod p^w
  std::uint64_t g = gamma.is_zero_ish() ? 0 : gamma.residue_above(0, w);

  std::int64_t loss = 1;
  for (std::int64_t q = p; q <= n; q *= p) {
    ++loss;
    if (q > n / p) break;
  }
  std::int64_t abs_out = abs_in - loss;

  std::int64_t v_num = 0;
  std::uint64_t u_num = 1;
  for (std::int64_t j = 0; j < n; ++j) {
    std::int64_t factor = static_cast<std::int64_t>(g) - j;
    if (factor == 0) {
      // representative hits j exactly: zero, certified by the continuity bound
      return PadicNumber::zero_at(p, abs_out);
    }
    VU f = split_int(p, factor, m);
    v_num += f.v;
    u_num = mulmod_u64(u_num, f.u, m);
  }
  std::int64_t v_fact = factorial_valuation(p, n);
  std::uint64_t u_fact = 1;
  for (std::int64_t k = 2; k <= n; ++k) {
    VU f = split_int(p, k, m);
    u_fact = mulmod_u64(u_fact, f.u, m);
  }
  std::uint64_t u_res = mulmod_u64(u_num, invmod_pp(u_fact, p, w), m);
  std::int64_t v_res = v_num - v_fact;

  // abs_out is the modulus of continuity of binom(., n): gamma known mod p^K
  // determines the value mod p^{K - floor(log_p n) - 1}
  if (abs_out <= v_res) return PadicNumber::zero_at(p, abs_out);
  PadicNumber out = PadicNumber::from_parts(p, v_res, u_res, w);
  return out.with_abs_prec(abs_out);
}

PadicNumber padic_binomial_general(const PadicNumber& gamma, std::int64_t n) {
  std::int64_t p = gamma.prime();
  if (n < 0) throw std::invalid_argument("padic_binomial_general: n must be >= 0");
  if (!gamma.is_zero_ish() && gamma.valuation() >= 0) return padic_binomial(gamma, n);
  PadicNumber acc = PadicNumber::from_int(p, 1);
  for (std::int64_t j = 0; j < n; ++j) {
    acc = mul(acc, sub(gamma, PadicNumber::from_int(p, j)));
    acc = mul(acc, PadicNumber::from_int(p, j + 1).inv());
  }
  return acc;
}

PadicNumber int_binomial(std::int64_t p, std::int64_t n, std::int64_t k, int rel) {
  if (k < 0 || k > n) return PadicNumber::zero(p);
  if (k == 0 || k == n) return PadicNumber::from_int(p, 1, rel);
  int w = std::min(rel + static_cast<int>(factorial_valuation(p, n)), max_exp_for_prime(p) - 1);
  std::uint64_t m = pow_u64(static_cast<std::uint64_t>(p), static_cast<unsigned>(w));
  std::int64_t v = factorial_valuation(p, n) - factorial_valuation(p, k) -
                   factorial_valuation(p, n - k);
  std::uint64_t num = 1, den = 1;
  for (std::int64_t j = 1; j <= k; ++j) {
    VU a = split_int(p, n - k + j, m);
    VU b = split_int(p, j, m);
    num = mulmod_u64(num, a.u, m);
    den = mulmod_u64(den, b.u, m);
  }
  std::uint64_t u = mulmod_u64(num, invmod_pp(den, p, w), m);
  return PadicNumber::from_parts(p, v, u, w).with_rel_prec(rel);
}

}  // namespace phigamma
