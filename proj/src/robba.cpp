#include "phigamma/robba.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include <json.hpp>

namespace phigamma {

void require_odd_prime(std::int64_t p, bool allow_p2) {
  if (p == 2 && !allow_p2)
    throw std::domain_error("p = 2 requires the Gamma-torsion convention; pass allow_p2");
  if (p < 2) throw std::invalid_argument("prime must be >= 2");
}

void RobbaElement::normalize() {
  // trim exact zeros at the support bound, and at the top when tail is exact
  size_t drop = 0;
  while (drop < c_.size() && c_[drop].is_exact_zero()) ++drop;
  if (drop) {
    c_.erase(c_.begin(), c_.begin() + static_cast<std::ptrdiff_t>(drop));
    lo_ += static_cast<std::int64_t>(drop);
  }
  if (exact_) {
    while (!c_.empty() && c_.back().is_exact_zero()) {
      c_.pop_back();
      --hi_;
    }
  }
  if (c_.empty()) {
    if (exact_) {
      lo_ = 0;
      hi_ = -1;
    }
  }
}

RobbaElement RobbaElement::zero(std::int64_t p) {
  RobbaElement z;
  z.p_ = p;
  return z;
}

RobbaElement RobbaElement::one(std::int64_t p) { return monomial_int(p, 0, 1); }

RobbaElement RobbaElement::monomial(std::int64_t p, std::int64_t n, const PadicNumber& c) {
  RobbaElement f;
  f.p_ = p;
  f.lo_ = n;
  f.hi_ = n;
  f.exact_ = true;
  f.c_ = {c};
  f.normalize();
  return f;
}

RobbaElement RobbaElement::monomial_int(std::int64_t p, std::int64_t n, std::int64_t c) {
  return monomial(p, n, PadicNumber::from_int(p, c));
}

RobbaElement RobbaElement::one_plus_T(std::int64_t p) {
  return from_coeffs(p, 0, {PadicNumber::from_int(p, 1), PadicNumber::from_int(p, 1)}, true);
}

RobbaElement RobbaElement::from_coeffs(std::int64_t p, std::int64_t lo,
                                       std::vector<PadicNumber> coeffs, bool tail_exact) {
  RobbaElement f;
  f.p_ = p;
  f.lo_ = lo;
  f.hi_ = lo + static_cast<std::int64_t>(coeffs.size()) - 1;
  f.exact_ = tail_exact;
  f.c_ = std::move(coeffs);
  f.normalize();
  return f;
}

void RobbaElement::set_annulus(int n0) {
  if (n0 < 1) throw std::invalid_argument("annulus tag must be >= 1");
  for (std::int64_t n = lo_; n < 0 && n <= hi_; ++n) {
    std::int64_t k = -n;
    std::int64_t need = (k + n0 - 1) / n0;
    const PadicNumber& a = c_[static_cast<size_t>(n - lo_)];
    std::int64_t v = a.is_zero_ish() ? a.abs_prec() : a.valuation();
    if (v < need)
      throw std::invalid_argument("annulus constraint v(a_{-k}) >= ceil(k/n0) violated");
  }
  annulus_ = n0;
}

PadicNumber RobbaElement::coeff(std::int64_t n) const {
  if (n < lo_ || n > hi_) {
    if (n < lo_ || exact_) return PadicNumber::zero(p_);
    throw std::out_of_range("RobbaElement::coeff: coefficient above the known window");
  }
  return c_[static_cast<size_t>(n - lo_)];
}

bool RobbaElement::coeff_known(std::int64_t n) const { return n < lo_ || n <= hi_ || exact_; }

bool RobbaElement::is_zero_ish() const {
  for (const auto& a : c_)
    if (!a.is_zero_ish()) return false;
  return true;
}

std::int64_t RobbaElement::height() const {
  std::int64_t h = 0;
  for (const auto& a : c_)
    if (!a.is_zero_ish()) h = std::min(h, a.valuation());
  return h;
}

std::int64_t RobbaElement::min_abs_prec() const {
  std::int64_t m = kValInf;
  for (const auto& a : c_) m = std::min(m, a.abs_prec());
  return m;
}

RobbaElement RobbaElement::truncated(std::int64_t new_hi) const {
  if (new_hi >= hi_ && !exact_) return *this;
  RobbaElement f = *this;
  if (new_hi < hi_) {
    f.c_.resize(static_cast<size_t>(std::max<std::int64_t>(0, new_hi - lo_ + 1)));
    f.hi_ = new_hi;
    f.exact_ = false;
  } else if (exact_ && new_hi > hi_) {
    f.c_.resize(static_cast<size_t>(new_hi - lo_ + 1), PadicNumber::zero(p_));
    f.hi_ = new_hi;
  }
  f.normalize();
  return f;
}

RobbaElement RobbaElement::with_tail_unknown() const {
  RobbaElement f = *this;
  f.exact_ = false;
  return f;
}

RobbaElement RobbaElement::padded(std::int64_t new_hi) const {
  RobbaElement f = *this;
  if (new_hi > hi_) {
    if (!exact_) throw PrecisionError("RobbaElement::padded: tail is unknown");
    f.c_.resize(static_cast<size_t>(new_hi - lo_ + 1), PadicNumber::zero(p_));
    f.hi_ = new_hi;
  }
  f.exact_ = false;
  return f;
}

RobbaElement RobbaElement::shift(std::int64_t k) const {
  RobbaElement f = *this;
  f.lo_ += k;
  f.hi_ += k;
  f.annulus_.reset();
  return f;
}

RobbaElement RobbaElement::scalar_mul(const PadicNumber& s) const {
  RobbaElement f = *this;
  for (auto& a : f.c_) a = mul(a, s);
  f.annulus_.reset();
  f.normalize();
  return f;
}

RobbaElement add(const RobbaElement& f, const RobbaElement& g) {
  if (f.p_ == 0) return g;
  if (g.p_ == 0) return f;
  if (f.p_ != g.p_) throw std::invalid_argument("RobbaElement: prime mismatch");
  std::int64_t lo = std::min(f.lo_, g.lo_);
  std::int64_t hi;
  bool exact = f.exact_ && g.exact_;
  if (exact)
    hi = std::max(f.hi_, g.hi_);
  else if (f.exact_)
    hi = g.hi_;
  else if (g.exact_)
    hi = f.hi_;
  else
    hi = std::min(f.hi_, g.hi_);
  if (hi < lo) return RobbaElement::from_coeffs(f.p_, lo, {}, exact);
  std::vector<PadicNumber> c(static_cast<size_t>(hi - lo + 1), PadicNumber::zero(f.p_));
  for (std::int64_t n = lo; n <= hi; ++n)
    c[static_cast<size_t>(n - lo)] = add(f.coeff(n), g.coeff(n));
  return RobbaElement::from_coeffs(f.p_, lo, std::move(c), exact);
}

RobbaElement neg(const RobbaElement& f) {
  RobbaElement g = f;
  return g.scalar_mul(PadicNumber::from_int(f.prime(), -1));
}

RobbaElement sub(const RobbaElement& f, const RobbaElement& g) { return add(f, neg(g)); }

RobbaElement mul(const RobbaElement& f, const RobbaElement& g) {
  if (f.p_ == 0 || g.p_ == 0) {
    // exact-zero wildcard
    return f.p_ == 0 ? RobbaElement::zero(g.p_) : RobbaElement::zero(f.p_);
  }
  if (f.p_ != g.p_) throw std::invalid_argument("RobbaElement: prime mismatch");
  if (f.window_empty() || g.window_empty()) {
    if (f.exact_ && f.c_.empty()) return RobbaElement::zero(f.p_);
    if (g.exact_ && g.c_.empty()) return RobbaElement::zero(f.p_);
  }
  std::int64_t lo = f.lo_ + g.lo_;
  std::int64_t hi;
  bool exact = f.exact_ && g.exact_;
  if (exact)
    hi = f.hi_ + g.hi_;
  else if (f.exact_)
    hi = g.hi_ + f.lo_;
  else if (g.exact_)
    hi = f.hi_ + g.lo_;
  else
    hi = std::min(f.hi_ + g.lo_, g.hi_ + f.lo_);
  if (hi < lo) throw PrecisionError("RobbaElement::mul: empty product window");
  std::vector<PadicNumber> c(static_cast<size_t>(hi - lo + 1), PadicNumber::zero(f.p_));
  for (std::int64_t i = f.lo_; i <= f.hi_; ++i) {
    const PadicNumber& a = f.c_[static_cast<size_t>(i - f.lo_)];
    if (a.is_exact_zero()) continue;
    std::int64_t jmax = std::min(g.hi_, hi - i);
    for (std::int64_t j = g.lo_; j <= jmax; ++j) {
      const PadicNumber& b = g.c_[static_cast<size_t>(j - g.lo_)];
      if (b.is_exact_zero()) continue;
      size_t k = static_cast<size_t>(i + j - lo);
      c[k] = add(c[k], mul(a, b));
    }
  }
  return RobbaElement::from_coeffs(f.p_, lo, std::move(c), exact);
}

bool approx_equal(const RobbaElement& f, const RobbaElement& g) {
  return sub(f, g).is_zero_ish();
}

RobbaElement unit_inverse(const RobbaElement& f, std::optional<std::int64_t> out_hi) {
  if (f.lo() < 0) throw std::domain_error("unit_inverse: m_lo must be 0");
  PadicNumber a0 = f.coeff(0);
  if (!a0.is_unit()) throw std::domain_error("unit_inverse: constant term is not a unit");
  std::int64_t hi = out_hi.value_or(f.hi());
  if (!f.tail_exact() && hi > f.hi()) hi = f.hi();
  PadicNumber a0inv = a0.inv();
  std::vector<PadicNumber> g(static_cast<size_t>(hi + 1), PadicNumber::zero(f.prime()));
  g[0] = a0inv;
  for (std::int64_t n = 1; n <= hi; ++n) {
    PadicNumber s = PadicNumber::zero(f.prime());
    for (std::int64_t k = 1; k <= n; ++k)
      s = add(s, mul(f.coeff(k), g[static_cast<size_t>(n - k)]));
    g[static_cast<size_t>(n)] = neg(mul(a0inv, s));
  }
  return RobbaElement::from_coeffs(f.prime(), 0, std::move(g), false);
}

RobbaElement phi_of_T(std::int64_t p) {
  std::vector<PadicNumber> c;
  c.push_back(PadicNumber::zero(p));
  for (std::int64_t k = 1; k <= p; ++k) c.push_back(int_binomial(p, p, k));
  return RobbaElement::from_coeffs(p, 0, std::move(c), true);
}

RobbaElement phi_of_T_pow(std::int64_t p, std::int64_t k) {
  if (k < 0) throw std::invalid_argument("phi_of_T_pow: k must be >= 0");
  RobbaElement acc = RobbaElement::one(p);
  RobbaElement base = phi_of_T(p);
  for (std::int64_t i = 0; i < k; ++i) acc = mul(acc, base);
  return acc;
}

RobbaElement phi(const RobbaElement& f) {
  if (f.lo() < 0) throw std::domain_error("phi: negative window rejected (use the Colmez route)");
  const std::int64_t p = f.prime();
  RobbaElement acc = RobbaElement::zero(p);
  RobbaElement pw = RobbaElement::one(p);
  const RobbaElement base = phi_of_T(p);
  for (std::int64_t n = 0; n <= f.hi(); ++n) {
    if (n >= f.lo()) {
      PadicNumber a = f.coeff(n);
      if (!a.is_exact_zero()) acc = add(acc, pw.scalar_mul(a));
    }
    if (n < f.hi()) {
      pw = mul(pw, base);
      if (!f.tail_exact()) pw = pw.truncated(f.hi());
    }
  }
  // a level-M truncation determines the image up to level M
  if (!f.tail_exact()) acc = acc.truncated(f.hi()).with_tail_unknown();
  return acc;
}

RobbaElement phi_laurent(const RobbaElement& f) {
  if (f.lo() >= 0) return phi(f);
  const std::int64_t p = f.prime();
  const std::int64_t L = -f.lo();
  // phi(T)^{-1} = T^{-1} p^{-1} * unit_inverse(phi(T)/(pT))
  RobbaElement w = phi_of_T(p).shift(-1).scalar_mul(PadicNumber::from_int(p, p).inv());
  std::int64_t len = f.hi() - f.lo();
  RobbaElement winv = unit_inverse(w, len);
  RobbaElement phiT_inv = winv.shift(-1).scalar_mul(PadicNumber::from_int(p, p).inv());
  RobbaElement pospart = phi(f.shift(L));  // f * T^L has m_lo = 0
  RobbaElement acc = pospart;
  for (std::int64_t i = 0; i < L; ++i) acc = mul(acc, phiT_inv);
  return acc;
}

RobbaElement gamma_act(const PadicNumber& gamma, const RobbaElement& f,
                       std::optional<std::int64_t> out_hi) {
  const std::int64_t p = f.prime();
  if (!gamma.is_unit()) throw std::domain_error("gamma_act: gamma must be a unit");
  std::int64_t hi = out_hi.value_or(f.hi());
  if (!f.tail_exact() && hi > f.hi()) hi = f.hi();
  if (f.window_empty() && f.tail_exact()) return RobbaElement::zero(p);
  std::int64_t len = std::max<std::int64_t>(0, hi - f.lo());
  // u = gamma(T)/T, unit constant term gamma
  std::vector<PadicNumber> uc;
  for (std::int64_t k = 0; k <= len; ++k) uc.push_back(padic_binomial(gamma, k + 1));
  RobbaElement u = RobbaElement::from_coeffs(p, 0, std::move(uc), false);
  RobbaElement acc = RobbaElement::zero(p);
  // nonnegative powers
  RobbaElement pw = RobbaElement::one(p);
  for (std::int64_t n = 0; n <= f.hi(); ++n) {
    if (n >= f.lo()) {
      PadicNumber a = f.coeff(n);
      if (!a.is_exact_zero()) acc = add(acc, pw.shift(n).scalar_mul(a).truncated(hi));
    }
    if (n < f.hi()) pw = mul(pw, u).truncated(len);
  }
  if (f.lo() < 0) {
    RobbaElement uinv = unit_inverse(u, len);
    RobbaElement pwneg = uinv;
    for (std::int64_t n = -1; n >= f.lo(); --n) {
      PadicNumber a = f.coeff(n);
      if (!a.is_exact_zero()) acc = add(acc, pwneg.shift(n).scalar_mul(a).truncated(hi));
      if (n > f.lo()) pwneg = mul(pwneg, uinv).truncated(len);
    }
  }
  // materialize the full target window (an exact accumulator may have been
  // trimmed; its missing coefficients are known zeros)
  acc = acc.truncated(hi);
  std::int64_t lo_out = std::min(f.lo(), acc.lo());
  std::vector<PadicNumber> cs;
  for (std::int64_t n = lo_out; n <= hi; ++n)
    cs.push_back(acc.coeff_known(n) ? acc.coeff(n) : PadicNumber::zero_at(p, 0));
  return RobbaElement::from_coeffs(p, lo_out, std::move(cs), false);
}

namespace {

std::int64_t floordiv(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b, r = a % b;
  return (r != 0 && ((r < 0) != (b < 0))) ? q - 1 : q;
}

// v_p of the T^j coefficient of psi(T^n) is at least tail_gain(p, n, j); the
// alternating binomial sums behind psi make the low-degree image p-adically
// small.  Checked empirically in the test suite for n up to 150.
std::int64_t psi_tail_gain(std::int64_t p, std::int64_t n, std::int64_t j) {
  std::int64_t num = n - p * j;
  if (num <= 0) return 0;
  std::int64_t g = (num + p - 2) / (p - 1) - 1;
  return std::max<std::int64_t>(0, g);
}

// S-basis slices of f (m_lo >= 0): component i of f = sum_i S^i ftilde_i(S^p),
// S = 1+T.  Returns the T-basis coefficients of f_i = ftilde_i(1+T).
std::vector<std::vector<PadicNumber>> stride_components(const RobbaElement& f) {
  const std::int64_t p = f.prime();
  const std::int64_t H = f.hi();
  std::vector<PadicNumber> b(static_cast<size_t>(H + 1), PadicNumber::zero(p));
  for (std::int64_t j = 0; j <= H; ++j) {
    PadicNumber s = PadicNumber::zero(p);
    for (std::int64_t n = std::max<std::int64_t>(j, f.lo()); n <= H; ++n) {
      PadicNumber a = f.coeff(n);
      if (a.is_exact_zero()) continue;
      PadicNumber w = int_binomial(p, n, j);
      if ((n - j) % 2) w = neg(w);
      s = add(s, mul(a, w));
    }
    b[static_cast<size_t>(j)] = s;
  }
  std::vector<std::vector<PadicNumber>> out;
  for (std::int64_t i = 0; i < p; ++i) {
    std::int64_t mmax = i <= H ? (H - i) / p : -1;
    std::vector<PadicNumber> comp(static_cast<size_t>(std::max<std::int64_t>(0, mmax + 1)),
                                  PadicNumber::zero(p));
    // back-transform ftilde_i(1+T): a'_k = sum_m c_m binom(m, k)
    for (std::int64_t k = 0; k <= mmax; ++k) {
      PadicNumber s = PadicNumber::zero(p);
      for (std::int64_t m = k; m <= mmax; ++m) {
        const PadicNumber& cm = b[static_cast<size_t>(i + p * m)];
        if (cm.is_exact_zero()) continue;
        s = add(s, mul(cm, int_binomial(p, m, k)));
      }
      comp[static_cast<size_t>(k)] = s;
    }
    out.push_back(std::move(comp));
  }
  return out;
}

}  // namespace

std::vector<RobbaElement> psi_decompose(const RobbaElement& f) {
  const std::int64_t p = f.prime();
  require_odd_prime(p, true);
  if (f.window_empty() && !f.tail_exact())
    throw PrecisionError("psi: empty window");
  const std::int64_t L = std::max<std::int64_t>(0, -f.lo());
  RobbaElement g = L > 0 ? mul(f, phi_of_T_pow(p, L)) : f;
  const std::int64_t H = std::max<std::int64_t>(g.hi(), 0);
  auto comps = stride_components(g);
  std::vector<RobbaElement> out;
  const std::int64_t hi_ladder = floordiv(H - (p - 1), p) - L;
  // the unknown tail of g inherits f's tail height (phi(T)^L is integral)
  const std::int64_t hgt = std::min(g.height(), f.height());
  for (std::int64_t i = 0; i < p; ++i) {
    RobbaElement fi = RobbaElement::from_coeffs(p, 0, std::move(comps[static_cast<size_t>(i)]),
                                                g.tail_exact())
                          .shift(-L);
    if (!g.tail_exact()) {
      if (hi_ladder < -L) throw PrecisionError("psi: window too small for the ladder");
      fi = fi.truncated(hi_ladder);
      // degrade boundary coefficients by the unknown-tail bound
      std::vector<PadicNumber> cc;
      for (std::int64_t n = fi.lo(); n <= fi.hi(); ++n) {
        std::int64_t bound = hgt + psi_tail_gain(p, H + 1, n + L);
        cc.push_back(fi.coeff(n).with_abs_prec(bound));
      }
      fi = RobbaElement::from_coeffs(p, fi.lo(), std::move(cc), false);
    }
    out.push_back(std::move(fi));
  }
  return out;
}

RobbaElement psi(const RobbaElement& f) { return psi_decompose(f)[0]; }

PadicNumber residue(const RobbaElement& f) {
  const std::int64_t p = f.prime();
  if (f.lo() >= 0) return PadicNumber::zero(p);
  if (!f.coeff_known(-1)) throw PrecisionError("residue: window does not reach T^{-1}");
  PadicNumber s = PadicNumber::zero(p);
  for (std::int64_t n = f.lo(); n <= -1; ++n) {
    PadicNumber a = f.coeff(n);
    if (a.is_exact_zero()) continue;
    if ((-1 - n) % 2) a = neg(a);
    s = add(s, a);
  }
  return s;
}

RobbaElement log_one_plus_T(std::int64_t p, std::int64_t hi) {
  if (hi < 1) throw std::invalid_argument("log_one_plus_T: window must reach T^1");
  std::vector<PadicNumber> c;
  for (std::int64_t k = 1; k <= hi; ++k) {
    PadicNumber term = PadicNumber::from_ratio(p, (k % 2) ? 1 : -1, k);
    c.push_back(term);
  }
  return RobbaElement::from_coeffs(p, 1, std::move(c), false);
}

RobbaElement g_gamma(const PadicNumber& gamma, const RobbaElement& x) {
  RobbaElement gx = gamma_act(gamma, x);
  RobbaElement diff = sub(gx, x);
  return add(x.shift(1), mul(RobbaElement::one_plus_T(x.prime()), diff));
}

GaussNorm gauss_norm(const RobbaElement& f, std::int64_t q_num, std::int64_t q_den) {
  if (q_den < 1 || q_num < 0) throw std::invalid_argument("gauss_norm: q must be >= 0");
  if (f.lo() < 0 && !f.annulus().has_value() && q_num > 0)
    throw std::domain_error("gauss_norm: Laurent element needs an annulus tag for q > 0");
  GaussNorm g;
  g.q_num = q_num;
  g.q_den = q_den;
  for (std::int64_t n = f.lo(); n <= f.hi(); ++n) {
    PadicNumber a = f.coeff(n);
    std::int64_t v = a.is_zero_ish() ? a.abs_prec() : a.valuation();
    if (a.is_exact_zero()) continue;
    std::int64_t e = -(v * q_den + q_num * n);  // log_p |a_n| r^n scaled by q_den
    if (g.is_zero || e > g.exp_num) {
      g.is_zero = false;
      g.exp_num = e;
    }
  }
  return g;
}

bool gauss_leq(const GaussNorm& a, const GaussNorm& b) {
  if (a.is_zero) return true;
  if (b.is_zero) return false;
  // compare p^{a.exp/a.den} <= p^{b.exp/b.den}
  return a.exp_num * b.q_den <= b.exp_num * a.q_den;
}

RobbaElement neumann_solve_phi(const PadicNumber& lambda, const RobbaElement& y,
                               std::int64_t shift) {
  const std::int64_t p = y.prime();
  if (y.tail_exact() && y.window_empty()) return y;  // exact zero
  if (y.lo() < shift)
    throw std::domain_error("neumann_solve_phi: y not supported in T^shift R+");
  if (lambda.is_zero_ish()) return y;
  std::int64_t contraction = lambda.valuation() + shift;
  if (contraction <= 0)
    throw std::domain_error("neumann_solve_phi: contraction |lambda p^shift| < 1 violated");
  std::int64_t target = y.min_abs_prec();
  if (target == kValInf) target = kDefaultPrec;
  std::int64_t kmax = target / contraction + 2;
  RobbaElement x = y;
  RobbaElement term = y;
  for (std::int64_t k = 1; k <= kmax; ++k) {
    term = phi(term.with_tail_unknown()).scalar_mul(lambda);
    if (term.is_zero_ish()) break;
    x = add(x, term);
  }
  return x;
}

RobbaElement psi_surjectivity_solve(const PadicNumber& lambda, const RobbaElement& y) {
  const std::int64_t p = y.prime();
  if (y.lo() < 0) throw std::domain_error("psi_surjectivity_solve: y must lie in R+");
  if (lambda.is_zero_ish())
    throw std::domain_error("psi_surjectivity_solve: lambda must be nonzero");
  const std::int64_t nstar = std::max<std::int64_t>(1, lambda.valuation() + 1);
  if (y.hi() < nstar)
    throw PrecisionError("psi_surjectivity_solve: window exhausted below the tail threshold");
  PadicNumber lam_inv = lambda.inv();
  RobbaElement x = RobbaElement::zero(p);
  RobbaElement r = y;
  for (std::int64_t i = 0; i < nstar; ++i) {
    PadicNumber c = r.coeff(i);
    if (c.is_zero_ish()) continue;
    // (1 - lambda psi)(lambda^{-1} T phi(T^i)) = T^i + lambda^{-1} T phi(T)^i
    RobbaElement tphiti = phi_of_T_pow(p, i).shift(1);
    x = add(x, tphiti.scalar_mul(mul(c, lam_inv)));
    RobbaElement consumed =
        add(RobbaElement::monomial(p, i, c), tphiti.scalar_mul(mul(c, lam_inv)));
    r = sub(r, consumed);
  }
  // remaining target sits in T^nstar R+; solve with the phi-Neumann series
  // x_t = -lambda^{-1} sum_k lambda^{-k} phi^{k+1}(h)
  std::vector<PadicNumber> tail;
  for (std::int64_t n = nstar; n <= r.hi(); ++n) tail.push_back(r.coeff(n));
  RobbaElement h = RobbaElement::from_coeffs(p, nstar, std::move(tail), r.tail_exact());
  if (!h.is_zero_ish()) {
    std::int64_t contraction = nstar - lambda.valuation();
    std::int64_t target = y.min_abs_prec();
    if (target == kValInf) target = kDefaultPrec;
    std::int64_t kmax = target / std::max<std::int64_t>(1, contraction) + 2;
    RobbaElement term = phi(h.with_tail_unknown());
    RobbaElement acc = term;
    for (std::int64_t k = 1; k <= kmax; ++k) {
      term = phi(term).scalar_mul(lam_inv);
      if (term.is_zero_ish()) break;
      acc = add(acc, term);
    }
    x = sub(x, acc.scalar_mul(lam_inv));
  }
  return x;
}

std::string RobbaElement::to_string() const {
  std::ostringstream os;
  bool first = true;
  for (std::int64_t n = lo_; n <= hi_; ++n) {
    const PadicNumber& a = c_[static_cast<size_t>(n - lo_)];
    if (a.is_zero_ish()) continue;
    if (!first) os << " + ";
    first = false;
    if (a.valuation() >= 0 && a.abs_prec() < 18) {
      os << a.residue_above(0, static_cast<int>(a.abs_prec()));
    } else if (a.valuation() >= 0 && a.valuation() < 12) {
      os << a.residue_above(0, 18);
    } else {
      os << a.unit() << "*p^" << a.valuation();
    }
    if (n != 0) os << "*T^" << n;
  }
  if (first) os << "0";
  std::int64_t prec = min_abs_prec();
  os << " + O(";
  if (!exact_) os << "T^" << (hi_ + 1) << ", ";
  os << "p^" << (prec == kValInf ? kDefaultPrec : prec) << ")";
  return os.str();
}

RobbaElement RobbaElement::parse(std::int64_t p, const std::string& text) {
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
  size_t i = 0;
  auto parse_int = [&](bool* ok = nullptr) -> std::int64_t {
    bool negv = false;
    size_t save = i;
    if (i < s.size() && (s[i] == '-' || s[i] == '+')) negv = s[i++] == '-';
    std::int64_t val = 0;
    size_t start = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
      val = val * 10 + (s[i++] - '0');
    if (i == start) {
      if (ok) {
        *ok = false;
        i = save;
        return 0;
      }
      throw std::invalid_argument("RobbaElement::parse: integer expected");
    }
    if (ok) *ok = true;
    return negv ? -val : val;
  };
  struct Term {
    std::int64_t n;
    std::int64_t c;
    std::int64_t pexp;
  };
  std::vector<Term> terms;
  std::optional<std::int64_t> o_hi;
  std::optional<std::int64_t> o_prec;
  bool neg_next = false;
  auto at_prime_symbol = [&]() {
    if (i >= s.size()) return false;
    if (s[i] == 'p' && i + 1 < s.size() && s[i + 1] == '^') return true;
    return false;
  };
  while (i < s.size()) {
    if (s[i] == '+') {
      ++i;
      neg_next = false;
      continue;
    }
    if (s[i] == '-') {
      ++i;
      neg_next = true;
      continue;
    }
    if (s.compare(i, 2, "O(") == 0) {
      i += 2;
      while (true) {
        if (s[i] == 'T') {
          ++i;
          if (s[i] != '^') throw std::invalid_argument("RobbaElement::parse: '^' after T");
          ++i;
          o_hi = parse_int() - 1;
        } else if (at_prime_symbol()) {
          i += 2;
          o_prec = parse_int();
        } else {
          std::int64_t pp = parse_int();
          if (pp != p) throw std::invalid_argument("RobbaElement::parse: prime mismatch");
          if (s[i] != '^') throw std::invalid_argument("RobbaElement::parse: '^' after p");
          ++i;
          o_prec = parse_int();
        }
        if (s[i] == ',') {
          ++i;
          continue;
        }
        if (s[i] == ')') {
          ++i;
          break;
        }
        throw std::invalid_argument("RobbaElement::parse: bad O-term");
      }
      continue;
    }
    // term: coeff [*p^v] [*T^n], any piece optional but not all absent
    std::int64_t coeff = 1;
    std::int64_t pexp = 0;
    std::int64_t n = 0;
    bool saw = false;
    while (i < s.size() && s[i] != '+' && s[i] != '-') {
      if (s[i] == '*') {
        ++i;
        continue;
      }
      if (std::isdigit(static_cast<unsigned char>(s[i]))) {
        coeff = parse_int();
        saw = true;
        continue;
      }
      if (at_prime_symbol()) {
        i += 2;
        pexp = parse_int();
        saw = true;
        continue;
      }
      if (s[i] == 'T') {
        ++i;
        n = 1;
        if (i < s.size() && s[i] == '^') {
          ++i;
          n = parse_int();
        }
        saw = true;
        continue;
      }
      throw std::invalid_argument("RobbaElement::parse: unexpected token");
    }
    if (!saw) throw std::invalid_argument("RobbaElement::parse: empty term");
    terms.push_back({n, neg_next ? -coeff : coeff, pexp});
    neg_next = false;
  }
  std::int64_t lo = 0, hi = -1;
  for (const auto& t : terms) {
    lo = std::min(lo, t.n);
    hi = std::max(hi, t.n);
  }
  if (o_hi) hi = std::max(hi, *o_hi);
  int rel = static_cast<int>(o_prec.value_or(kDefaultPrec));
  std::vector<PadicNumber> c(static_cast<size_t>(std::max<std::int64_t>(0, hi - lo + 1)),
                             PadicNumber::zero_at(p, rel));
  if (!o_prec && !o_hi)
    for (auto& a : c) a = PadicNumber::zero(p);
  for (const auto& t : terms) {
    size_t k = static_cast<size_t>(t.n - lo);
    c[k] = add(c[k], PadicNumber::from_int(p, t.c, rel).mul_pow_p(t.pexp));
  }
  return from_coeffs(p, lo, std::move(c), !o_hi.has_value());
}

std::string RobbaElement::to_json() const {
  nlohmann::json j;
  j["p"] = p_;
  j["m_lo"] = lo_;
  j["m_hi"] = hi_;
  j["exact"] = exact_;
  if (annulus_) j["annulus"] = *annulus_;
  nlohmann::json arr = nlohmann::json::array();
  for (std::int64_t n = lo_; n <= hi_; ++n) {
    const PadicNumber& a = c_[static_cast<size_t>(n - lo_)];
    nlohmann::json e;
    e["n"] = n;
    if (a.is_exact_zero()) {
      e["zero"] = true;
    } else if (a.is_zero_ish()) {
      e["zero_at"] = a.abs_prec();
    } else {
      e["v"] = a.valuation();
      e["u"] = a.unit();
      e["r"] = a.rel_prec();
    }
    arr.push_back(e);
  }
  j["coeffs"] = arr;
  return j.dump();
}

RobbaElement RobbaElement::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  std::int64_t p = j.at("p").get<std::int64_t>();
  std::int64_t lo = j.at("m_lo").get<std::int64_t>();
  std::int64_t hi = j.at("m_hi").get<std::int64_t>();
  bool exact = j.value("exact", false);
  std::vector<PadicNumber> c(static_cast<size_t>(std::max<std::int64_t>(0, hi - lo + 1)),
                             PadicNumber::zero(p));
  for (const auto& e : j.at("coeffs")) {
    std::int64_t n = e.at("n").get<std::int64_t>();
    PadicNumber a;
    if (e.contains("zero"))
      a = PadicNumber::zero(p);
    else if (e.contains("zero_at"))
      a = PadicNumber::zero_at(p, e.at("zero_at").get<std::int64_t>());
    else
      a = PadicNumber::from_parts(p, e.at("v").get<std::int64_t>(),
                                  e.at("u").get<std::uint64_t>(), e.at("r").get<int>());
    c[static_cast<size_t>(n - lo)] = a;
  }
  RobbaElement f = from_coeffs(p, lo, std::move(c), exact);
  if (j.contains("annulus")) f.set_annulus(j.at("annulus").get<int>());
  return f;
}

}  // namespace phigamma
