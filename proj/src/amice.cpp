#include "phigamma/amice.hpp"

#include <algorithm>

#include <json.hpp>

#include "phigamma/json_util.hpp"

namespace phigamma {

PadicNumber factorial_padic(std::int64_t p, std::int64_t m, int rel) {
  PadicNumber acc = PadicNumber::from_int(p, 1, rel);
  for (std::int64_t k = 2; k <= m; ++k) acc = mul(acc, PadicNumber::from_int(p, k, rel));
  return acc;
}

void LAFunction::normalize() {
  while (!poly_.empty() && poly_.back().is_exact_zero()) poly_.pop_back();
  if (exact_)
    while (!mahler_.empty() && mahler_.back().is_exact_zero()) mahler_.pop_back();
}

LAFunction LAFunction::zero(std::int64_t p, int h) {
  LAFunction f;
  f.p_ = p;
  f.h_ = h;
  return f;
}

LAFunction LAFunction::constant(std::int64_t p, const PadicNumber& c, int h) {
  LAFunction f = zero(p, h);
  f.mahler_ = {c};
  f.normalize();
  return f;
}

LAFunction LAFunction::monomial(std::int64_t p, std::int64_t i, const PadicNumber& c, int h) {
  LAFunction f = zero(p, h);
  f.poly_.assign(static_cast<size_t>(i + 1), PadicNumber::zero(p));
  f.poly_[static_cast<size_t>(i)] = c;
  f.normalize();
  return f;
}

LAFunction LAFunction::from_mahler(std::int64_t p, int h, std::vector<PadicNumber> mahler,
                                   bool exact) {
  LAFunction f = zero(p, h);
  f.mahler_ = std::move(mahler);
  f.exact_ = exact;
  f.normalize();
  return f;
}

LAFunction LAFunction::from_poly(std::int64_t p, std::vector<PadicNumber> poly, int h) {
  LAFunction f = zero(p, h);
  f.poly_ = std::move(poly);
  f.normalize();
  return f;
}

LAFunction LAFunction::compose_parts(std::int64_t p, int h, std::vector<PadicNumber> poly,
                                     std::vector<PadicNumber> mahler, bool exact) {
  LAFunction f = zero(p, h);
  f.poly_ = std::move(poly);
  f.mahler_ = std::move(mahler);
  f.exact_ = exact;
  f.normalize();
  return f;
}

PadicNumber LAFunction::mahler_coeff(std::int64_t n) const {
  if (n < 0) throw std::invalid_argument("mahler_coeff: n must be >= 0");
  if (n < static_cast<std::int64_t>(mahler_.size())) return mahler_[static_cast<size_t>(n)];
  if (exact_) return PadicNumber::zero(p_);
  std::int64_t ph = static_cast<std::int64_t>(
      pow_u64(static_cast<std::uint64_t>(p_), static_cast<unsigned>(h_)));
  std::int64_t bound = amice_floor() + factorial_valuation(p_, n / ph);
  return PadicNumber::zero_at(p_, bound);
}

bool LAFunction::is_zero_ish() const {
  for (const auto& a : poly_)
    if (!a.is_zero_ish()) return false;
  for (const auto& a : mahler_)
    if (!a.is_zero_ish()) return false;
  return true;
}

std::int64_t LAFunction::amice_floor() const {
  std::int64_t ph = static_cast<std::int64_t>(
      pow_u64(static_cast<std::uint64_t>(p_), static_cast<unsigned>(h_)));
  std::int64_t fl = 0;
  for (std::int64_t n = 0; n < static_cast<std::int64_t>(mahler_.size()); ++n) {
    const PadicNumber& b = mahler_[static_cast<size_t>(n)];
    if (b.is_zero_ish()) continue;
    fl = std::min(fl, b.valuation() - factorial_valuation(p_, n / ph));
  }
  return fl;
}

namespace {

// Mahler coefficients of the monomial x^i: Delta^m[x^i](0)
std::vector<PadicNumber> monomial_mahler(std::int64_t p, std::int64_t i) {
  std::vector<PadicNumber> out;
  for (std::int64_t m = 0; m <= i; ++m) {
    PadicNumber s = PadicNumber::zero(p);
    for (std::int64_t j = 0; j <= m; ++j) {
      PadicNumber term = mul(int_binomial(p, m, j), PadicNumber::from_int(p, j).pow_int(i));
      if ((m - j) % 2) term = neg(term);
      s = add(s, term);
    }
    out.push_back(s);
  }
  return out;
}

}  // namespace

LAFunction LAFunction::merged() const {
  if (poly_.empty()) return *this;
  std::vector<PadicNumber> mahler = mahler_;
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(poly_.size()); ++i) {
    const PadicNumber& c = poly_[static_cast<size_t>(i)];
    if (c.is_exact_zero()) continue;
    auto mm = monomial_mahler(p_, i);
    if (mahler.size() < mm.size()) mahler.resize(mm.size(), PadicNumber::zero(p_));
    for (size_t m = 0; m < mm.size(); ++m) mahler[m] = add(mahler[m], mul(c, mm[m]));
  }
  return from_mahler(p_, h_, std::move(mahler), exact_);
}

LAFunction la_add(const LAFunction& f, const LAFunction& g) {
  if (f.prime() == 0) return g;
  if (g.prime() == 0) return f;
  if (f.prime() != g.prime()) throw std::invalid_argument("LAFunction: prime mismatch");
  std::int64_t p = f.prime();
  int h = std::max(f.level(), g.level());
  std::vector<PadicNumber> poly(std::max(f.poly().size(), g.poly().size()),
                                PadicNumber::zero(p));
  for (size_t i = 0; i < poly.size(); ++i) {
    PadicNumber a = i < f.poly().size() ? f.poly()[i] : PadicNumber::zero(p);
    PadicNumber b = i < g.poly().size() ? g.poly()[i] : PadicNumber::zero(p);
    poly[i] = add(a, b);
  }
  bool exact = f.mahler_exact() && g.mahler_exact();
  std::int64_t nm;
  if (exact)
    nm = std::max(f.n_max(), g.n_max());
  else if (f.mahler_exact())
    nm = g.n_max();
  else if (g.mahler_exact())
    nm = f.n_max();
  else
    nm = std::min(f.n_max(), g.n_max());
  std::vector<PadicNumber> mahler(static_cast<size_t>(std::max<std::int64_t>(0, nm + 1)),
                                  PadicNumber::zero(p));
  for (std::int64_t n = 0; n <= nm; ++n)
    mahler[static_cast<size_t>(n)] = add(f.mahler_coeff(n), g.mahler_coeff(n));
  return LAFunction::compose_parts(p, h, std::move(poly), std::move(mahler), exact);
}

LAFunction la_scalar_mul(const LAFunction& f, const PadicNumber& c) {
  std::vector<PadicNumber> poly = f.poly();
  for (auto& a : poly) a = mul(a, c);
  std::vector<PadicNumber> mahler = f.mahler();
  for (auto& a : mahler) a = mul(a, c);
  return LAFunction::compose_parts(f.prime(), f.level(), std::move(poly), std::move(mahler),
                                   f.mahler_exact());
}

LAFunction la_sub(const LAFunction& f, const LAFunction& g) {
  return la_add(f, la_scalar_mul(g, PadicNumber::from_int(f.prime() ? f.prime() : g.prime(), -1)));
}

bool la_approx_equal(const LAFunction& f, const LAFunction& g) {
  return la_sub(f.merged(), g.merged()).is_zero_ish();
}

PadicNumber evaluate(const LAFunction& f, const PadicNumber& a) {
  if (!a.is_zero_ish() && a.valuation() < 0)
    throw std::domain_error("evaluate: point must lie in Z_p");
  std::int64_t p = f.prime();
  PadicNumber acc = PadicNumber::zero(p);
  for (std::int64_t n = 0; n <= f.n_max(); ++n) {
    const PadicNumber& b = f.mahler()[static_cast<size_t>(n)];
    if (b.is_exact_zero()) continue;
    acc = add(acc, mul(b, padic_binomial(a, n)));
  }
  // polynomial part by Horner
  for (std::int64_t i = static_cast<std::int64_t>(f.poly().size()) - 1; i >= 0; --i)
    acc = add(mul(acc, a), f.poly()[static_cast<size_t>(i)]);
  if (!f.mahler_exact()) {
    // unknown Mahler tail: |b_n binom(a,n)| <= |b_{n_max+1}|
    std::int64_t ph = static_cast<std::int64_t>(
        pow_u64(static_cast<std::uint64_t>(p), static_cast<unsigned>(f.level())));
    std::int64_t bound = f.amice_floor() + factorial_valuation(p, (f.n_max() + 1) / ph);
    acc = acc.with_abs_prec(std::min(acc.abs_prec(), bound));
  }
  return acc;
}

namespace {

// Mahler transition matrix K with binom(c x, n) = sum_m K[m][n] binom(x, m);
// triangular: K[m][n] = 0 for m > n.
std::vector<std::vector<PadicNumber>> scaling_matrix(std::int64_t p, const PadicNumber& c,
                                                     std::int64_t nmax) {
  std::vector<std::vector<PadicNumber>> K(static_cast<size_t>(nmax + 1));
  // values binom(c*j, n) cached per j
  std::vector<std::vector<PadicNumber>> bc(static_cast<size_t>(nmax + 1));
  for (std::int64_t j = 0; j <= nmax; ++j) {
    PadicNumber cj = mul(c, PadicNumber::from_int(p, j));
    bc[static_cast<size_t>(j)].reserve(static_cast<size_t>(nmax + 1));
    for (std::int64_t n = 0; n <= nmax; ++n)
      bc[static_cast<size_t>(j)].push_back(padic_binomial(cj, n));
  }
  for (std::int64_t m = 0; m <= nmax; ++m) {
    K[static_cast<size_t>(m)].assign(static_cast<size_t>(nmax + 1), PadicNumber::zero(p));
    for (std::int64_t n = m; n <= nmax; ++n) {
      PadicNumber s = PadicNumber::zero(p);
      for (std::int64_t j = 0; j <= m; ++j) {
        PadicNumber term = mul(int_binomial(p, m, j), bc[static_cast<size_t>(j)][static_cast<size_t>(n)]);
        if ((m - j) % 2) term = neg(term);
        s = add(s, term);
      }
      K[static_cast<size_t>(m)][static_cast<size_t>(n)] = s;
    }
  }
  return K;
}

std::vector<PadicNumber> apply_matrix(const std::vector<std::vector<PadicNumber>>& K,
                                      const std::vector<PadicNumber>& b, std::int64_t p) {
  std::vector<PadicNumber> out(K.size(), PadicNumber::zero(p));
  for (size_t m = 0; m < K.size(); ++m) {
    PadicNumber s = PadicNumber::zero(p);
    for (size_t n = 0; n < b.size() && n < K[m].size(); ++n) {
      if (b[n].is_exact_zero() || K[m][n].is_exact_zero()) continue;
      s = add(s, mul(K[m][n], b[n]));
    }
    out[m] = s;
  }
  return out;
}

}  // namespace

LAFunction la_psi(const LAFunction& f) {
  std::int64_t p = f.prime();
  std::vector<PadicNumber> poly = f.poly();
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(poly.size()); ++i)
    poly[static_cast<size_t>(i)] =
        mul(poly[static_cast<size_t>(i)], PadicNumber::from_int(p, 1).mul_pow_p(i));
  std::vector<PadicNumber> mahler;
  if (f.n_max() >= 0) {
    auto K = scaling_matrix(p, PadicNumber::from_int(p, p), f.n_max());
    mahler = apply_matrix(K, f.mahler(), p);
  }
  int h = std::max(0, f.level() - 1);
  LAFunction out = LAFunction::compose_parts(p, h, std::move(poly), std::move(mahler),
                                             f.mahler_exact());
  if (f.asserted_x_power()) out.assert_x_power(*f.asserted_x_power());
  return out;
}

LAFunction la_gamma(const PadicNumber& gamma, const LAFunction& f) {
  std::int64_t p = f.prime();
  if (!gamma.is_unit()) throw std::domain_error("la_gamma: gamma must be a unit");
  PadicNumber ginv = gamma.inv();
  std::vector<PadicNumber> poly = f.poly();
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(poly.size()); ++i)
    poly[static_cast<size_t>(i)] = mul(poly[static_cast<size_t>(i)], ginv.pow_int(i + 1));
  std::vector<PadicNumber> mahler;
  if (f.n_max() >= 0) {
    auto K = scaling_matrix(p, ginv, f.n_max());
    mahler = apply_matrix(K, f.mahler(), p);
    for (auto& b : mahler) b = mul(b, ginv);
  }
  LAFunction out = LAFunction::compose_parts(p, f.level(), std::move(poly), std::move(mahler),
                                             f.mahler_exact());
  if (f.asserted_x_power()) out.assert_x_power(*f.asserted_x_power());
  return out;
}

LAFunction la_phi(const LAFunction& f) {
  std::int64_t p = f.prime();
  LAFunction g = f.merged();
  std::int64_t nmax = std::max<std::int64_t>(g.n_max(), 0);
  std::vector<PadicNumber> mahler(static_cast<size_t>(nmax + 1), PadicNumber::zero(p));
  // phi(f)(j) = f(j/p) if p | j else 0; Mahler by finite differences
  std::vector<PadicNumber> values(static_cast<size_t>(nmax + 1), PadicNumber::zero(p));
  for (std::int64_t j = 0; j <= nmax; ++j) {
    if (j % p) continue;
    values[static_cast<size_t>(j)] = evaluate(g, PadicNumber::from_ratio(p, j, p));
  }
  for (std::int64_t m = 0; m <= nmax; ++m) {
    PadicNumber s = PadicNumber::zero(p);
    for (std::int64_t j = 0; j <= m; ++j) {
      if (values[static_cast<size_t>(j)].is_exact_zero()) continue;
      PadicNumber term = mul(int_binomial(p, m, j), values[static_cast<size_t>(j)]);
      if ((m - j) % 2) term = neg(term);
      s = add(s, term);
    }
    mahler[static_cast<size_t>(m)] = s;
  }
  // the image is never polynomial (it vanishes on units): tail is open-ended
  return LAFunction::from_mahler(p, f.level() + 1, std::move(mahler), false);
}

LAFunction la_phi_transform(const LAFunction& f) {
  std::int64_t p = f.prime();
  LAFunction g = f.merged();
  std::int64_t nmax = std::max<std::int64_t>(g.n_max(), 0);
  PadicNumber pinv = PadicNumber::from_int(p, p).inv();
  // analytic values (1/p) g(j/p) for all residues j, via the Mahler series
  std::vector<PadicNumber> values(static_cast<size_t>(nmax + 1), PadicNumber::zero(p));
  for (std::int64_t j = 0; j <= nmax; ++j) {
    PadicNumber a = mul(PadicNumber::from_int(p, j), pinv);
    PadicNumber s = PadicNumber::zero(p);
    for (std::int64_t n = 0; n <= g.n_max(); ++n) {
      const PadicNumber& b = g.mahler()[static_cast<size_t>(n)];
      if (b.is_exact_zero()) continue;
      s = add(s, mul(b, padic_binomial_general(a, n)));
    }
    values[static_cast<size_t>(j)] = mul(pinv, s);
  }
  std::vector<PadicNumber> mahler(static_cast<size_t>(nmax + 1), PadicNumber::zero(p));
  for (std::int64_t m = 0; m <= nmax; ++m) {
    PadicNumber s = PadicNumber::zero(p);
    for (std::int64_t j = 0; j <= m; ++j) {
      if (values[static_cast<size_t>(j)].is_exact_zero()) continue;
      PadicNumber term = mul(int_binomial(p, m, j), values[static_cast<size_t>(j)]);
      if ((m - j) % 2) term = neg(term);
      s = add(s, term);
    }
    mahler[static_cast<size_t>(m)] = s;
  }
  return LAFunction::from_mahler(p, f.level() + 1, std::move(mahler), false);
}

LAFunction la_mul_by_x(const LAFunction& f) {
  std::int64_t p = f.prime();
  std::vector<PadicNumber> poly;
  if (!f.poly().empty()) {
    poly.assign(f.poly().size() + 1, PadicNumber::zero(p));
    for (size_t i = 0; i < f.poly().size(); ++i) poly[i + 1] = f.poly()[i];
  }
  std::int64_t nm = f.n_max();
  std::vector<PadicNumber> mahler(static_cast<size_t>(std::max<std::int64_t>(0, nm + 2)),
                                  PadicNumber::zero(p));
  // x binom(x,n) = (n+1) binom(x,n+1) + n binom(x,n)
  for (std::int64_t m = 0; m <= nm + 1; ++m) {
    PadicNumber a = m >= 1 && m - 1 <= nm ? f.mahler()[static_cast<size_t>(m - 1)]
                                          : PadicNumber::zero(p);
    PadicNumber b = m <= nm ? f.mahler()[static_cast<size_t>(m)] : PadicNumber::zero(p);
    mahler[static_cast<size_t>(m)] = mul(PadicNumber::from_int(p, m), add(a, b));
  }
  if (!f.mahler_exact() && nm >= 0) mahler.resize(static_cast<size_t>(nm + 1));
  LAFunction out = LAFunction::compose_parts(p, f.level(), std::move(poly), std::move(mahler),
                                             f.mahler_exact());
  if (f.asserted_x_power()) out.assert_x_power(*f.asserted_x_power() + 1);
  return out;
}

LAFunction la_div_by_x(const LAFunction& f) {
  if (!f.mahler_exact() || !f.poly().empty())
    throw std::domain_error("la_div_by_x: needs an exact Mahler table with no poly part");
  std::int64_t p = f.prime();
  std::int64_t nm = f.n_max();
  if (nm < 0) return f;
  if (!f.mahler()[0].is_zero_ish())
    throw std::domain_error("la_div_by_x: f(0) is not indistinguishable from zero");
  // descend: b_{m-1} = b'_m / m - b_m with b_{nm} = 0
  std::vector<PadicNumber> out(static_cast<size_t>(nm), PadicNumber::zero(p));
  PadicNumber carry = PadicNumber::zero(p);  // b_m for m = nm
  for (std::int64_t m = nm; m >= 1; --m) {
    PadicNumber bm1 = sub(mul(f.mahler()[static_cast<size_t>(m)],
                              PadicNumber::from_int(p, m).inv()),
                          carry);
    out[static_cast<size_t>(m - 1)] = bm1;
    carry = bm1;
  }
  LAFunction g = LAFunction::from_mahler(p, f.level(), std::move(out), true);
  if (f.asserted_x_power() && *f.asserted_x_power() > 0)
    g.assert_x_power(*f.asserted_x_power() - 1);
  return g;
}

LAFunction la_mul_by_x_pow(const LAFunction& f, int k) {
  LAFunction g = f;
  for (int i = 0; i < k; ++i) g = la_mul_by_x(g);
  return g;
}

LAFunction colmez_transform(const RobbaElement& f, std::optional<int> h) {
  std::int64_t p = f.prime();
  int level = 0;
  if (h) {
    level = *h;
  } else if (f.annulus()) {
    // C(R_{A, r_h}) sits in LA_h once p^h (p-1) >= n0
    std::int64_t n0 = *f.annulus();
    std::int64_t ph = 1;
    while (ph * (p - 1) < n0) {
      ph *= p;
      ++level;
    }
  }
  if (f.lo() >= 0) return LAFunction::zero(p, level);
  std::int64_t d = -f.lo() - 1;  // top Mahler index of C(f)(x+1)
  // C(f)(x+1) = sum a_{-1-n} binom(x, n); shift basis with
  // binom(x-1, n) = sum_{k<=n} (-1)^{n-k} binom(x, k)
  std::vector<PadicNumber> mahler(static_cast<size_t>(d + 1), PadicNumber::zero(p));
  for (std::int64_t k = 0; k <= d; ++k) {
    PadicNumber s = PadicNumber::zero(p);
    for (std::int64_t n = k; n <= d; ++n) {
      PadicNumber a = f.coeff(-1 - n);
      if (a.is_exact_zero()) continue;
      s = add(s, (n - k) % 2 ? neg(a) : a);
    }
    mahler[static_cast<size_t>(k)] = s;
  }
  return LAFunction::from_mahler(p, level, std::move(mahler), true);
}

RobbaElement colmez_section(const std::vector<PadicNumber>& poly, std::int64_t p, int cap_n) {
  std::int64_t deg = static_cast<std::int64_t>(poly.size()) - 1;
  if (deg > cap_n) throw std::invalid_argument("colmez_section: degree overflow");
  if (deg < 0) return RobbaElement::zero(p);
  auto eval_poly = [&](const PadicNumber& a) {
    PadicNumber acc = PadicNumber::zero(p);
    for (std::int64_t i = deg; i >= 0; --i)
      acc = add(mul(acc, a), poly[static_cast<size_t>(i)]);
    return acc;
  };
  // coefficient of binom(x-1, i) in P: Delta^i P(1)
  std::vector<PadicNumber> c(static_cast<size_t>(deg + 1), PadicNumber::zero(p));
  for (std::int64_t i = 0; i <= deg; ++i) {
    PadicNumber s = PadicNumber::zero(p);
    for (std::int64_t j = 0; j <= i; ++j) {
      PadicNumber term = mul(int_binomial(p, i, j), eval_poly(PadicNumber::from_int(p, 1 + j)));
      if ((i - j) % 2) term = neg(term);
      s = add(s, term);
    }
    c[static_cast<size_t>(i)] = s;
  }
  RobbaElement out = RobbaElement::zero(p);
  for (std::int64_t i = 0; i <= deg; ++i)
    out = add(out, RobbaElement::monomial(p, -i - 1, c[static_cast<size_t>(i)]));
  return out;
}

std::vector<PadicNumber> taylor_jets(const LAFunction& f, int n_jets) {
  std::int64_t p = f.prime();
  if (!f.mahler_exact())
    throw std::domain_error(
        "taylor_jets: certified only for terminating Mahler expansions "
        "(a bounded open tail does not pin the jet at any precision)");
  LAFunction g = f.merged();
  for (int i = 0; i < f.level(); ++i) g = la_psi(g);
  // 0-analytic jets from Mahler: binom(x,n) = (1/n!) sum_k s(n,k) x^k with
  // s(n,k) the signed Stirling numbers, s(n+1,k) = s(n,k-1) - n s(n,k)
  std::int64_t nm = g.n_max();
  std::vector<std::vector<PadicNumber>> s(static_cast<size_t>(nm + 2));
  s[0] = {PadicNumber::from_int(p, 1)};
  for (std::int64_t n = 0; n <= nm; ++n) {
    s[static_cast<size_t>(n + 1)].assign(static_cast<size_t>(n + 2), PadicNumber::zero(p));
    for (std::int64_t k = 0; k <= n + 1; ++k) {
      PadicNumber a = k >= 1 && k - 1 < static_cast<std::int64_t>(s[static_cast<size_t>(n)].size())
                          ? s[static_cast<size_t>(n)][static_cast<size_t>(k - 1)]
                          : PadicNumber::zero(p);
      PadicNumber b = k < static_cast<std::int64_t>(s[static_cast<size_t>(n)].size())
                          ? s[static_cast<size_t>(n)][static_cast<size_t>(k)]
                          : PadicNumber::zero(p);
      s[static_cast<size_t>(n + 1)][static_cast<size_t>(k)] =
          sub(a, mul(PadicNumber::from_int(p, n), b));
    }
  }
  std::vector<PadicNumber> jets(static_cast<size_t>(n_jets), PadicNumber::zero(p));
  for (int k = 0; k < n_jets; ++k) {
    PadicNumber acc = PadicNumber::zero(p);
    for (std::int64_t n = k; n <= nm; ++n) {
      const PadicNumber& bn = g.mahler()[static_cast<size_t>(n)];
      if (bn.is_exact_zero()) continue;
      PadicNumber snk = s[static_cast<size_t>(n)][static_cast<size_t>(k)];
      if (snk.is_exact_zero()) continue;
      acc = add(acc, mul(bn, mul(snk, factorial_padic(p, n).inv())));
    }
    // undo the psi^h descent: jet_k(f) = jet_k(psi^h f) / p^{h k}
    jets[static_cast<size_t>(k)] = acc.mul_pow_p(-static_cast<std::int64_t>(f.level()) * k);
  }
  return jets;
}

SplitResult project_split(const LAFunction& f, int cap_n) {
  std::int64_t p = f.prime();
  auto jets = taylor_jets(f, cap_n + 1);
  std::vector<PadicNumber> q(jets.begin(), jets.end());
  LAFunction qfun = LAFunction::from_poly(p, q, f.level());
  LAFunction tail = la_sub(f.merged(), qfun.merged());
  tail.assert_x_power(cap_n + 1);
  return SplitResult{std::move(q), std::move(tail)};
}

LAFunction neumann_solve_psi_la(const PadicNumber& lambda, const LAFunction& y, int cap_n) {
  std::int64_t p = y.prime();
  if (lambda.is_zero_ish()) return y;
  std::int64_t contraction = lambda.valuation() + cap_n + 1;
  if (contraction <= 0)
    throw std::domain_error("neumann_solve_psi_la: contraction |lambda p^{N+1}| < 1 violated");
  std::int64_t target = kDefaultPrec;
  std::int64_t kmax = y.level() + target / contraction + 2;
  LAFunction x = y;
  LAFunction term = y;
  for (std::int64_t k = 1; k <= kmax; ++k) {
    term = la_scalar_mul(la_psi(term), lambda);
    if (term.is_zero_ish()) break;
    x = la_add(x, term);
  }
  return x;
}

std::vector<PadicNumber> LAFunction::mahler_table(std::int64_t count) const {
  std::vector<PadicNumber> out;
  for (std::int64_t a = 0; a < count; ++a)
    out.push_back(evaluate(*this, PadicNumber::from_int(p_, a)));
  return out;
}

std::string LAFunction::to_json() const {
  nlohmann::json j;
  j["p"] = p_;
  j["h"] = h_;
  j["exact"] = exact_;
  nlohmann::json am = nlohmann::json::array();
  for (std::int64_t n = 0; n <= n_max(); ++n) {
    nlohmann::json e = scalar_to_json(mahler_[static_cast<size_t>(n)]);
    e["n"] = n;
    am.push_back(e);
  }
  j["amice"] = am;
  nlohmann::json po = nlohmann::json::array();
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(poly_.size()); ++i) {
    nlohmann::json e = scalar_to_json(poly_[static_cast<size_t>(i)]);
    e["i"] = i;
    po.push_back(e);
  }
  j["poly"] = po;
  return j.dump();
}

LAFunction LAFunction::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  std::int64_t p = j.at("p").get<std::int64_t>();
  int h = j.at("h").get<int>();
  bool exact = j.value("exact", false);
  std::vector<PadicNumber> mahler;
  for (const auto& e : j.at("amice")) {
    std::int64_t n = e.at("n").get<std::int64_t>();
    if (static_cast<std::int64_t>(mahler.size()) <= n)
      mahler.resize(static_cast<size_t>(n + 1), PadicNumber::zero(p));
    mahler[static_cast<size_t>(n)] = scalar_from_json(p, e);
  }
  std::vector<PadicNumber> poly;
  for (const auto& e : j.at("poly")) {
    std::int64_t i = e.at("i").get<std::int64_t>();
    if (static_cast<std::int64_t>(poly.size()) <= i)
      poly.resize(static_cast<size_t>(i + 1), PadicNumber::zero(p));
    poly[static_cast<size_t>(i)] = scalar_from_json(p, e);
  }
  return compose_parts(p, h, std::move(poly), std::move(mahler), exact);
}

}  // namespace phigamma
