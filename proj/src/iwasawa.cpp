#include "phigamma/iwasawa.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

#include "phigamma/json_util.hpp"
#include "phigamma/linalg.hpp"

namespace phigamma {

IwasawaElement::IwasawaElement(std::int64_t p, std::int64_t u_max, bool exact)
    : p_(p), u_max_(u_max), exact_(exact) {
  require_odd_prime(p);
  if (u_max < 0) throw std::invalid_argument("IwasawaElement: u_max must be >= 0");
  comp_.assign(static_cast<size_t>(p - 1),
               std::vector<PadicNumber>(static_cast<size_t>(u_max + 1), PadicNumber::zero(p)));
}

IwasawaElement IwasawaElement::zero(std::int64_t p, std::int64_t u_max) {
  return IwasawaElement(p, u_max);
}

IwasawaElement IwasawaElement::one(std::int64_t p, std::int64_t u_max) {
  IwasawaElement e(p, u_max);
  e.set_coeff(0, 0, PadicNumber::from_int(p, 1));
  return e;
}

IwasawaElement IwasawaElement::u_power(std::int64_t p, std::int64_t u_max, std::int64_t k) {
  if (k > u_max) throw std::invalid_argument("IwasawaElement::u_power: k exceeds u_max");
  IwasawaElement e(p, u_max);
  e.set_coeff(0, k, PadicNumber::from_int(p, 1));
  return e;
}

IwasawaElement IwasawaElement::group_element(std::int64_t p, std::int64_t u_max, std::int64_t a,
                                             std::int64_t c) {
  // [gamma0^a] = (1+U)^a expanded through binomials (a may be any integer)
  IwasawaElement e(p, u_max);
  PadicNumber pa = PadicNumber::from_int(p, a);
  std::int64_t cc = ((c % (p - 1)) + (p - 1)) % (p - 1);
  for (std::int64_t k = 0; k <= u_max; ++k)
    e.set_coeff(cc, k, padic_binomial(pa, k));
  // binomial expansion of (1+U)^a terminates only for a >= 0
  if (a >= 0 && a <= u_max) e.exact_ = true;
  else e.exact_ = false;
  return e;
}

const PadicNumber& IwasawaElement::coeff(std::int64_t c, std::int64_t k) const {
  return comp_[static_cast<size_t>(c)][static_cast<size_t>(k)];
}

void IwasawaElement::set_coeff(std::int64_t c, std::int64_t k, const PadicNumber& v) {
  comp_[static_cast<size_t>(c)][static_cast<size_t>(k)] = v;
}

bool IwasawaElement::is_zero_ish() const {
  for (const auto& row : comp_)
    for (const auto& a : row)
      if (!a.is_zero_ish()) return false;
  return true;
}

IwasawaElement iw_add(const IwasawaElement& a, const IwasawaElement& b) {
  if (a.prime() != b.prime()) throw std::invalid_argument("IwasawaElement: prime mismatch");
  std::int64_t um = std::min(a.u_max(), b.u_max());
  bool exact = a.exact() && b.exact();
  if (a.exact() && !b.exact()) um = b.u_max();
  if (b.exact() && !a.exact()) um = a.u_max();
  if (exact) um = std::min(a.u_max(), b.u_max());  // both stored to their caps
  IwasawaElement out(a.prime(), um, exact);
  for (std::int64_t c = 0; c < a.torsion_order(); ++c)
    for (std::int64_t k = 0; k <= um; ++k)
      out.set_coeff(c, k, add(a.coeff(c, k), b.coeff(c, k)));
  return out;
}

IwasawaElement iw_scalar_mul(const IwasawaElement& a, const PadicNumber& s) {
  IwasawaElement out = a;
  for (std::int64_t c = 0; c < a.torsion_order(); ++c)
    for (std::int64_t k = 0; k <= a.u_max(); ++k) out.set_coeff(c, k, mul(a.coeff(c, k), s));
  return out;
}

IwasawaElement iw_sub(const IwasawaElement& a, const IwasawaElement& b) {
  return iw_add(a, iw_scalar_mul(b, PadicNumber::from_int(a.prime(), -1)));
}

IwasawaElement iw_mul(const IwasawaElement& a, const IwasawaElement& b) {
  if (a.prime() != b.prime()) throw std::invalid_argument("IwasawaElement: prime mismatch");
  std::int64_t um = std::min(a.u_max(), b.u_max());
  IwasawaElement out(a.prime(), um, false);
  std::int64_t tor = a.torsion_order();
  for (std::int64_t c1 = 0; c1 < tor; ++c1)
    for (std::int64_t c2 = 0; c2 < tor; ++c2) {
      std::int64_t c = (c1 + c2) % tor;
      for (std::int64_t k1 = 0; k1 <= um; ++k1) {
        if (a.coeff(c1, k1).is_exact_zero()) continue;
        for (std::int64_t k2 = 0; k1 + k2 <= um; ++k2) {
          if (b.coeff(c2, k2).is_exact_zero()) continue;
          out.set_coeff(c, k1 + k2,
                        add(out.coeff(c, k1 + k2), mul(a.coeff(c1, k1), b.coeff(c2, k2))));
        }
      }
    }
  // exactness survives when no truncation occurred
  bool overflow = false;
  if (a.exact() && b.exact()) {
    for (std::int64_t c1 = 0; c1 < tor && !overflow; ++c1)
      for (std::int64_t k1 = 0; k1 <= a.u_max() && !overflow; ++k1) {
        if (a.coeff(c1, k1).is_zero_ish()) continue;
        for (std::int64_t c2 = 0; c2 < tor && !overflow; ++c2)
          for (std::int64_t k2 = 0; k2 <= b.u_max() && !overflow; ++k2)
            if (!b.coeff(c2, k2).is_zero_ish() && k1 + k2 > um) overflow = true;
      }
    if (!overflow) {
      IwasawaElement withflag = out;
      IwasawaElement exact_out(a.prime(), um, true);
      for (std::int64_t c = 0; c < tor; ++c)
        for (std::int64_t k = 0; k <= um; ++k) exact_out.set_coeff(c, k, withflag.coeff(c, k));
      return exact_out;
    }
  }
  return out;
}

bool iw_approx_equal(const IwasawaElement& a, const IwasawaElement& b) {
  return iw_sub(a, b).is_zero_ish();
}

std::int64_t torsion_generator(std::int64_t p) {
  // smallest primitive root mod p
  for (std::int64_t g = 2; g < p; ++g) {
    std::int64_t x = g % p;
    int order = 1;
    while (x != 1) {
      x = (x * g) % p;
      ++order;
    }
    if (order == p - 1) return g;
  }
  throw std::logic_error("torsion_generator: no primitive root found");
}

PadicNumber char_eval(const Character& delta, const IwasawaElement& u) {
  std::int64_t p = u.prime();
  PadicNumber beta = sub(delta.gamma0_value(), PadicNumber::from_int(p, 1));
  PadicNumber omg = teichmuller(p, torsion_generator(p));
  PadicNumber acc = PadicNumber::zero(p);
  for (std::int64_t c = 0; c < u.torsion_order(); ++c) {
    // delta([omega^c]) = omega(g)^{c * torsion_index}
    PadicNumber dc = omg.pow_int(c * delta.torsion_index());
    PadicNumber bk = PadicNumber::from_int(p, 1);
    for (std::int64_t k = 0; k <= u.u_max(); ++k) {
      const PadicNumber& a = u.coeff(c, k);
      if (!a.is_exact_zero()) acc = add(acc, mul(dc, mul(a, bk)));
      bk = mul(bk, beta);
    }
  }
  if (!u.exact()) {
    // unknown tail: |S_c tail| <= p^{-(u_max+1) v(beta)} within the height
    std::int64_t vb = beta.is_zero_ish() ? beta.abs_prec() : beta.valuation();
    acc = acc.with_abs_prec(std::min(acc.abs_prec(), (u.u_max() + 1) * std::max<std::int64_t>(vb, 1)));
  }
  return acc;
}

IwasawaElement t_delta(const Character& delta, std::int64_t u_max) {
  std::int64_t p = delta.prime();
  IwasawaElement e(p, u_max);
  e.set_coeff(0, 1, PadicNumber::from_int(p, 1));
  e.set_coeff(0, 0, sub(PadicNumber::from_int(p, 1), delta.gamma0_value()));
  return e;
}

RobbaElement act_on_psi0(const IwasawaElement& u, const RobbaElement& f, const Character& delta,
                         bool check_psi_zero) {
  std::int64_t p = f.prime();
  if (check_psi_zero && !psi(f).is_zero_ish())
    throw std::domain_error("act_on_psi0: f is not in the psi = 0 kernel at precision");
  PadicNumber g0 = PadicNumber::from_int(p, 1 + p);
  PadicNumber dg0 = delta.gamma0_value();
  // iterates v_k = (gamma_delta - 1)^k f
  std::vector<RobbaElement> iter;
  iter.push_back(f);
  for (std::int64_t k = 1; k <= u.u_max(); ++k) {
    const RobbaElement& prev = iter.back();
    RobbaElement tw = gamma_act(g0, prev).scalar_mul(dg0);
    iter.push_back(sub(tw, prev));
  }
  PadicNumber omg = teichmuller(p, torsion_generator(p));
  RobbaElement acc = RobbaElement::zero(p);
  for (std::int64_t c = 0; c < u.torsion_order(); ++c) {
    RobbaElement part = RobbaElement::zero(p);
    bool any = false;
    for (std::int64_t k = 0; k <= u.u_max(); ++k) {
      const PadicNumber& a = u.coeff(c, k);
      if (a.is_exact_zero()) continue;
      part = add(part, iter[static_cast<size_t>(k)].scalar_mul(a));
      any = true;
    }
    if (!any) continue;
    // torsion element omega^c acts through the delta-twisted gamma action
    PadicNumber zeta = omg.pow_int(c);
    RobbaElement moved = c == 0 ? part : gamma_act(zeta, part).scalar_mul(delta.eval_unit(zeta));
    acc = add(acc, moved);
  }
  if (!u.exact()) {
    // tail terms (gamma_delta - 1)^{k} f for k > u_max live ever deeper in the
    // (p, T)-filtration: coefficient j keeps at most u_max + 1 - j digits
    std::vector<PadicNumber> cc;
    for (std::int64_t n = acc.lo(); n <= acc.hi(); ++n) {
      std::int64_t bound = f.height() + std::max<std::int64_t>(0, u.u_max() + 1 - std::max<std::int64_t>(n, 0));
      cc.push_back(acc.coeff(n).with_abs_prec(bound));
    }
    acc = RobbaElement::from_coeffs(p, acc.lo(), std::move(cc), false);
  }
  return acc;
}

IwasawaElement solve_generator(const Character& delta, const RobbaElement& f,
                               std::int64_t u_max) {
  std::int64_t p = f.prime();
  if (f.lo() < 0) throw std::domain_error("solve_generator: f must lie in R(delta)+");
  std::int64_t M = f.hi();
  std::int64_t tor = p - 1;
  std::int64_t ncols = tor * (u_max + 1);
  if (M + 1 < ncols)
    throw PrecisionError("solve_generator: window too small for the unknown count");
  RobbaElement gen = RobbaElement::one_plus_T(p).padded(M);
  std::vector<std::vector<PadicNumber>> a(static_cast<size_t>(M + 1),
                                          std::vector<PadicNumber>(static_cast<size_t>(ncols)));
  for (std::int64_t c = 0; c < tor; ++c)
    for (std::int64_t k = 0; k <= u_max; ++k) {
      IwasawaElement basis(p, u_max);
      basis.set_coeff(c, k, PadicNumber::from_int(p, 1));
      RobbaElement col = act_on_psi0(basis, gen, delta, false);
      for (std::int64_t r = 0; r <= M; ++r)
        a[static_cast<size_t>(r)][static_cast<size_t>(c * (u_max + 1) + k)] =
            col.coeff_known(r) ? col.coeff(r) : PadicNumber::zero_at(p, 0);
    }
  std::vector<PadicNumber> b;
  for (std::int64_t r = 0; r <= M; ++r) b.push_back(f.coeff(r));
  auto x = solve_padic(std::move(a), std::move(b));
  if (!x) throw PrecisionError("solve_generator: inconsistent system (psi(f) != 0 or window too small)");
  IwasawaElement out(p, u_max);
  for (std::int64_t c = 0; c < tor; ++c)
    for (std::int64_t k = 0; k <= u_max; ++k)
      out.set_coeff(c, k, (*x)[static_cast<size_t>(c * (u_max + 1) + k)]);
  return out;
}

std::vector<PadicNumber> j_k_map(const RobbaElement& f, std::int64_t k) {
  std::int64_t p = f.prime();
  if (f.lo() < 0) throw std::domain_error("j_k_map: f must lie in R+");
  if (!f.coeff_known(k - 1)) throw PrecisionError("j_k_map: window below k");
  RobbaElement t = log_one_plus_T(p, std::max<std::int64_t>(k, 2));
  // residual elimination against the unitriangular t-powers
  std::vector<RobbaElement> tp;
  tp.push_back(RobbaElement::one(p).padded(k - 1));
  for (std::int64_t j = 1; j < k; ++j) tp.push_back(mul(tp.back(), t).truncated(k - 1));
  RobbaElement r = f.truncated(k - 1);
  std::vector<PadicNumber> out;
  for (std::int64_t j = 0; j < k; ++j) {
    PadicNumber cj = r.coeff(j);
    out.push_back(cj);
    r = sub(r, tp[static_cast<size_t>(j)].scalar_mul(cj));
  }
  return out;
}

TDeltaSplit split_t_delta(const Character& delta, const IwasawaElement& u) {
  std::int64_t p = u.prime();
  for (std::int64_t c = 1; c < u.torsion_order(); ++c)
    for (std::int64_t k = 0; k <= u.u_max(); ++k)
      if (!u.coeff(c, k).is_zero_ish())
        throw std::domain_error(
            "split_t_delta: defined on the torsion-trivial component R+(1+pZ_p)");
  PadicNumber c0 = char_eval(delta, u);
  // synthetic division of S(U) - c0 by U - beta, beta = delta(gamma0) - 1
  PadicNumber beta = sub(delta.gamma0_value(), PadicNumber::from_int(p, 1));
  IwasawaElement w(p, u.u_max());
  PadicNumber carry = PadicNumber::zero(p);
  for (std::int64_t k = u.u_max(); k >= 1; --k) {
    PadicNumber wk = add(u.coeff(0, k), mul(carry, beta));
    w.set_coeff(0, k - 1, wk);
    carry = wk;
  }
  return TDeltaSplit{std::move(w), std::move(c0)};
}

MembershipResult c_dplus_ideal_membership(const Character& delta, const RobbaElement& f) {
  std::int64_t p = f.prime();
  MembershipResult res;
  std::int64_t vdp = delta.value_at_p().valuation();
  res.k = std::max<std::int64_t>(1, 1 - vdp);
  auto comps = j_k_map(f, res.k);
  nlohmann::json cert = nlohmann::json::array();
  Trilean verdict = Trilean::kYes;
  for (std::int64_t i = 0; i < res.k; ++i) {
    PadicNumber factor = sub(PadicNumber::from_int(p, 1),
                             delta.value_at_p().mul_pow_p(i));
    nlohmann::json e;
    e["i"] = i;
    e["factor"] = factor.to_string();
    e["component"] = comps[static_cast<size_t>(i)].to_string();
    if (!factor.is_zero_ish()) {
      e["obstructed"] = false;  // unit factor: A/(factor) = 0 over a field
    } else {
      res.obstructing_i.push_back(i);
      e["obstructed"] = true;
      const PadicNumber& comp = comps[static_cast<size_t>(i)];
      if (!comp.is_zero_ish()) {
        verdict = Trilean::kNo;
        e["passes"] = false;
      } else if (comp.abs_prec() < 5 || factor.abs_prec() < 5) {
        if (verdict == Trilean::kYes) verdict = Trilean::kIndeterminate;
        e["passes"] = "indeterminate";
      } else {
        e["passes"] = true;
      }
    }
    cert.push_back(e);
  }
  res.member = verdict;
  res.certificate = cert.dump();
  return res;
}

std::string IwasawaElement::to_json() const {
  nlohmann::json j;
  j["p"] = p_;
  j["u_max"] = u_max_;
  j["exact"] = exact_;
  nlohmann::json tc = nlohmann::json::array();
  for (std::int64_t c = 0; c < torsion_order(); ++c) {
    nlohmann::json row = nlohmann::json::array();
    for (std::int64_t k = 0; k <= u_max_; ++k) row.push_back(scalar_to_json(coeff(c, k)));
    tc.push_back(row);
  }
  j["torsion_component"] = tc;
  return j.dump();
}

IwasawaElement IwasawaElement::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  std::int64_t p = j.at("p").get<std::int64_t>();
  IwasawaElement e(p, j.at("u_max").get<std::int64_t>(), j.value("exact", true));
  const auto& tc = j.at("torsion_component");
  for (std::int64_t c = 0; c < e.torsion_order(); ++c)
    for (std::int64_t k = 0; k <= e.u_max(); ++k)
      e.set_coeff(c, k, scalar_from_json(p, tc.at(static_cast<size_t>(c)).at(static_cast<size_t>(k))));
  return e;
}

}  // namespace phigamma
