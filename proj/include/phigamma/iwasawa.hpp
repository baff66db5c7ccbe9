#ifndef PHIGAMMA_IWASAWA_HPP
#define PHIGAMMA_IWASAWA_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "phigamma/character.hpp"
#include "phigamma/robba.hpp"

namespace phigamma {

// Truncated model of R_A^+(Gamma) = R_A^+(1+pZ_p) tensored with the group
// algebra of mu_{p-1}.  An element is sum_c [omega^c] S_c(U) with U =
// [gamma0]-1, gamma0 = 1+p, omega the Teichmueller lift of a fixed generator
// g of (Z/p)^*, and S_c a series truncated at degree u_max.
class IwasawaElement {
 public:
  IwasawaElement() : p_(0), u_max_(-1), exact_(true) {}
  IwasawaElement(std::int64_t p, std::int64_t u_max, bool exact = true);

  static IwasawaElement zero(std::int64_t p, std::int64_t u_max);
  static IwasawaElement one(std::int64_t p, std::int64_t u_max);
  static IwasawaElement u_power(std::int64_t p, std::int64_t u_max, std::int64_t k);
  // [gamma0^a * omega^c] as a group element
  static IwasawaElement group_element(std::int64_t p, std::int64_t u_max, std::int64_t a,
                                      std::int64_t c);

  std::int64_t prime() const { return p_; }
  std::int64_t u_max() const { return u_max_; }
  bool exact() const { return exact_; }
  std::int64_t torsion_order() const { return p_ - 1; }
  const PadicNumber& coeff(std::int64_t c, std::int64_t k) const;
  void set_coeff(std::int64_t c, std::int64_t k, const PadicNumber& v);

  bool is_zero_ish() const;

  std::string to_json() const;
  static IwasawaElement from_json(const std::string& text);

 private:
  std::int64_t p_;
  std::int64_t u_max_;
  bool exact_;
  std::vector<std::vector<PadicNumber>> comp_;  // comp_[c][k]
};

IwasawaElement iw_add(const IwasawaElement& a, const IwasawaElement& b);
IwasawaElement iw_sub(const IwasawaElement& a, const IwasawaElement& b);
IwasawaElement iw_scalar_mul(const IwasawaElement& a, const PadicNumber& s);
IwasawaElement iw_mul(const IwasawaElement& a, const IwasawaElement& b);
bool iw_approx_equal(const IwasawaElement& a, const IwasawaElement& b);

// the fixed generator of (Z/p)^* used for the torsion basis
std::int64_t torsion_generator(std::int64_t p);

// unique continuous algebra map extending delta restricted to Z_p^*
PadicNumber char_eval(const Character& delta, const IwasawaElement& u);

// T_delta = [gamma0] - delta(gamma0) = U + (1 - delta(gamma0))
IwasawaElement t_delta(const Character& delta, std::int64_t u_max);

// module action of u on f inside R(delta)^{psi=0}; gamma acts through the
// delta-twist gamma_delta(f) = delta(gamma) gamma(f)
RobbaElement act_on_psi0(const IwasawaElement& u, const RobbaElement& f, const Character& delta,
                         bool check_psi_zero = true);

// invert the action on the generator 1+T: find u with u * (1+T) = f in
// R(delta)^{psi=0}, by linear solve across the (gamma0-1)-adic filtration
IwasawaElement solve_generator(const Character& delta, const RobbaElement& f,
                               std::int64_t u_max);

// image of f in R+/T^k R+ written in the eigenbasis 1, t, ..., t^{k-1}
std::vector<PadicNumber> j_k_map(const RobbaElement& f, std::int64_t k);

// splitting R+(1+pZ_p) = T_delta R+(1+pZ_p) (+) A on the torsion-trivial
// component: u = T_delta * w + c with c = char_eval(delta, u)
struct TDeltaSplit {
  IwasawaElement w;
  PadicNumber c;
};
TDeltaSplit split_t_delta(const Character& delta, const IwasawaElement& u);

// membership of f in C(D+) = (1-phi_delta)(D+)^{psi_delta=1}, decided through
// J_k against the quotient (+)_{i<k} A/(1 - delta(p) p^i)
struct MembershipResult {
  Trilean member = Trilean::kIndeterminate;
  std::int64_t k = 0;
  std::vector<std::int64_t> obstructing_i;  // indices with 1 - delta(p)p^i = 0
  std::string certificate;                  // JSON: per-component report
};
MembershipResult c_dplus_ideal_membership(const Character& delta, const RobbaElement& f);

}  // namespace phigamma

#endif
