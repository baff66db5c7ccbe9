#ifndef PHIGAMMA_AMICE_HPP
#define PHIGAMMA_AMICE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phigamma/robba.hpp"

namespace phigamma {

// Locally analytic function on Z_p, truncated model of LA_h(Z_p, A).
//
// The function is  poly(x) + sum_n b_n binom(x, n)  where poly is an exact
// polynomial part in the monomial basis (model of Pol_{<=N}) and b_n are the
// Mahler coefficients of the tail, stored for n <= n_max.  In the Amice frame
// [n/p^h]! binom(x,n) the normalized coefficients are c_n = b_n / [n/p^h]!,
// and |f| = max |c_n|.  When mahler_exact() holds the expansion terminates:
// the tail is exactly the stored polynomial-in-binomials.  Otherwise unknown
// Mahler coefficients beyond n_max are bounded through the declared
// analyticity level: v(b_n) >= amice_floor() + v_p([n/p^h]!).
class LAFunction {
 public:
  LAFunction() : p_(0), h_(0), exact_(true) {}

  static LAFunction zero(std::int64_t p, int h = 0);
  static LAFunction constant(std::int64_t p, const PadicNumber& c, int h = 0);
  static LAFunction monomial(std::int64_t p, std::int64_t i, const PadicNumber& c, int h = 0);
  static LAFunction from_mahler(std::int64_t p, int h, std::vector<PadicNumber> mahler,
                                bool exact);
  static LAFunction from_poly(std::int64_t p, std::vector<PadicNumber> poly, int h = 0);
  static LAFunction compose_parts(std::int64_t p, int h, std::vector<PadicNumber> poly,
                                  std::vector<PadicNumber> mahler, bool exact);

  std::int64_t prime() const { return p_; }
  int level() const { return h_; }
  bool mahler_exact() const { return exact_; }
  std::int64_t n_max() const { return static_cast<std::int64_t>(mahler_.size()) - 1; }
  const std::vector<PadicNumber>& poly() const { return poly_; }
  const std::vector<PadicNumber>& mahler() const { return mahler_; }
  PadicNumber mahler_coeff(std::int64_t n) const;
  std::optional<int> asserted_x_power() const { return x_power_; }
  void assert_x_power(int n1) { x_power_ = n1; }

  bool is_zero_ish() const;
  std::int64_t amice_floor() const;  // min(0, min_n v(b_n) - v_p([n/p^h]!))

  // merge the polynomial part into the Mahler table (exact transform)
  LAFunction merged() const;

  std::string to_json() const;
  static LAFunction from_json(const std::string& text);
  // values f(0), ..., f(count-1) for human inspection
  std::vector<PadicNumber> mahler_table(std::int64_t count) const;

 private:
  std::int64_t p_;
  int h_;
  bool exact_;
  std::vector<PadicNumber> poly_;
  std::vector<PadicNumber> mahler_;
  std::optional<int> x_power_;  // asserted membership in x^{n1} LA_h
  void normalize();
};

LAFunction la_add(const LAFunction& f, const LAFunction& g);
LAFunction la_sub(const LAFunction& f, const LAFunction& g);
LAFunction la_scalar_mul(const LAFunction& f, const PadicNumber& c);
bool la_approx_equal(const LAFunction& f, const LAFunction& g);

// evaluation at a point of Z_p
PadicNumber evaluate(const LAFunction& f, const PadicNumber& a);

// psi(f)(x) = f(px); lowers the analyticity level when h >= 1
LAFunction la_psi(const LAFunction& f);
// phi(f)(x) = f(x/p) on pZ_p and 0 on Z_p^*; raises the level by one.
// Satisfies la_psi . la_phi = id on LA.
LAFunction la_phi(const LAFunction& f);
// The operator actually intertwined with phi by the Colmez transform on
// truncated principal parts: (1/p) * f(x/p) continued through the Mahler
// series (binom(x/p, n) makes sense off pZ_p).  C(phi f) = la_phi_transform(C f).
LAFunction la_phi_transform(const LAFunction& f);
// Colmez-transform-equivariant Gamma-action gamma*f = gamma^{-1} f(gamma^{-1}x),
// eigenvalue gamma^{-1-i} on x^i
LAFunction la_gamma(const PadicNumber& gamma, const LAFunction& f);

// multiplication by the identity function x, and its inverse on exact tables
LAFunction la_mul_by_x(const LAFunction& f);
LAFunction la_div_by_x(const LAFunction& f);  // requires exact Mahler, f(0) ~ 0
LAFunction la_mul_by_x_pow(const LAFunction& f, int k);

// C(f)(x) = Res(f (1+T)^x); kernel is exactly the nonnegative window.  The
// Mahler coefficients of C(f)(x+1) are the coefficients a_{-1-n} of f.
LAFunction colmez_transform(const RobbaElement& f, std::optional<int> h = {});

// section of C over Pol_{<=N}: the unique element of span{T^{-(i+1)}, i<=N}
// mapping to the given polynomial (monomial coefficients)
RobbaElement colmez_section(const std::vector<PadicNumber>& poly, std::int64_t p, int cap_n);

// Taylor jet of f at 0 up to order n_jets-1 (through psi^h descent; each
// order k costs h*k digits)
std::vector<PadicNumber> taylor_jets(const LAFunction& f, int n_jets);

// split f = Q + tail with Q in Pol_{<=N} and tail in x^{N+1} LA_h
struct SplitResult {
  std::vector<PadicNumber> poly;  // Q, degree <= N
  LAFunction tail;                // asserted member of x^{N+1} LA_h
};
SplitResult project_split(const LAFunction& f, int cap_n);

// x with (1 - lambda psi)x = y for y in x^{N+1} LA_h, |lambda p^{N+1}| < 1
LAFunction neumann_solve_psi_la(const PadicNumber& lambda, const LAFunction& y, int cap_n);

// [m]! as a PadicNumber (unit and valuation exact)
PadicNumber factorial_padic(std::int64_t p, std::int64_t m, int rel = kDefaultPrec);

}  // namespace phigamma

#endif
