#ifndef PHIGAMMA_ROBBA_HPP
#define PHIGAMMA_ROBBA_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phigamma/padic.hpp"

namespace phigamma {

// Raised when a window or precision ladder is too small to certify a result.
struct PrecisionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Truncated Laurent model of elements of R+, R and E^I.
//
// Window semantics: coefficients of T^n are exactly zero for n < m_lo (hard
// support bound) and stored for m_lo <= n <= m_hi.  Above m_hi they are
// exactly zero when tail_exact() holds (polynomial-like element) and unknown
// otherwise.  Operations only ever keep provably-known coefficients; windows
// shrink according to the laws documented at each operation.
class RobbaElement {
 public:
  RobbaElement() : p_(0), lo_(0), hi_(-1), exact_(true) {}  // exact zero

  static RobbaElement zero(std::int64_t p);
  static RobbaElement one(std::int64_t p);
  static RobbaElement monomial(std::int64_t p, std::int64_t n, const PadicNumber& c);
  static RobbaElement monomial_int(std::int64_t p, std::int64_t n, std::int64_t c = 1);
  static RobbaElement one_plus_T(std::int64_t p);
  // build from explicit coefficients for [lo, lo+len)
  static RobbaElement from_coeffs(std::int64_t p, std::int64_t lo,
                                  std::vector<PadicNumber> coeffs, bool tail_exact);

  std::int64_t prime() const { return p_; }
  std::int64_t lo() const { return lo_; }
  std::int64_t hi() const { return hi_; }
  bool tail_exact() const { return exact_; }
  bool window_empty() const { return hi_ < lo_; }
  std::optional<int> annulus() const { return annulus_; }
  void set_annulus(int n0);  // validates v(a_{-k}) >= ceil(k/n0)

  // exact zero below lo; throws std::out_of_range above hi unless tail_exact
  PadicNumber coeff(std::int64_t n) const;
  bool coeff_known(std::int64_t n) const;

  bool is_zero_ish() const;  // every known coefficient indistinguishable from 0
  // least valuation among certifiably nonzero coefficients, 0 if none below 0
  std::int64_t height() const;
  std::int64_t min_abs_prec() const;

  RobbaElement truncated(std::int64_t new_hi) const;
  RobbaElement with_tail_unknown() const;
  // extend an exact tail into explicit zero coefficients up to new_hi, then
  // forget exactness (the usual way to put a polynomial on a working window)
  RobbaElement padded(std::int64_t new_hi) const;
  RobbaElement shift(std::int64_t k) const;  // multiply by T^k (exact)
  RobbaElement scalar_mul(const PadicNumber& c) const;

  std::string to_string() const;
  static RobbaElement parse(std::int64_t p, const std::string& text);
  std::string to_json() const;
  static RobbaElement from_json(const std::string& text);

 private:
  std::int64_t p_;
  std::int64_t lo_, hi_;
  bool exact_;
  std::optional<int> annulus_;
  std::vector<PadicNumber> c_;  // c_[k] <-> coefficient of T^{lo_+k}
  void normalize();
  friend RobbaElement add(const RobbaElement&, const RobbaElement&);
  friend RobbaElement mul(const RobbaElement&, const RobbaElement&);
};

RobbaElement add(const RobbaElement& f, const RobbaElement& g);
RobbaElement sub(const RobbaElement& f, const RobbaElement& g);
RobbaElement neg(const RobbaElement& f);
// window law: lo = lo_f + lo_g, hi = min(hi_f + lo_g, hi_g + lo_f); an exact
// tail lifts its side of the min, two exact tails give an exact product
RobbaElement mul(const RobbaElement& f, const RobbaElement& g);

bool approx_equal(const RobbaElement& f, const RobbaElement& g);

// inverse of f with unit constant term and m_lo = 0, solved coefficientwise;
// out_hi extends the window beyond hi(f) when the input tail is exact
RobbaElement unit_inverse(const RobbaElement& f, std::optional<std::int64_t> out_hi = {});

// f((1+T)^p - 1); requires m_lo >= 0.  Image coefficients up to hi(f) are
// determined, so phi descends to level-M truncations.
RobbaElement phi(const RobbaElement& f);
// Laurent variant used by the cohomology oracle; pole order k costs k digits
// of p-precision through the 1/((1+T)^p-1) expansion.
RobbaElement phi_laurent(const RobbaElement& f);

// semilinear action f(gamma(T)), gamma(T) = (1+T)^gamma - 1.  Negative powers
// go through gamma(T)^{-1} = T^{-1} * unit_inverse(gamma(T)/T).
RobbaElement gamma_act(const PadicNumber& gamma, const RobbaElement& f,
                       std::optional<std::int64_t> out_hi = {});

// left inverse of phi: psi(sum_{i<p} (1+T)^i phi(f_i)) = f_0.  Window ladder:
// a level-M truncation certifies the result on level floor((M-(p-1))/p)
// (Laurent poles are first cleared by phi(T^L) which deepens the ladder), and
// coefficients near the boundary carry reduced p-precision from the unknown
// tail.  A tail-exact input is computed exactly.
RobbaElement psi(const RobbaElement& f);
// all p components of the phi-decomposition, same ladder as psi
std::vector<RobbaElement> psi_decompose(const RobbaElement& f);

// coefficient a_{-1} of f/(1+T)
PadicNumber residue(const RobbaElement& f);

// t = log(1+T) truncated at window hi
RobbaElement log_one_plus_T(std::int64_t p, std::int64_t hi);

// G_gamma(x) = T x + (1+T)((gamma-1)(x))
RobbaElement g_gamma(const PadicNumber& gamma, const RobbaElement& x);

// |f|_{[0, p^-q]}-style sup norm at radius p^{-q}, q = q_num/q_den >= 0.
struct GaussNorm {
  std::int64_t q_num = 0;
  std::int64_t q_den = 1;
  bool is_zero = true;           // value 0 (no certifiably nonzero coefficient)
  std::int64_t exp_num = 0;      // value = p^{exp_num / q_den} otherwise
};
GaussNorm gauss_norm(const RobbaElement& f, std::int64_t q_num, std::int64_t q_den = 1);
bool gauss_leq(const GaussNorm& a, const GaussNorm& b);

// x with (1 - lambda*phi)(x) = y for y in T^shift R+, |lambda p^shift| < 1.
RobbaElement neumann_solve_phi(const PadicNumber& lambda, const RobbaElement& y,
                               std::int64_t shift);

// x with (1 - lambda*psi)(x) = y for y in R+, via the descending recursion on
// (lambda psi - 1)(T phi(T^i)) = -lambda T^i - T phi(T)^i plus a phi-Neumann
// tail.
RobbaElement psi_surjectivity_solve(const PadicNumber& lambda, const RobbaElement& y);

// (1+T)^p - 1 and its exact integer powers
RobbaElement phi_of_T(std::int64_t p);
RobbaElement phi_of_T_pow(std::int64_t p, std::int64_t k);

// guard: odd p unless explicitly allowed
void require_odd_prime(std::int64_t p, bool allow_p2 = false);

}  // namespace phigamma

#endif
