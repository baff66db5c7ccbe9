#ifndef PHIGAMMA_COHOMOLOGY_HPP
#define PHIGAMMA_COHOMOLOGY_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phigamma/character.hpp"
#include "phigamma/iwasawa.hpp"
#include "phigamma/linalg.hpp"
#include "phigamma/robba.hpp"

namespace phigamma {

// integer lift of a topological generator of Z_p^* (primitive root g with
// g^{p-1} generating 1 + pZ_p)
std::int64_t full_generator(std::int64_t p);

// (phi, gamma)-module presented by matrices over Robba entries in a fixed
// basis; upper triangular for trianguline modules, diagonal delta_i values
struct ModuleData {
  std::int64_t p = 0;
  int rank = 0;
  std::vector<std::vector<RobbaElement>> phi_mat;
  std::vector<std::vector<RobbaElement>> gamma_mat;  // action of full_generator(p)
  std::vector<Character> params;                     // diagonal characters when trianguline

  static ModuleData rank1(const Character& delta);
  static ModuleData direct_sum(const ModuleData& a, const ModuleData& b);
};

using RobbaVec = std::vector<RobbaElement>;

RobbaVec vec_add(const RobbaVec& a, const RobbaVec& b);
RobbaVec vec_sub(const RobbaVec& a, const RobbaVec& b);
bool vec_zero_ish(const RobbaVec& a);

// semilinear operators of D from the matrices; out_hi extends exact inputs
// to the requested working window
RobbaVec apply_phi(const ModuleData& m, const RobbaVec& v,
                   std::optional<std::int64_t> out_hi = {});
RobbaVec apply_psi(const ModuleData& m, const RobbaVec& v);
RobbaVec apply_gamma(const ModuleData& m, const RobbaVec& v,
                     std::optional<std::int64_t> out_hi = {});  // full generator

// one truncation level of the Herr complex
struct OracleLevel {
  std::int64_t lo = -4;
  std::int64_t hi = 60;
  int n_prec = kDefaultPrec;
};

struct LevelRecord {
  OracleLevel level;
  int h0 = -1, h1 = -1, h2 = -1;
  bool margin_ok = false;
  std::string note;
};

struct StabilizationCert {
  std::vector<LevelRecord> records;
  bool stabilized = false;
  std::string to_json() const;
};

struct CohomologyResult {
  int h0 = -1, h1 = -1, h2 = -1;
  std::string route;  // "analytic" | "oracle"
  Trilean decided = Trilean::kIndeterminate;
  StabilizationCert cert;
  // 1-cocycle generators (x, y) of H^1 when available
  std::vector<std::pair<RobbaVec, RobbaVec>> h1_generators;
  std::string note;
};

enum class ComplexKind { kPhiGamma, kPsiGamma };

std::vector<OracleLevel> default_schedule(std::int64_t lo = -4, std::int64_t base_hi = 192,
                                          int steps = 3, int n_prec = kDefaultPrec);

// kernel/cokernel dimensions of the truncated Herr complex through Smith
// normal form over Z/p^N, with the N/2 margin rule and the two-consecutive-
// levels stabilization protocol
CohomologyResult herr_oracle(const ModuleData& m, const std::vector<OracleLevel>& schedule,
                             ComplexKind kind = ComplexKind::kPsiGamma);

// closed forms for R(delta)
CohomologyResult h0_rank1(const Character& delta);
CohomologyResult h2_rank1(const Character& delta);
CohomologyResult h1_rank1(const Character& delta, const std::vector<OracleLevel>& schedule);

// analytic dimensions for a trianguline module with regular parameter tuple
CohomologyResult analytic_dims(const ModuleData& m, const std::vector<OracleLevel>& schedule);

// Euler characteristic h0 - h1 + h2 from the oracle
int euler_characteristic(const ModuleData& m, const std::vector<OracleLevel>& schedule);

// the H^1(R(delta)) generator transported from the class of 1+T:
// w = (prod of T_{delta x^i} over obstructed i) * (1+T) in C(D+),
// y = (1-phi_delta)^{-1} w in D^{psi_delta=1}, a = (gamma_delta-1)^{-1}(-w)
struct H1Generator {
  RobbaElement w;
  RobbaElement y;
  RobbaElement a;
  std::string note;
};
H1Generator h1_generator_regular(const Character& delta, std::int64_t hi);

// 1-cocycle (x, y) in Z^1(C_{phi,gamma}) for a multiple of the regular
// generator class; (0,0) for the zero class
std::pair<RobbaElement, RobbaElement> ext_class_to_cocycle(const PadicNumber& cls,
                                                           const Character& delta,
                                                           std::int64_t hi);

// residual of the cocycle condition (gamma-1)x - (phi-1)y
RobbaElement cocycle_residual(const Character& delta, const RobbaElement& x,
                              const RobbaElement& y);

// report of the quasi-isomorphism checks: solve (gamma-1)x = y on D^{psi=0}
// for random y, and compare the two complexes' oracle dimensions
struct QuasiIsoReport {
  bool gamma_solves_ok = false;
  int trials = 0;
  bool dims_agree = false;
  CohomologyResult phi_dims;
  CohomologyResult psi_dims;
};
QuasiIsoReport quasi_iso_check(const ModuleData& m, const std::vector<OracleLevel>& schedule,
                               int trials, std::uint64_t seed);

// solve (gamma_full - 1) x = y within D^{psi=0} on the window; nullopt when
// the truncated system is inconsistent at precision
std::optional<RobbaVec> solve_gamma_minus_one(const ModuleData& m, const RobbaVec& y,
                                              const OracleLevel& level);

// H^1 cocycle representatives extracted from the kernel of the truncated d^1,
// filtered against the image of d^0 (used at the special points)
std::vector<std::pair<RobbaVec, RobbaVec>> oracle_h1_generators(const ModuleData& m,
                                                                const OracleLevel& level,
                                                                int count);

}  // namespace phigamma

#endif
