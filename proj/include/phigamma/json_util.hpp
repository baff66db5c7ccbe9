#ifndef PHIGAMMA_JSON_UTIL_HPP
#define PHIGAMMA_JSON_UTIL_HPP

#include <json.hpp>

#include "phigamma/padic.hpp"

namespace phigamma {

inline nlohmann::json scalar_to_json(const PadicNumber& a) {
  nlohmann::json e;
  if (a.is_exact_zero()) {
    e["zero"] = true;
  } else if (a.is_zero_ish()) {
    e["zero_at"] = a.abs_prec();
  } else {
    e["v"] = a.valuation();
    e["u"] = a.unit();
    e["r"] = a.rel_prec();
  }
  return e;
}

inline PadicNumber scalar_from_json(std::int64_t p, const nlohmann::json& e) {
  if (e.contains("zero")) return PadicNumber::zero(p);
  if (e.contains("zero_at")) return PadicNumber::zero_at(p, e.at("zero_at").get<std::int64_t>());
  return PadicNumber::from_parts(p, e.at("v").get<std::int64_t>(), e.at("u").get<std::uint64_t>(),
                                 e.at("r").get<int>());
}

}  // namespace phigamma

#endif
