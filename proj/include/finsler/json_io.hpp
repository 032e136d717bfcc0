#pragma once

#include <json.hpp>
#include <string>

#include "finsler/report.hpp"

namespace finsler {

inline nlohmann::json to_json(const VerificationReport& r) {
  nlohmann::json j;
  j["check"] = r.check;
  j["samples"] = r.sample_count;
  j["max_residual"] = r.max_residual;
  j["mean_residual"] = r.mean_residual;
  j["tolerance"] = r.tolerance;
  j["pass"] = r.pass;
  j["failures"] = nlohmann::json::array();
  for (const auto& f : r.failures) j["failures"].push_back({{"x", f.x}, {"y", f.y}, {"residual", f.residual}});
  for (const auto& [k, v] : r.stats) j["stats"][k] = v;
  return j;
}

}  // namespace finsler
