#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "specflow/common.hpp"

namespace specflow {

// One check: empirical value against a theoretical value with an acceptance
// band. Informational rows use band == [empirical, empirical] and pass=true.
struct ReportRow {
  std::string check_name;
  std::string parameter;
  double theoretical;
  double empirical;
  double band_lo;
  double band_hi;
  bool pass;
};

struct Report {
  std::string command;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::string version = kVersion;
  double wall_time_seconds = 0.0;  // metadata only; excluded from equality
  std::vector<ReportRow> rows;
  nlohmann::json artifacts;  // emitted in the JSON format only

  bool passed() const;

  // Fixed column order:
  // check_name,parameter,theoretical,empirical,band_lo,band_hi,pass
  // Metadata lives in '#' comment lines so the body is byte-stable across
  // runs with the same (config, seed).
  std::string to_csv() const;

  nlohmann::json to_json() const;
  static Report from_json(const nlohmann::json& j);

  // Equality up to wall time.
  bool equivalent(const Report& other) const;
};

// Deterministic shortest-faithful float formatting shared by CSV and tests.
std::string format_double(double v);

std::uint64_t fnv1a_hash(const std::string& data);

}  // namespace specflow
