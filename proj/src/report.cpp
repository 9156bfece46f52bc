#include "specflow/report.hpp"

#include <cstdio>
#include <sstream>

namespace specflow {

bool Report::passed() const {
  for (const auto& r : rows)
    if (!r.pass) return false;
  return true;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a_hash(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

std::string sanitize(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c == ',' || c == '\n') c = ';';
  return out;
}

}  // namespace

std::string Report::to_csv() const {
  std::ostringstream os;
  os << "# specflow " << version << "\n";
  os << "# command: " << command << "\n";
  os << "# config_hash: " << config_hash << "\n";
  os << "# seed: " << seed << "\n";
  os << "# wall_time_s: " << format_double(wall_time_seconds) << "\n";
  os << "check_name,parameter,theoretical,empirical,band_lo,band_hi,pass\n";
  for (const auto& r : rows) {
    os << sanitize(r.check_name) << ',' << sanitize(r.parameter) << ','
       << format_double(r.theoretical) << ',' << format_double(r.empirical) << ','
       << format_double(r.band_lo) << ',' << format_double(r.band_hi) << ','
       << (r.pass ? "true" : "false") << '\n';
  }
  return os.str();
}

nlohmann::json Report::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"check_name", r.check_name},
                         {"parameter", r.parameter},
                         {"theoretical", r.theoretical},
                         {"empirical", r.empirical},
                         {"band_lo", r.band_lo},
                         {"band_hi", r.band_hi},
                         {"pass", r.pass}});
  }
  nlohmann::json j{{"metadata",
                    {{"command", command},
                     {"config_hash", config_hash},
                     {"seed", seed},
                     {"version", version},
                     {"wall_time_s", wall_time_seconds}}},
                   {"rows", std::move(rows_json)}};
  if (!artifacts.is_null()) j["artifacts"] = artifacts;
  return j;
}

Report Report::from_json(const nlohmann::json& j) {
  try {
    Report r;
    const auto& md = j.at("metadata");
    r.command = md.at("command").get<std::string>();
    r.config_hash = md.at("config_hash").get<std::uint64_t>();
    r.seed = md.at("seed").get<std::uint64_t>();
    r.version = md.at("version").get<std::string>();
    r.wall_time_seconds = md.at("wall_time_s").get<double>();
    for (const auto& e : j.at("rows")) {
      r.rows.push_back({e.at("check_name").get<std::string>(),
                        e.at("parameter").get<std::string>(),
                        e.at("theoretical").get<double>(), e.at("empirical").get<double>(),
                        e.at("band_lo").get<double>(), e.at("band_hi").get<double>(),
                        e.at("pass").get<bool>()});
    }
    if (j.contains("artifacts")) r.artifacts = j.at("artifacts");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad report JSON: ") + e.what());
  }
}

bool Report::equivalent(const Report& other) const {
  if (command != other.command || config_hash != other.config_hash || seed != other.seed ||
      version != other.version || rows.size() != other.rows.size())
    return false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& a = rows[i];
    const auto& b = other.rows[i];
    if (a.check_name != b.check_name || a.parameter != b.parameter ||
        a.theoretical != b.theoretical || a.empirical != b.empirical ||
        a.band_lo != b.band_lo || a.band_hi != b.band_hi || a.pass != b.pass)
      return false;
  }
  return true;
}

}  // namespace specflow
