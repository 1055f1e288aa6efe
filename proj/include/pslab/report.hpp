#pragma once

// Report emission: RatioReport to JSON and CSV (one row per member), run
// manifests with a config hash, and the CSV column schema written alongside.

#include <filesystem>
#include <iomanip>

#include <json.hpp>

#include "pslab/estimates.hpp"

namespace pslab {

using ordered_json = nlohmann::ordered_json;

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// FNV-1a, stable across platforms, used for config hashes.
inline std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline ordered_json ratio_report_json(const RatioReport& rep) {
  ordered_json j;
  j["inequality"] = rep.inequality;
  j["family"] = rep.family;
  j["sup_ratio"] = rep.sup_ratio();
  j["spread"] = rep.spread();
  ordered_json meta = ordered_json::object();
  for (const auto& [k, v] : rep.metadata) meta[k] = v;
  j["metadata"] = meta;
  ordered_json members = ordered_json::array();
  for (const auto& m : rep.members) {
    ordered_json e;
    e["label"] = m.label;
    e["lhs"] = m.lhs;
    e["rhs"] = m.rhs;
    e["ratio"] = m.ratio;
    ordered_json params = ordered_json::object();
    for (const auto& [k, v] : m.params) params[k] = v;
    e["params"] = params;
    members.push_back(e);
  }
  j["members"] = members;
  return j;
}

inline void write_ratio_csv(const RatioReport& rep, std::ostream& os) {
  os << "inequality,member,lhs,rhs,ratio\n";
  for (const auto& m : rep.members)
    os << '"' << rep.inequality << "\",\"" << m.label << "\"," << format_double(m.lhs) << ','
       << format_double(m.rhs) << ',' << format_double(m.ratio) << '\n';
}

inline void write_csv_schema(std::ostream& os) {
  ordered_json schema;
  schema["columns"] = ordered_json::array({
      ordered_json{{"name", "inequality"}, {"type", "string"}, {"doc", "identifier of the estimate being swept"}},
      ordered_json{{"name", "member"}, {"type", "string"}, {"doc", "family member label"}},
      ordered_json{{"name", "lhs"}, {"type", "double"}, {"doc", "left-hand side norm"}},
      ordered_json{{"name", "rhs"}, {"type", "double"}, {"doc", "right-hand side norm"}},
      ordered_json{{"name", "ratio"}, {"type", "double"}, {"doc", "lhs / rhs; 0 when both sides vanish"}},
  });
  os << schema.dump(2) << '\n';
}

}  // namespace pslab
