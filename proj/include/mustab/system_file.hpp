#pragma once

// JSON system files:
//   {"points": [string], "metric": [["p/q", ...], ...],
//    "maps": {name: [int]}, "measures": {name: ["p/q", ...]}}
// An optional "generator" object records how a generated file was made.

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "mustab/metric_core.hpp"

namespace mustab {

class SystemFileError : public Error {
 public:
  using Error::Error;
};

struct SystemFile {
  FiniteMetricSpace space;
  std::map<std::string, EndoMap> maps;
  std::map<std::string, Measure> measures;
  std::optional<nlohmann::ordered_json> generator;

  const EndoMap& map(const std::string& name) const;
  const Measure& measure(const std::string& name) const;

  friend bool operator==(const SystemFile&, const SystemFile&) = default;
};

/// Throws SystemFileError for structural problems and MetricError when the
/// matrix is not a metric.
SystemFile parse_system(const nlohmann::ordered_json& doc);
SystemFile parse_system_text(const std::string& text);
SystemFile load_system(const std::filesystem::path& path);

nlohmann::ordered_json render_system(const SystemFile& system);
/// Pretty-printed with two-space indent and a trailing newline.
std::string render_system_text(const SystemFile& system);

}  // namespace mustab
