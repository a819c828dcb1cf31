#include "mustab/system_file.hpp"

#include <fstream>
#include <sstream>

namespace mustab {

namespace {

Rational rational_field(const nlohmann::ordered_json& v, const std::string& where) {
  if (v.is_string()) {
    try {
      return parse_rational(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
      throw SystemFileError(where + ": " + e.what());
    }
  }
  if (v.is_number_integer()) return Rational(v.get<long long>());
  throw SystemFileError(where + ": expected a rational string \"p/q\"");
}

const nlohmann::ordered_json& required(const nlohmann::ordered_json& doc, const char* key) {
  if (!doc.contains(key)) throw SystemFileError(std::string("missing field \"") + key + "\"");
  return doc.at(key);
}

}  // namespace

const EndoMap& SystemFile::map(const std::string& name) const {
  auto it = maps.find(name);
  if (it == maps.end()) throw SystemFileError("no map named \"" + name + "\"");
  return it->second;
}

const Measure& SystemFile::measure(const std::string& name) const {
  auto it = measures.find(name);
  if (it == measures.end()) throw SystemFileError("no measure named \"" + name + "\"");
  return it->second;
}

SystemFile parse_system(const nlohmann::ordered_json& doc) {
  if (!doc.is_object()) throw SystemFileError("system file must be a JSON object");
  const auto& points = required(doc, "points");
  const auto& metric = required(doc, "metric");
  if (!points.is_array()) throw SystemFileError("\"points\" must be an array");
  if (!metric.is_array()) throw SystemFileError("\"metric\" must be an array of rows");

  std::vector<std::string> labels;
  for (const auto& p : points) {
    if (!p.is_string()) throw SystemFileError("point labels must be strings");
    labels.push_back(p.get<std::string>());
  }
  std::vector<std::vector<Rational>> dist;
  for (std::size_t i = 0; i < metric.size(); ++i) {
    const auto& row = metric[i];
    if (!row.is_array()) throw SystemFileError("metric row " + std::to_string(i) + " is not an array");
    std::vector<Rational> r;
    for (std::size_t j = 0; j < row.size(); ++j) {
      r.push_back(rational_field(row[j], "metric[" + std::to_string(i) + "][" + std::to_string(j) + "]"));
    }
    dist.push_back(std::move(r));
  }
  SystemFile sys{FiniteMetricSpace::validate(std::move(labels), std::move(dist)), {}, {}, std::nullopt};
  const std::size_t n = sys.space.size();

  if (doc.contains("maps")) {
    const auto& maps = doc.at("maps");
    if (!maps.is_object()) throw SystemFileError("\"maps\" must be an object");
    for (const auto& [name, table] : maps.items()) {
      if (!table.is_array() || table.size() != n) {
        throw SystemFileError("map \"" + name + "\" must list " + std::to_string(n) + " point indices");
      }
      std::vector<Point> t;
      for (const auto& v : table) {
        if (!v.is_number_integer() || v.get<long long>() < 0) {
          throw SystemFileError("map \"" + name + "\" has a non-index entry");
        }
        t.push_back(v.get<Point>());
      }
      try {
        sys.maps.emplace(name, EndoMap(std::move(t)));
      } catch (const OutOfRange& e) {
        throw SystemFileError("map \"" + name + "\": " + e.what());
      }
    }
  }
  if (doc.contains("measures")) {
    const auto& measures = doc.at("measures");
    if (!measures.is_object()) throw SystemFileError("\"measures\" must be an object");
    for (const auto& [name, weights] : measures.items()) {
      if (!weights.is_array() || weights.size() != n) {
        throw SystemFileError("measure \"" + name + "\" must list " + std::to_string(n) + " weights");
      }
      std::vector<Rational> w;
      for (std::size_t i = 0; i < weights.size(); ++i) {
        w.push_back(rational_field(weights[i], "measure \"" + name + "\"[" + std::to_string(i) + "]"));
      }
      try {
        sys.measures.emplace(name, Measure::from_weights(std::move(w)));
      } catch (const InvalidMeasure& e) {
        throw SystemFileError("measure \"" + name + "\": " + e.what());
      }
    }
  }
  if (doc.contains("generator")) sys.generator = doc.at("generator");
  return sys;
}

SystemFile parse_system_text(const std::string& text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::ordered_json::parse_error& e) {
    throw SystemFileError(std::string("malformed JSON: ") + e.what());
  }
  return parse_system(doc);
}

SystemFile load_system(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SystemFileError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_system_text(buf.str());
}

nlohmann::ordered_json render_system(const SystemFile& system) {
  nlohmann::ordered_json doc;
  if (system.generator) doc["generator"] = *system.generator;
  doc["points"] = system.space.labels();
  auto metric = nlohmann::ordered_json::array();
  for (const auto& row : system.space.matrix()) {
    auto r = nlohmann::ordered_json::array();
    for (const auto& d : row) r.push_back(format_rational(d));
    metric.push_back(std::move(r));
  }
  doc["metric"] = std::move(metric);
  auto maps = nlohmann::ordered_json::object();
  for (const auto& [name, f] : system.maps) maps[name] = f.table();
  doc["maps"] = std::move(maps);
  auto measures = nlohmann::ordered_json::object();
  for (const auto& [name, mu] : system.measures) {
    auto w = nlohmann::ordered_json::array();
    for (const auto& x : mu.weights()) w.push_back(format_rational(x));
    measures[name] = std::move(w);
  }
  doc["measures"] = std::move(measures);
  return doc;
}

std::string render_system_text(const SystemFile& system) { return render_system(system).dump(2) + "\n"; }

}  // namespace mustab
