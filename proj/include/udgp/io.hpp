#pragma once

// JSON and plain-text encodings of configurations and vectors.

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "udgp/domain.hpp"
#include "udgp/ingest.hpp"

namespace udgp {

using json = nlohmann::ordered_json;

inline json to_json(const PointConfig& c) {
  json j;
  j["geometry"] = to_string(c.geometry().kind());
  j["loop_length"] = c.geometry().is_loop() ? json(c.geometry().loop_length()) : json(nullptr);
  j["locations"] = c.locations();
  return j;
}

inline PointConfig config_from_json(const json& j) {
  try {
    const std::string g = j.at("geometry").get<std::string>();
    require(g == "line" || g == "loop", "geometry must be \"line\" or \"loop\"", ErrorCode::Data);
    const auto u = j.at("locations").get<std::vector<double>>();
    if (g == "line") return PointConfig(u, Geometry::line());
    require(j.contains("loop_length") && j["loop_length"].is_number(), "loop configuration needs loop_length",
            ErrorCode::Data);
    return PointConfig(u, Geometry::loop(j["loop_length"].get<double>()));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Data, std::string("bad configuration JSON: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::Data, e.what());
  }
}

inline json read_json(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open " + path, ErrorCode::Data);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Data, path + ": " + e.what());
  }
}

inline PointConfig read_config(const std::string& path) { return config_from_json(read_json(path)); }

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), "cannot write " + path, ErrorCode::Data);
  out << text;
  require(static_cast<bool>(out), "write failed: " + path, ErrorCode::Data);
}

/// Whitespace-separated decimals.
inline std::vector<double> parse_vector(std::istream& in, const std::string& source) {
  std::vector<double> v;
  std::string tok;
  while (in >> tok) {
    double d = 0.0;
    const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), d);
    require(r.ec == std::errc() && r.ptr == tok.data() + tok.size(),
            source + ": malformed number '" + tok + "' at entry " + std::to_string(v.size() + 1), ErrorCode::Data);
    v.push_back(d);
  }
  return v;
}

inline std::vector<double> read_vector(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open " + path, ErrorCode::Data);
  return parse_vector(in, path);
}

inline std::string format_vector(const std::vector<double>& v) {
  std::string s;
  for (double x : v) {
    s += format_double(x);
    s += '\n';
  }
  return s;
}

}  // namespace udgp
