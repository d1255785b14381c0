#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "gkld/kld.hpp"
#include "gkld/oracle.hpp"

namespace gkld {

using json = nlohmann::json;

/// Instance-file parse failure; what() names the offending field.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Instance {
  std::string name;
  GaussianPair pair;
};

namespace detail {

inline Vector parse_vector(const json& j, const std::string& field, Index n) {
  if (!j.is_array() || static_cast<Index>(j.size()) != n)
    throw ParseError("field '" + field + "': expected array of " +
                     std::to_string(n) + " numbers");
  Vector v(n);
  for (Index i = 0; i < n; ++i) {
    if (!j[i].is_number())
      throw ParseError("field '" + field + "[" + std::to_string(i) +
                       "]': expected a number");
    v(i) = j[i].get<double>();
  }
  return v;
}

/// Matrices are row-major arrays-of-rows in the file; internal storage is
/// column-major, so the transpose-free element write below is the boundary
/// conversion.
inline Matrix parse_matrix(const json& j, const std::string& field, Index n) {
  if (!j.is_array() || static_cast<Index>(j.size()) != n)
    throw ParseError("field '" + field + "': expected " + std::to_string(n) +
                     " rows");
  Matrix m(n, n);
  for (Index i = 0; i < n; ++i) {
    if (!j[i].is_array() || static_cast<Index>(j[i].size()) != n)
      throw ParseError("field '" + field + "[" + std::to_string(i) +
                       "]': expected a row of " + std::to_string(n) +
                       " numbers");
    for (Index k = 0; k < n; ++k) {
      if (!j[i][k].is_number())
        throw ParseError("field '" + field + "[" + std::to_string(i) + "][" +
                         std::to_string(k) + "]': expected a number");
      m(i, k) = j[i][k].get<double>();
    }
  }
  return m;
}

}  // namespace detail

inline Instance parse_instance(const json& doc) {
  if (!doc.is_object()) throw ParseError("instance: expected a JSON object");
  if (!doc.contains("n") || !doc["n"].is_number_integer())
    throw ParseError("field 'n': expected a positive integer");
  const Index n = doc["n"].get<Index>();
  if (n < 1) throw ParseError("field 'n': expected a positive integer");
  for (const char* field : {"m", "w", "S", "V"})
    if (!doc.contains(field))
      throw ParseError(std::string("field '") + field + "': missing");
  Instance inst;
  inst.name = doc.value("name", "");
  inst.pair.n = n;
  inst.pair.m = detail::parse_vector(doc["m"], "m", n);
  inst.pair.w = detail::parse_vector(doc["w"], "w", n);
  inst.pair.S = detail::parse_matrix(doc["S"], "S", n);
  inst.pair.V = detail::parse_matrix(doc["V"], "V", n);
  return inst;
}

inline Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open instance file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ParseError("invalid JSON in " + path + ": " + e.what());
  }
  Instance inst = parse_instance(doc);
  if (inst.name.empty()) inst.name = path;
  return inst;
}

// ---------------------------------------------------------------------------
// Output documents (schema frozen in FORMAT.md)
// ---------------------------------------------------------------------------

inline json to_json(const Vector& v) {
  json data = json::array();
  for (Index i = 0; i < v.size(); ++i) data.push_back(v(i));
  return json{{"len", v.size()}, {"data", data}};
}

/// Matrices serialize row-major with explicit shape.
inline json to_json(const Matrix& m) {
  json data = json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

inline json to_json(const CheckReport& r) {
  return json{{"name", r.name},
              {"passed", r.passed},
              {"observed_error", r.observed_error},
              {"tolerance", r.tolerance},
              {"details", r.details}};
}

inline const char* basis_name(Basis b) {
  return b == Basis::Vec ? "vec" : "vech";
}

inline json output_document(const std::string& command,
                            const std::string& instance, json payload,
                            json config = json::object()) {
  return json{{"command", command},
              {"version", kVersion},
              {"instance", instance},
              {"config", std::move(config)},
              {"payload", std::move(payload)}};
}

}  // namespace gkld
