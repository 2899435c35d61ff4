#pragma once
// JSON round-trip for operator tuples and polynomial maps, plus an FNV-1a
// digest of tuple contents for self-describing reports.
//
// Tuple schema: {"n": int, "d": int, "label"?: string,
//                "matrices": n arrays of d rows of d [re, im] pairs}
// Map schema:   {"n": int, "m": int, "label"?: string,
//                "components": m arrays of {"word": [letters], "re", "im"}}

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <ncball/freemaps.hpp>
#include <ncball/optuple.hpp>

#include "json.hpp"

namespace ncball {

namespace iodetail {

inline nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open file for writing: " + path);
  out << text;
  if (!out) throw ParseError("write failed: " + path);
}

inline double require_number(const nlohmann::json& j, const std::string& at) {
  if (!j.is_number()) throw ParseError("expected a number at " + at);
  return j.get<double>();
}

inline std::int64_t require_int(const nlohmann::json& j,
                                const std::string& at) {
  if (!j.is_number_integer()) throw ParseError("expected an integer at " + at);
  return j.get<std::int64_t>();
}

inline const nlohmann::json& require_array(const nlohmann::json& j,
                                           const std::string& at) {
  if (!j.is_array()) throw ParseError("expected an array at " + at);
  return j;
}

inline cplx parse_entry(const nlohmann::json& j, const std::string& at) {
  require_array(j, at);
  if (j.size() != 2) throw ParseError("expected an [re, im] pair at " + at);
  return {require_number(j[0], at + "/0"), require_number(j[1], at + "/1")};
}

}  // namespace iodetail

inline OperatorTuple parse_tuple_json(const nlohmann::json& j) {
  using iodetail::require_array;
  using iodetail::require_int;
  if (!j.is_object()) throw ParseError("expected a JSON object at /");
  if (!j.contains("n") || !j.contains("d") || !j.contains("matrices"))
    throw ParseError("missing required field: need n, d, matrices at /");
  const std::int64_t n = require_int(j["n"], "/n");
  const std::int64_t d = require_int(j["d"], "/d");
  if (n < 1 || d < 1) throw DomainError("n and d must be >= 1");
  const nlohmann::json& mats = require_array(j["matrices"], "/matrices");
  if (static_cast<std::int64_t>(mats.size()) != n)
    throw DomainError("declared n = " + std::to_string(n) + " but found " +
                      std::to_string(mats.size()) + " matrices");
  std::vector<CMat> out;
  out.reserve(static_cast<size_t>(n));
  for (std::int64_t i = 0; i < n; ++i) {
    const std::string mat_at = "/matrices/" + std::to_string(i);
    const nlohmann::json& rows = require_array(mats[static_cast<size_t>(i)], mat_at);
    if (static_cast<std::int64_t>(rows.size()) != d)
      throw DomainError("matrix " + std::to_string(i) + " has " +
                        std::to_string(rows.size()) + " rows, expected " +
                        std::to_string(d));
    CMat M(d, d);
    for (std::int64_t r = 0; r < d; ++r) {
      const std::string row_at = mat_at + "/" + std::to_string(r);
      const nlohmann::json& row = require_array(rows[static_cast<size_t>(r)], row_at);
      if (static_cast<std::int64_t>(row.size()) != d)
        throw ParseError("malformed matrix row at " + row_at + ": has " +
                         std::to_string(row.size()) + " entries, expected " +
                         std::to_string(d));
      for (std::int64_t cidx = 0; cidx < d; ++cidx)
        M(r, cidx) = iodetail::parse_entry(row[static_cast<size_t>(cidx)],
                                           row_at + "/" + std::to_string(cidx));
    }
    out.push_back(std::move(M));
  }
  return make_tuple(std::move(out));
}

inline OperatorTuple load_tuple(const std::string& path) {
  return parse_tuple_json(iodetail::read_json_file(path));
}

inline nlohmann::ordered_json tuple_to_json(const OperatorTuple& t,
                                            const std::string& label = "") {
  nlohmann::ordered_json j;
  j["n"] = t.n;
  j["d"] = t.d;
  if (!label.empty()) j["label"] = label;
  nlohmann::ordered_json mats = nlohmann::ordered_json::array();
  for (const CMat& M : t.mats) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::int64_t r = 0; r < M.rows(); ++r) {
      nlohmann::ordered_json row = nlohmann::ordered_json::array();
      for (std::int64_t c = 0; c < M.cols(); ++c)
        row.push_back({M(r, c).real(), M(r, c).imag()});
      rows.push_back(std::move(row));
    }
    mats.push_back(std::move(rows));
  }
  j["matrices"] = std::move(mats);
  return j;
}

inline void save_tuple(const std::string& path, const OperatorTuple& t,
                       const std::string& label = "") {
  iodetail::write_text_file(path, tuple_to_json(t, label).dump(2) + "\n");
}

inline NcPolyMap parse_map_json(const nlohmann::json& j) {
  using iodetail::require_array;
  using iodetail::require_int;
  if (!j.is_object()) throw ParseError("expected a JSON object at /");
  if (!j.contains("n") || !j.contains("m") || !j.contains("components"))
    throw ParseError("missing required field: need n, m, components at /");
  const std::int64_t n = require_int(j["n"], "/n");
  const std::int64_t m = require_int(j["m"], "/m");
  if (n < 1 || m < 1) throw DomainError("n and m must be >= 1");
  const nlohmann::json& comps = require_array(j["components"], "/components");
  if (static_cast<std::int64_t>(comps.size()) != m)
    throw DomainError("declared m = " + std::to_string(m) + " but found " +
                      std::to_string(comps.size()) + " components");
  std::vector<NcPoly> components;
  for (std::int64_t ci = 0; ci < m; ++ci) {
    const std::string comp_at = "/components/" + std::to_string(ci);
    const nlohmann::json& comp = require_array(comps[static_cast<size_t>(ci)], comp_at);
    NcPoly poly;
    for (size_t ti = 0; ti < comp.size(); ++ti) {
      const std::string term_at = comp_at + "/" + std::to_string(ti);
      const nlohmann::json& term = comp[ti];
      if (!term.is_object() || !term.contains("word") ||
          !term.contains("re") || !term.contains("im"))
        throw ParseError("expected {word, re, im} at " + term_at);
      Word w;
      const nlohmann::json& letters =
          require_array(term["word"], term_at + "/word");
      for (size_t li = 0; li < letters.size(); ++li)
        w.push_back(static_cast<int>(require_int(
            letters[li], term_at + "/word/" + std::to_string(li))));
      poly.emplace_back(std::move(w),
                        cplx(iodetail::require_number(term["re"], term_at + "/re"),
                             iodetail::require_number(term["im"], term_at + "/im")));
    }
    components.push_back(std::move(poly));
  }
  return make_map(static_cast<int>(n), std::move(components));
}

inline NcPolyMap load_map(const std::string& path) {
  return parse_map_json(iodetail::read_json_file(path));
}

inline nlohmann::ordered_json map_to_json(const NcPolyMap& f,
                                          const std::string& label = "") {
  nlohmann::ordered_json j;
  j["n"] = f.n;
  j["m"] = f.m;
  if (!label.empty()) j["label"] = label;
  nlohmann::ordered_json comps = nlohmann::ordered_json::array();
  for (const NcPoly& c : f.components) {
    nlohmann::ordered_json terms = nlohmann::ordered_json::array();
    for (const auto& [w, coeff] : c) {
      nlohmann::ordered_json term;
      term["word"] = w;
      term["re"] = coeff.real();
      term["im"] = coeff.imag();
      terms.push_back(std::move(term));
    }
    comps.push_back(std::move(terms));
  }
  j["components"] = std::move(comps);
  return j;
}

inline void save_map(const std::string& path, const NcPolyMap& f,
                     const std::string& label = "") {
  iodetail::write_text_file(path, map_to_json(f, label).dump(2) + "\n");
}

// FNV-1a over the tuple's shape and raw coefficient bytes, rendered as
// 16 hex digits; stable across runs and platforms of equal endianness.
inline std::string tuple_digest(const OperatorTuple& t) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, size_t len) {
    const unsigned char* b = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  const std::int64_t n = t.n, d = t.d;
  mix(&n, sizeof n);
  mix(&d, sizeof d);
  for (const CMat& M : t.mats)
    for (std::int64_t c = 0; c < M.cols(); ++c)
      for (std::int64_t r = 0; r < M.rows(); ++r) {
        const double re = M(r, c).real(), im = M(r, c).imag();
        mix(&re, sizeof re);
        mix(&im, sizeof im);
      }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace ncball
