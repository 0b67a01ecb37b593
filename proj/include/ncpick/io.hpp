#pragma once

// JSON encoding shared by every artifact: complex scalars are [re, im],
// matrices are row-major nested arrays of complex scalars.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ncpick/cauchy.hpp"
#include "ncpick/herglotz.hpp"

namespace ncpick::io {

using json = nlohmann::json;

/// Malformed or inconsistent input file.
class InputError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Adding 0.0 turns -0.0 into 0.0.
inline json to_json(cplx c) { return json::array({c.real() + 0.0, c.imag() + 0.0}); }

inline cplx complex_from_json(const json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw InputError("complex scalar must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json to_json(const Mat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Mat matrix_from_json(const json& j) {
  if (!j.is_array()) throw InputError("matrix must be an array of rows");
  if (j.empty()) return Mat(0, 0);
  const auto rows = static_cast<Eigen::Index>(j.size());
  if (!j[0].is_array()) throw InputError("matrix rows must be arrays");
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const json& row = j[static_cast<size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw InputError("matrix rows must have equal length");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = complex_from_json(row[static_cast<size_t>(k)]);
  }
  return m;
}

inline json to_json(const AlgebraSpec& s) { return json{{"blocks", s.blocks()}}; }

inline AlgebraSpec spec_from_json(const json& j) {
  if (!j.is_object() || !j.contains("blocks") || !j["blocks"].is_array()) throw InputError("AlgebraSpec must be {\"blocks\": [...]}");
  std::vector<int> blocks;
  for (const auto& b : j["blocks"]) {
    if (!b.is_number_integer()) throw InputError("AlgebraSpec blocks must be integers");
    blocks.push_back(b.get<int>());
  }
  try {
    return AlgebraSpec(blocks);
  } catch (const InvalidArgument& e) {
    throw InputError(e.what());
  }
}

inline json to_json(const MatPoint& x) {
  json grid = json::array();
  for (int i = 0; i < x.level(); ++i) {
    json row = json::array();
    for (int k = 0; k < x.level(); ++k) row.push_back(to_json(x.at(i, k).data()));
    grid.push_back(std::move(row));
  }
  return json{{"spec", to_json(x.spec())}, {"level", x.level()}, {"grid", std::move(grid)}};
}

/// Missing "spec" falls back to `fallback` (the model's B, typically).
inline MatPoint point_from_json(const json& j, const AlgebraSpec* fallback = nullptr) {
  if (!j.is_object() || !j.contains("grid")) throw InputError("MatPoint must be {\"level\": n, \"grid\": [...]}");
  AlgebraSpec spec = j.contains("spec") ? spec_from_json(j["spec"]) : (fallback ? *fallback : AlgebraSpec());
  const json& g = j["grid"];
  if (!g.is_array() || g.empty()) throw InputError("MatPoint grid must be a non-empty array");
  const int n = static_cast<int>(g.size());
  if (j.contains("level") && (!j["level"].is_number_integer() || j["level"].get<int>() != n))
    throw InputError("MatPoint level does not match grid size");
  std::vector<AlgElement> grid;
  try {
    for (const auto& row : g) {
      if (!row.is_array() || static_cast<int>(row.size()) != n) throw InputError("MatPoint grid must be square");
      for (const auto& entry : row) grid.push_back(AlgElement::project(spec, matrix_from_json(entry)));
    }
    return MatPoint(spec, n, std::move(grid));
  } catch (const InputError&) {
    throw;
  } catch (const Error& e) {
    throw InputError(std::string("MatPoint: ") + e.what());
  }
}

inline json to_json(const LinMap& m) {
  json flags{{"unital", m.flags().unital}, {"cp_verified", m.flags().cp_verified}};
  if (m.flags().homomorphic_on) {
    json gens = json::array();
    for (const auto& g : *m.flags().homomorphic_on) gens.push_back(to_json(g.data()));
    flags["homomorphic_on"] = std::move(gens);
  }
  return json{{"dom", to_json(m.dom())}, {"cod", to_json(m.cod())}, {"matrix", to_json(m.matrix())}, {"flags", flags}};
}

inline LinMap linmap_from_json(const json& j) {
  if (!j.is_object() || !j.contains("dom") || !j.contains("cod") || !j.contains("matrix"))
    throw InputError("LinMap must have dom, cod and matrix");
  AlgebraSpec dom = spec_from_json(j["dom"]);
  AlgebraSpec cod = spec_from_json(j["cod"]);
  LinMapFlags flags;
  if (j.contains("flags")) {
    const json& f = j["flags"];
    flags.unital = f.value("unital", false);
    flags.cp_verified = f.value("cp_verified", false);
    if (f.contains("homomorphic_on")) {
      std::vector<AlgElement> gens;
      try {
        for (const auto& g : f["homomorphic_on"]) gens.push_back(AlgElement::project(dom, matrix_from_json(g)));
      } catch (const InputError&) {
        throw;
      } catch (const Error& e) {
        throw InputError(std::string("LinMap flags: ") + e.what());
      }
      flags.homomorphic_on = std::move(gens);
    }
  }
  try {
    return LinMap(dom, cod, matrix_from_json(j["matrix"]), std::move(flags));
  } catch (const InputError&) {
    throw;
  } catch (const Error& e) {
    throw InputError(e.what());
  }
}

inline json to_json(const CauchyModel& model) {
  json j{{"B", to_json(model.b())}, {"M", to_json(model.m())}, {"A", to_json(model.a().data())},
         {"E", to_json(model.e())}, {"psi", to_json(model.psi())}};
  if (!model.name().empty()) j["name"] = model.name();
  if (!model.validated()) j["unchecked"] = true;
  return j;
}

/// Strict unless the document sets "unchecked": true.
inline CauchyModel model_from_json(const json& j) {
  if (!j.is_object()) throw InputError("CauchyModel must be an object");
  for (const char* key : {"B", "M", "A", "E", "psi"})
    if (!j.contains(key)) throw InputError(std::string("CauchyModel is missing \"") + key + "\"");
  AlgebraSpec b = spec_from_json(j["B"]);
  AlgebraSpec m = spec_from_json(j["M"]);
  Mat a = matrix_from_json(j["A"]);
  LinMap e = linmap_from_json(j["E"]);
  LinMap psi = linmap_from_json(j["psi"]);
  std::string name = j.value("name", std::string());
  try {
    if (j.value("unchecked", false)) return CauchyModel::unchecked(b, m, a, e, psi, name);
    return CauchyModel::make(b, m, a, e, psi, name);
  } catch (const Error& err) {
    throw InputError(std::string("CauchyModel: ") + err.what());
  }
}

inline json to_json(const HerglotzData& d) {
  return json{{"input", to_json(d.input())}, {"output", to_json(d.output())}, {"T", to_json(d.t().data())},
              {"L", to_json(d.l())}, {"V", to_json(d.v())}};
}

inline HerglotzData herglotz_from_json(const json& j) {
  if (!j.is_object() || !j.contains("T") || !j.contains("L") || !j.contains("V"))
    throw InputError("HerglotzData must have T, L and V");
  Mat t = matrix_from_json(j["T"]);
  Mat l = matrix_from_json(j["L"]);
  Mat v = matrix_from_json(j["V"]);
  AlgebraSpec input = j.contains("input") ? spec_from_json(j["input"]) : AlgebraSpec::diagonal(1);
  AlgebraSpec output = j.contains("output") ? spec_from_json(j["output"])
                                            : AlgebraSpec::full(static_cast<int>(std::max<Eigen::Index>(v.cols(), 1)));
  try {
    return HerglotzData(input, output, t, l, v);
  } catch (const Error& e) {
    throw InputError(e.what());
  }
}

inline json to_json(const NevanlinnaData& nd) {
  return json{{"input", to_json(nd.input)},   {"output", to_json(nd.output)}, {"multiplicity", nd.multiplicity},
              {"A", to_json(nd.a)},           {"P", to_json(nd.p)},           {"W", to_json(nd.w)},
              {"C", to_json(nd.c.data())},    {"is_cauchy", nd.is_cauchy}};
}

inline NevanlinnaData nevanlinna_from_json(const json& j) {
  for (const char* key : {"A", "P", "W", "C", "is_cauchy"})
    if (!j.contains(key)) throw InputError(std::string("NevanlinnaData is missing \"") + key + "\"");
  NevanlinnaData nd;
  nd.input = j.contains("input") ? spec_from_json(j["input"]) : AlgebraSpec::diagonal(1);
  nd.output = j.contains("output") ? spec_from_json(j["output"]) : AlgebraSpec::diagonal(1);
  nd.multiplicity = j.value("multiplicity", 1);
  nd.a = matrix_from_json(j["A"]);
  nd.p = matrix_from_json(j["P"]);
  nd.w = matrix_from_json(j["W"]);
  try {
    nd.c = AlgElement::project(nd.output, matrix_from_json(j["C"]));
  } catch (const Error& e) {
    throw InputError(e.what());
  }
  nd.is_cauchy = j["is_cauchy"].get<bool>();
  return nd;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace ncpick::io
