#pragma once

// JSON replay format for graph ensembles and measurement matrices.
//
//   {
//     "format": "sbg-ensemble/1",
//     "n_left": N, "n_right": M, "n_graphs": L, "rf_limit": R, "seed": s,
//     "modulation": {"kind": "linear" | "cosine", "omega": w},
//     "partitions":   [[[node, ...], ...], ...],   // [graph][right node]
//     "permutations": [[value index, ...], ...]    // [graph][left node]
//   }
//
//   {
//     "format": "sbg-matrix/1",
//     "cols": N, "n_graphs": L, "n_right": M,
//     "rows": [[[col, value], ...], ...]
//   }

#include <cstdint>
#include <fstream>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "sbg/encoder.hpp"
#include "sbg/errors.hpp"
#include "sbg/measurement.hpp"
#include "sbg/modulation.hpp"

namespace sbg {

inline constexpr const char* kEnsembleFormat = "sbg-ensemble/1";
inline constexpr const char* kMatrixFormat = "sbg-matrix/1";

inline nlohmann::json to_json(const GraphEnsemble& ens, const ModulationSpec& mod) {
  nlohmann::json j;
  j["format"] = kEnsembleFormat;
  j["n_left"] = ens.n_left;
  j["n_right"] = ens.n_right;
  j["n_graphs"] = ens.n_graphs;
  j["rf_limit"] = ens.rf_limit;
  j["seed"] = ens.seed;
  j["modulation"] = {{"kind", to_string(mod.kind())}, {"omega", mod.omega()}};
  j["partitions"] = ens.partitions;
  j["permutations"] = ens.permutations;
  return j;
}

struct EnsembleFile {
  GraphEnsemble ensemble;
  ModulationSpec modulation;
};

inline EnsembleFile ensemble_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kEnsembleFormat) {
      throw InvalidArgument("unsupported ensemble format");
    }
    GraphEnsemble ens;
    ens.n_left = j.at("n_left").get<std::size_t>();
    ens.n_right = j.at("n_right").get<std::size_t>();
    ens.n_graphs = j.at("n_graphs").get<std::size_t>();
    ens.rf_limit = j.value("rf_limit", std::size_t{0});
    ens.seed = j.value("seed", std::uint64_t{0});
    ens.partitions = j.at("partitions").get<std::vector<std::vector<IndexSet>>>();
    ens.permutations = j.value("permutations", std::vector<std::vector<std::size_t>>{});
    ens.finalize();

    const auto& m = j.at("modulation");
    const auto kind = m.at("kind").get<std::string>();
    ModulationSpec mod = kind == "linear" ? ModulationSpec::linear(ens.n_left)
                         : kind == "cosine"
                             ? ModulationSpec::cosine(ens.n_left, m.at("omega").get<double>())
                             : throw InvalidArgument("unknown modulation kind '" + kind + "'");
    return {std::move(ens), std::move(mod)};
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed ensemble file: ") + e.what());
  }
}

inline void save_ensemble(const std::string& path, const GraphEnsemble& ens, const ModulationSpec& mod) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write " + path);
  os << to_json(ens, mod).dump(1) << '\n';
}

inline EnsembleFile load_ensemble(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open ensemble file " + path);
  try {
    return ensemble_from_json(nlohmann::json::parse(is));
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument(std::string("malformed ensemble file: ") + e.what());
  }
}

inline nlohmann::json to_json(const MeasurementMatrix& a) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t t = 0; t < a.rows(); ++t) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& e : a.row(t)) r.push_back({e.col, e.value});
    rows.push_back(std::move(r));
  }
  return {{"format", kMatrixFormat},
          {"cols", a.cols()},
          {"n_graphs", a.n_graphs()},
          {"n_right", a.n_right()},
          {"rows", std::move(rows)}};
}

inline MeasurementMatrix matrix_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kMatrixFormat) {
      throw InvalidArgument("unsupported matrix format");
    }
    MeasurementMatrix a(j.at("cols").get<std::size_t>(), j.at("n_graphs").get<std::size_t>(),
                        j.at("n_right").get<std::size_t>());
    const auto& rows = j.at("rows");
    if (rows.size() != a.rows()) throw DimensionMismatch("matrix row count mismatch");
    for (std::size_t t = 0; t < rows.size(); ++t) {
      std::vector<MatrixEntry> entries;
      for (const auto& e : rows[t]) entries.push_back({e.at(0).get<std::size_t>(), e.at(1).get<double>()});
      a.set_row(t, std::move(entries));
    }
    return a;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed matrix file: ") + e.what());
  }
}

}  // namespace sbg
