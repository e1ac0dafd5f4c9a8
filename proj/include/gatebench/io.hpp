#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gatebench/basis.hpp"
#include "gatebench/epg.hpp"
#include "gatebench/matrix.hpp"
#include "gatebench/photonic.hpp"
#include "gatebench/process.hpp"
#include "gatebench/tomography.hpp"

namespace gatebench {

using json = nlohmann::ordered_json;

namespace detail {

inline std::string csv_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline json complex_to_json(const cplx& z) { return json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw std::runtime_error(where + ": complex entries must be [re, im] number pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json matrix_to_json(const CMat& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline CMat matrix_from_json(const json& j, std::size_t rows, std::size_t cols,
                             const std::string& where) {
  if (!j.is_array() || j.size() != rows)
    throw std::runtime_error(where + ": expected " + std::to_string(rows) + " rows");
  CMat m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols)
      throw std::runtime_error(where + ": expected " + std::to_string(cols) + " columns per row");
    for (std::size_t k = 0; k < cols; ++k) m(i, k) = complex_from_json(j[i][k], where);
  }
  return m;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open input file: " + path);
  return f;
}

inline std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  return f;
}

inline json parse_json(std::istream& in, const std::string& what) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(what + ": malformed JSON (" + e.what() + ")");
  }
  return j;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Process matrices.
// ---------------------------------------------------------------------------

inline void write_chi_json(std::ostream& out, const ProcessMatrix& pm) {
  json j;
  j["qubits"] = 2;
  if (pm.basis.kind() == BasisKind::pauli) {
    j["basis"] = "pauli";
  } else if (pm.basis.kind() == BasisKind::gate) {
    j["basis"] = json{{"gate", detail::matrix_to_json(pm.basis.gate_unitary())}};
  } else {
    throw std::invalid_argument("write_chi_json: only pauli and gate-adapted bases are supported");
  }
  j["entries"] = detail::matrix_to_json(pm.chi);
  out << j.dump(2) << "\n";
}

inline ProcessMatrix read_chi_json(std::istream& in) {
  const json j = detail::parse_json(in, "process matrix file");
  if (!j.is_object() || !j.contains("qubits") || !j.contains("basis") || !j.contains("entries"))
    throw std::runtime_error(
        "process matrix file: missing required keys (qubits, basis, entries)");
  if (!j["qubits"].is_number_integer() || j["qubits"].get<int>() != 2)
    throw std::runtime_error("process matrix file: only qubits = 2 is supported");

  ProcessMatrix pm;
  const json& b = j["basis"];
  if (b.is_string() && b.get<std::string>() == "pauli") {
    pm.basis = OperatorBasis::pauli(2);
  } else if (b.is_object() && b.contains("gate")) {
    const CMat u = detail::matrix_from_json(b["gate"], 4, 4, "process matrix file (basis.gate)");
    if (!u.is_unitary(1e-9))
      throw std::runtime_error("process matrix file: basis.gate is not unitary");
    pm.basis = OperatorBasis::gate_adapted(u);
  } else {
    throw std::runtime_error(
        "process matrix file: basis must be \"pauli\" or {\"gate\": <4x4 unitary>}");
  }
  pm.chi = detail::matrix_from_json(j["entries"], 16, 16, "process matrix file (entries)");
  try {
    validate_process_matrix(pm);
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("process matrix file: ") + e.what());
  }
  return pm;
}

inline void write_chi_json(const std::string& path, const ProcessMatrix& pm) {
  auto f = detail::open_output(path);
  write_chi_json(f, pm);
}

inline ProcessMatrix read_chi_json(const std::string& path) {
  auto f = detail::open_input(path);
  return read_chi_json(f);
}

// ---------------------------------------------------------------------------
// Ideal unitaries.
// ---------------------------------------------------------------------------

inline void write_unitary_json(std::ostream& out, const CMat& u) {
  json j;
  j["dim"] = 4;
  j["entries"] = detail::matrix_to_json(u);
  out << j.dump(2) << "\n";
}

inline CMat read_unitary_json(std::istream& in) {
  const json j = detail::parse_json(in, "unitary file");
  if (!j.is_object() || !j.contains("entries"))
    throw std::runtime_error("unitary file: missing required key (entries)");
  const CMat u = detail::matrix_from_json(j["entries"], 4, 4, "unitary file (entries)");
  if (!u.is_unitary(1e-9)) throw std::runtime_error("unitary file: entries are not unitary");
  return u;
}

/// Resolves an ideal-gate argument: a built-in name or a path to a JSON file.
inline CMat resolve_ideal_unitary(const std::string& name_or_path) {
  if (name_or_path == "cz") return cz_unitary();
  if (name_or_path == "bitflipped-cz") return bitflipped_cz_unitary();
  auto f = detail::open_input(name_or_path);
  return read_unitary_json(f);
}

// ---------------------------------------------------------------------------
// Model parameters.
// ---------------------------------------------------------------------------

inline void write_params_json(std::ostream& out, const GateModelParams& p) {
  json j;
  j["lambda_A"] = p.lambda_A;
  j["lambda_B"] = p.lambda_B;
  j["eta_H"] = p.eta_H;
  j["eta_V"] = p.eta_V;
  j["tau_cV"] = p.tau_cV;
  j["tau_tV"] = p.tau_tV;
  j["eff"] = json{{"c", p.eff_c}, {"t", p.eff_t}, {"hA", p.eff_hA}, {"hB", p.eff_hB}};
  out << j.dump(2) << "\n";
}

/// Missing keys keep their defaults; present keys must be numbers in range.
inline GateModelParams read_params_json(std::istream& in,
                                        const GateModelParams& defaults = default_params()) {
  const json j = detail::parse_json(in, "parameter file");
  if (!j.is_object()) throw std::runtime_error("parameter file: top level must be an object");
  GateModelParams p = defaults;
  const auto fetch = [&](const json& obj, const char* key, double& slot) {
    if (!obj.contains(key)) return;
    if (!obj[key].is_number())
      throw std::runtime_error(std::string("parameter file: ") + key + " must be a number");
    slot = obj[key].get<double>();
  };
  fetch(j, "lambda_A", p.lambda_A);
  fetch(j, "lambda_B", p.lambda_B);
  fetch(j, "eta_H", p.eta_H);
  fetch(j, "eta_V", p.eta_V);
  fetch(j, "tau_cV", p.tau_cV);
  fetch(j, "tau_tV", p.tau_tV);
  if (j.contains("eff")) {
    if (!j["eff"].is_object()) throw std::runtime_error("parameter file: eff must be an object");
    fetch(j["eff"], "c", p.eff_c);
    fetch(j["eff"], "t", p.eff_t);
    fetch(j["eff"], "hA", p.eff_hA);
    fetch(j["eff"], "hB", p.eff_hB);
  }
  try {
    p.validate();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("parameter file: ") + e.what());
  }
  return p;
}

inline void write_params_json(const std::string& path, const GateModelParams& p) {
  auto f = detail::open_output(path);
  write_params_json(f, p);
}

inline GateModelParams read_params_json(const std::string& path,
                                        const GateModelParams& defaults = default_params()) {
  auto f = detail::open_input(path);
  return read_params_json(f, defaults);
}

// ---------------------------------------------------------------------------
// Count tables.
// ---------------------------------------------------------------------------

inline void write_counts_csv(std::ostream& out, const TomographyDataset& data) {
  const bool durations = !data.durations.empty();
  out << "prep_label,meas_label,counts" << (durations ? ",duration_s" : "") << "\n";
  for (std::size_t i = 0; i < data.settings.size(); ++i) {
    out << data.settings[i].prep.label << ',' << data.settings[i].meas.label << ','
        << detail::csv_number(data.counts[i]);
    if (durations) out << ',' << detail::csv_number(data.durations[i]);
    out << "\n";
  }
}

namespace detail {

inline std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline double parse_csv_double(const std::string& cell, std::size_t row, const char* what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    throw std::runtime_error("counts file row " + std::to_string(row) + ": invalid " + what +
                             " '" + cell + "'");
  }
  if (used != cell.size())
    throw std::runtime_error("counts file row " + std::to_string(row) + ": invalid " + what +
                             " '" + cell + "'");
  return v;
}

}  // namespace detail

/// Reads a count table. Rows with a repeated (prep, meas) pair are summed and
/// reported through `warnings`; malformed rows raise with their row number.
inline TomographyDataset read_counts_csv(std::istream& in,
                                         std::vector<std::string>* warnings = nullptr) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("counts file: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_csv_row(line);
  const bool durations = header.size() == 4 && header[3] == "duration_s";
  if (!(header.size() == 3 || durations) || header[0] != "prep_label" ||
      header[1] != "meas_label" || header[2] != "counts")
    throw std::runtime_error(
        "counts file: header must be prep_label,meas_label,counts[,duration_s]");

  TomographyDataset data;
  std::map<std::string, std::size_t> seen;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = detail::split_csv_row(line);
    if (cells.size() != header.size())
      throw std::runtime_error("counts file row " + std::to_string(row) + ": expected " +
                               std::to_string(header.size()) + " fields, got " +
                               std::to_string(cells.size()));
    TomographySetting s;
    try {
      s.prep = make_preparation(cells[0]);
      s.meas = make_measurement(cells[1]);
    } catch (const std::exception& e) {
      throw std::runtime_error("counts file row " + std::to_string(row) + ": " + e.what());
    }
    const double counts = detail::parse_csv_double(cells[2], row, "counts");
    if (counts < 0.0)
      throw std::runtime_error("counts file row " + std::to_string(row) + ": negative counts");
    const double duration = durations ? detail::parse_csv_double(cells[3], row, "duration") : 0.0;
    if (durations && duration <= 0.0)
      throw std::runtime_error("counts file row " + std::to_string(row) +
                               ": duration must be positive");

    const std::string key = cells[0] + "/" + cells[1];
    const auto it = seen.find(key);
    if (it != seen.end()) {
      data.counts[it->second] += counts;
      if (durations) data.durations[it->second] += duration;
      if (warnings)
        warnings->push_back("duplicate setting " + key + " at row " + std::to_string(row) +
                            "; counts summed");
      continue;
    }
    seen.emplace(key, data.settings.size());
    data.settings.push_back(std::move(s));
    data.counts.push_back(counts);
    if (durations) data.durations.push_back(duration);
  }
  data.validate();
  return data;
}

inline void write_counts_csv(const std::string& path, const TomographyDataset& data) {
  auto f = detail::open_output(path);
  write_counts_csv(f, data);
}

inline TomographyDataset read_counts_csv(const std::string& path,
                                         std::vector<std::string>* warnings = nullptr) {
  auto f = detail::open_input(path);
  return read_counts_csv(f, warnings);
}

// ---------------------------------------------------------------------------
// Error-rate reports.
// ---------------------------------------------------------------------------

inline void write_bounds_json(std::ostream& out, const EpgBounds& bounds,
                              const std::vector<ThresholdVerdict>& verdicts) {
  json j;
  j["lower"] = bounds.lower;
  j["upper"] = bounds.upper;
  json curve = json::array();
  for (const CurvePoint& pt : bounds.curve) {
    curve.push_back(json{{"delta", pt.delta},
                         {"bound", pt.bound},
                         {"noise", pt.noise_label},
                         {"full_rank", pt.full_rank}});
  }
  j["curve"] = std::move(curve);
  json th = json::array();
  for (const ThresholdVerdict& v : verdicts) {
    th.push_back(json{{"name", v.spec.name},
                      {"epsilon0", v.spec.epsilon0},
                      {"error_model", v.spec.error_model},
                      {"verdict", v.verdict}});
  }
  j["thresholds"] = std::move(th);
  out << j.dump(2) << "\n";
}

inline void write_curve_csv(std::ostream& out, const std::vector<CurvePoint>& depolarizing,
                            const std::vector<CurvePoint>& optimized) {
  if (depolarizing.size() != optimized.size())
    throw std::invalid_argument("write_curve_csv: curve size mismatch");
  out << "delta,bound_depolarizing,bound_optimized\n";
  for (std::size_t i = 0; i < depolarizing.size(); ++i) {
    if (depolarizing[i].delta != optimized[i].delta)
      throw std::invalid_argument("write_curve_csv: delta grids differ");
    out << detail::csv_number(depolarizing[i].delta) << ','
        << detail::csv_number(depolarizing[i].bound) << ','
        << detail::csv_number(optimized[i].bound) << "\n";
  }
}

/// Coherence table |χ_ij|/√(χ_ii χ_jj) with the basis labels on both axes.
inline void write_coherence_csv(std::ostream& out, const ProcessMatrix& pm) {
  const RMat c = coherence_matrix(pm);
  out << "element";
  for (std::size_t j = 0; j < pm.basis.size(); ++j) out << ',' << pm.basis.label(j);
  out << "\n";
  for (std::size_t i = 0; i < c.rows(); ++i) {
    out << pm.basis.label(i);
    for (std::size_t j = 0; j < c.cols(); ++j) out << ',' << detail::csv_number(c(i, j));
    out << "\n";
  }
}

namespace detail {

inline std::string percent_1dp(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", 100.0 * fraction);
  return buf;
}

}  // namespace detail

/// Fidelity table in percent (one decimal), one row per toggle combination.
inline void write_budget_csv(std::ostream& out, const std::vector<BudgetRow>& rows) {
  out << "configuration,fp_ideal_pct,fbar_ideal_pct,fp_full_pct,fbar_full_pct,"
         "one_minus_fp_pct\n";
  for (const BudgetRow& r : rows) {
    out << r.label << ',' << detail::percent_1dp(r.fp_ideal) << ','
        << detail::percent_1dp(r.fbar_ideal) << ',' << detail::percent_1dp(r.fp_full) << ','
        << detail::percent_1dp(r.fbar_full) << ',' << detail::percent_1dp(r.one_minus_fp) << "\n";
  }
}

}  // namespace gatebench
