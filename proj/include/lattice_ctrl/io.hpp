/*
 * Copyright 2026 The lattice-ctrl Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LATTICE_CTRL_IO_HPP_
#define LATTICE_CTRL_IO_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "lattice_ctrl/convert.hpp"
#include "lattice_ctrl/errors.hpp"
#include "lattice_ctrl/params.hpp"
#include "lattice_ctrl/runtime.hpp"
#include "lattice_ctrl/security.hpp"

namespace lattice_ctrl {

using nlohmann::json;

namespace detail {

inline const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw FormatError(where + ": missing field \"" + key + "\"");
  }
  return j.at(key);
}

}  // namespace detail

// A matrix is a list of rows; a vector may be given as a flat list.
inline MatrixXd matrix_from_json(const json& j, const std::string& what) {
  try {
    if (!j.is_array() || j.empty()) throw FormatError(what + ": expected a non-empty array");
    if (!j.front().is_array()) {
      MatrixXd m(static_cast<Index>(j.size()), 1);
      for (std::size_t i = 0; i < j.size(); ++i) m(static_cast<Index>(i), 0) = j[i].get<double>();
      return m;
    }
    const std::size_t rows = j.size(), cols = j.front().size();
    MatrixXd m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
      if (!j[i].is_array() || j[i].size() != cols) throw FormatError(what + ": ragged rows");
      for (std::size_t k = 0; k < cols; ++k) {
        m(static_cast<Index>(i), static_cast<Index>(k)) = j[i][k].get<double>();
      }
    }
    return m;
  } catch (const json::exception& e) {
    throw FormatError(what + ": " + e.what());
  }
}

inline VectorXd vector_from_json(const json& j, const std::string& what) {
  const MatrixXd m = matrix_from_json(j, what);
  if (m.cols() != 1 && m.rows() != 1) throw FormatError(what + ": expected a vector");
  return m.cols() == 1 ? VectorXd(m.col(0)) : VectorXd(m.row(0).transpose());
}

inline json to_json(const MatrixXd& m) {
  json out = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    out.push_back(std::move(row));
  }
  return out;
}

inline json to_json(const VectorXd& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

template <typename T>
json to_json(const Matrix<T>& m) {
  json out = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (auto v : m.row(i)) row.push_back(v);
    out.push_back(std::move(row));
  }
  return out;
}

template <typename T>
Matrix<T> int_matrix_from_json(const json& j, const std::string& what) {
  try {
    const std::size_t rows = j.size(), cols = rows ? j.front().size() : 0;
    Matrix<T> m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
      if (j[i].size() != cols) throw FormatError(what + ": ragged rows");
      for (std::size_t k = 0; k < cols; ++k) m(i, k) = j[i][k].get<T>();
    }
    return m;
  } catch (const json::exception& e) {
    throw FormatError(what + ": " + e.what());
  }
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Controller and plant documents

struct ControllerSpec {
  PlainController controller;
  std::vector<std::int64_t> targets;
  std::optional<double> r, s, epsilon;
  std::optional<std::uint64_t> L;
  std::optional<OutputBand> band;
};

inline ControllerSpec controller_from_json(const json& j, const std::string& where = "controller") {
  ControllerSpec cs;
  PlainController& c = cs.controller;
  c.F = matrix_from_json(detail::require(j, "F", where), where + ".F");
  c.G = matrix_from_json(detail::require(j, "G", where), where + ".G");
  c.H = matrix_from_json(detail::require(j, "H", where), where + ".H");
  if (c.H.cols() == 1 && c.F.rows() > 1) c.H.transposeInPlace();
  c.J = j.contains("J") ? matrix_from_json(j.at("J"), where + ".J")
                        : MatrixXd::Zero(c.H.rows(), c.G.cols());
  c.x0 = j.contains("x0") ? vector_from_json(j.at("x0"), where + ".x0")
                          : VectorXd::Zero(c.F.rows());
  try {
    if (j.contains("targets")) cs.targets = j.at("targets").get<std::vector<std::int64_t>>();
    if (j.contains("r")) cs.r = j.at("r").get<double>();
    if (j.contains("s")) cs.s = j.at("s").get<double>();
    if (j.contains("L")) cs.L = j.at("L").get<std::uint64_t>();
    if (j.contains("epsilon")) cs.epsilon = j.at("epsilon").get<double>();
    if (j.contains("band")) {
      const json& b = j.at("band");
      cs.band = OutputBand{b.at("u_min").get<std::vector<double>>(),
                           b.at("u_max").get<std::vector<double>>(),
                           b.value("epsilon", cs.epsilon.value_or(0.0))};
    }
  } catch (const json::exception& e) {
    throw FormatError(where + ": " + e.what());
  }
  c.validate();
  return cs;
}

inline json controller_to_json(const PlainController& c) {
  return json{{"F", to_json(c.F)}, {"G", to_json(c.G)}, {"H", to_json(c.H)},
              {"J", to_json(c.J)}, {"x0", to_json(c.x0)}};
}

inline PlantModel plant_from_json(const json& j, const std::string& where = "plant") {
  PlantModel p;
  p.A = matrix_from_json(detail::require(j, "A", where), where + ".A");
  p.B = matrix_from_json(detail::require(j, "B", where), where + ".B");
  p.C = matrix_from_json(detail::require(j, "C", where), where + ".C");
  if (p.C.cols() == 1 && p.A.rows() > 1) p.C.transposeInPlace();
  p.x0 = j.contains("x0") ? vector_from_json(j.at("x0"), where + ".x0")
                          : VectorXd::Zero(p.A.rows());
  if (j.contains("disturbance")) {
    const json& d = j.at("disturbance");
    p.disturbance_amplitude = d.value("amplitude", 0.0);
    p.disturbance_frequency = d.value("frequency", 0.0);
  }
  p.validate();
  return p;
}

// ---------------------------------------------------------------------------
// Run configuration

struct CryptoConfig {
  std::size_t n = 50;
  std::optional<unsigned> log2_q;  // default: the modulus picked by conversion
  double sigma = 10.0;
  unsigned n0 = 6;
  unsigned log2_nu = 16;
};

struct RunConfig {
  ControllerSpec controller;
  std::optional<PlantModel> plant;
  CryptoConfig crypto;
  double r = 1e-2, s = 1e-2;
  std::uint64_t L = 1;
  double epsilon = 0.01;
  double margin = 0.25;
  std::optional<OutputBand> band;
  std::size_t horizon = 1000;
  std::uint64_t seed = 1;
  bool encrypted = true;
  double lambda = 80.0;

  Scales scales() const { return Scales{r, s, L}; }

  void validate() const {
    controller.controller.validate();
    scales().validate();
    if (!(epsilon >= 0.0)) throw ParameterError("epsilon must be non-negative");
    if (!(margin >= 0.0)) throw ParameterError("margin must be non-negative");
    if (crypto.n == 0) throw ParameterError("crypto.n must be positive");
    if (crypto.sigma < 0.0) throw ParameterError("crypto.sigma must be non-negative");
    if (band) band->validate(static_cast<std::size_t>(controller.controller.output_dim()));
    if (plant) {
      const double rho = closed_loop_spectral_radius(*plant, controller.controller);
      if (!(rho < 1.0)) {
        std::ostringstream msg;
        msg << "closed loop is not stable (spectral radius " << rho << ")";
        throw PreconditionError(msg.str());
      }
    }
  }
};

namespace detail {

// Either an inline object or a path relative to the referring document.
inline json resolve(const json& j, const std::filesystem::path& base) {
  if (j.is_string()) return read_json_file(base / j.get<std::string>());
  return j;
}

}  // namespace detail

// A bare controller document is accepted as a run configuration without a plant.
inline RunConfig run_config_from_json(const json& j, const std::filesystem::path& base = ".") {
  if (j.is_object() && !j.contains("controller") && j.contains("F")) {
    return run_config_from_json(json{{"controller", j}}, base);
  }
  RunConfig rc;
  rc.controller = controller_from_json(detail::resolve(detail::require(j, "controller", "config"), base));
  if (j.contains("plant")) rc.plant = plant_from_json(detail::resolve(j.at("plant"), base));
  try {
    if (j.contains("params")) {
      const json& p = j.at("params");
      rc.crypto.n = p.value("n", rc.crypto.n);
      if (p.contains("log2_q")) rc.crypto.log2_q = p.at("log2_q").get<unsigned>();
      rc.crypto.sigma = p.value("sigma", rc.crypto.sigma);
      rc.crypto.n0 = p.value("n0", rc.crypto.n0);
      rc.crypto.log2_nu = p.value("log2_nu", rc.crypto.log2_nu);
      rc.r = p.value("r", rc.r);
      rc.s = p.value("s", rc.s);
      rc.L = p.value("L", rc.L);
      rc.epsilon = p.value("epsilon", rc.epsilon);
      rc.lambda = p.value("lambda", rc.lambda);
    }
    // Scales given on the controller document win over defaults but not over params.
    const json params = j.value("params", json::object());
    if (rc.controller.r && !params.contains("r")) rc.r = *rc.controller.r;
    if (rc.controller.s && !params.contains("s")) rc.s = *rc.controller.s;
    if (rc.controller.L && !params.contains("L")) rc.L = *rc.controller.L;
    if (rc.controller.epsilon && !params.contains("epsilon")) rc.epsilon = *rc.controller.epsilon;
    rc.margin = j.value("margin", rc.margin);
    rc.horizon = j.value("horizon", rc.horizon);
    rc.seed = j.value("seed", rc.seed);
    rc.encrypted = j.value("encrypted", rc.encrypted);
    if (j.contains("band")) {
      const json& b = j.at("band");
      rc.band = OutputBand{b.at("u_min").get<std::vector<double>>(),
                           b.at("u_max").get<std::vector<double>>(),
                           b.value("epsilon", rc.epsilon)};
    } else if (rc.controller.band) {
      rc.band = rc.controller.band;
      rc.band->epsilon = rc.epsilon;
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  rc.validate();
  return rc;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  return run_config_from_json(read_json_file(path), path.parent_path());
}

// ---------------------------------------------------------------------------
// Artifacts

inline json band_to_json(const OutputBand& b) {
  return json{{"u_min", b.u_min}, {"u_max", b.u_max}, {"epsilon", b.epsilon}};
}

inline json scales_to_json(const Scales& s) {
  return json{{"r", s.r}, {"s", s.s}, {"L", s.L}};
}

inline json params_to_json(const Params& p) {
  return json{{"n", p.n},           {"log2_q", p.q.log2()},
              {"sigma", p.noise.sigma}, {"n0", p.noise.n0},
              {"log2_nu", p.gadget.log2_nu}, {"d", p.gadget.d},
              {"delta_mult", delta_mult(p)}, {"insecure", p.insecure()}};
}

inline json integer_controller_to_json(const IntegerController& ic) {
  return json{{"F", to_json(ic.F)}, {"G", to_json(ic.G)}, {"R", to_json(ic.R)},
              {"H", to_json(ic.H)}, {"J", to_json(ic.J)}, {"z0", ic.z0},
              {"scales", scales_to_json(ic.scales)}};
}

inline json modular_controller_to_json(const ModularController& mc) {
  return json{{"log2_q", mc.q.log2()}, {"q", mc.q.value()},
              {"F", to_json(mc.F)},    {"G", to_json(mc.G)},
              {"R", to_json(mc.R)},    {"H", to_json(mc.H)},
              {"J", to_json(mc.J)},    {"z0", mc.z0},
              {"band", band_to_json(mc.band)}, {"scales", scales_to_json(mc.scales)}};
}

inline ModularController modular_controller_from_json(const json& j) {
  try {
    ModularController mc;
    mc.q = Modulus(j.at("log2_q").get<unsigned>());
    mc.F = int_matrix_from_json<std::uint64_t>(j.at("F"), "F");
    mc.G = int_matrix_from_json<std::uint64_t>(j.at("G"), "G");
    mc.R = int_matrix_from_json<std::uint64_t>(j.at("R"), "R");
    mc.H = int_matrix_from_json<std::uint64_t>(j.at("H"), "H");
    mc.J = int_matrix_from_json<std::uint64_t>(j.at("J"), "J");
    mc.z0 = j.at("z0").get<ZqVector>();
    const json& b = j.at("band");
    mc.band = OutputBand{b.at("u_min").get<std::vector<double>>(),
                         b.at("u_max").get<std::vector<double>>(), b.at("epsilon").get<double>()};
    const json& s = j.at("scales");
    mc.scales = Scales{s.at("r").get<double>(), s.at("s").get<double>(),
                       s.at("L").get<std::uint64_t>()};
    for (const ZqMatrix* m : {&mc.F, &mc.G, &mc.R, &mc.H, &mc.J}) {
      for (std::size_t k = 0; k < m->size(); ++k) {
        if (!mc.q.contains(m->data()[k])) throw FormatError("modular controller entry exceeds q");
      }
    }
    return mc;
  } catch (const json::exception& e) {
    throw FormatError(std::string("modular controller: ") + e.what());
  }
}

inline json conversion_to_json(const Conversion& cv) {
  json report{{"original_dim", cv.reduction.original_dim},
              {"observable_dim", cv.reduction.rank},
              {"reduced", cv.reduction.changed()},
              {"condition_T", cv.reparam.condition},
              {"residual", cv.reparam.residual},
              {"companion_form", cv.reparam.companion},
              {"modulus_bound", static_cast<double>(cv.modulus_bound)},
              {"log2_q", cv.modular.q.log2()}};
  return json{{"report", report},
              {"reparam", {{"T", to_json(cv.reparam.T)}, {"R", to_json(cv.reparam.R)}}},
              {"integer", integer_controller_to_json(cv.integer)},
              {"modular", modular_controller_to_json(cv.modular)}};
}

inline json error_budget_to_json(const ErrorBudgetReport& b) {
  return json{{"alpha", b.alpha}, {"alpha_x", b.alpha_x}, {"alpha_u", b.alpha_u},
              {"alpha_0", b.alpha_0}, {"beta", b.beta}, {"beta_x", b.beta_x},
              {"beta_u", b.beta_u}, {"beta_0", b.beta_0}};
}

// ---------------------------------------------------------------------------
// Traces

inline void write_trace_csv(std::ostream& os, const SimTrace& trace) {
  const std::size_t p = trace.records.empty() ? 0 : trace.records.front().y.size();
  const std::size_t m = trace.records.empty() ? 0 : trace.records.front().u_ref.size();
  os << "t";
  for (std::size_t i = 0; i < p; ++i) os << ",y" << i;
  for (std::size_t i = 0; i < m; ++i) os << ",u_ref" << i;
  for (std::size_t i = 0; i < m; ++i) os << ",u_modq_recovered" << i;
  if (trace.summary.encrypted) {
    for (std::size_t i = 0; i < m; ++i) os << ",u_enc_recovered" << i;
  }
  os << ",err_modq";
  if (trace.summary.encrypted) os << ",err_enc";
  os << ",band_violation\n";
  os << std::setprecision(17);
  for (const auto& r : trace.records) {
    os << r.t;
    for (double v : r.y) os << ',' << v;
    for (double v : r.u_ref) os << ',' << v;
    for (double v : r.u_modq) os << ',' << v;
    if (trace.summary.encrypted) {
      for (double v : r.u_enc) os << ',' << v;
    }
    os << ',' << r.err_modq;
    if (trace.summary.encrypted) os << ',' << r.err_enc;
    os << ',' << (r.band_violation ? 1 : 0) << '\n';
  }
}

inline json summary_to_json(const SimSummary& s) {
  json out{{"steps", s.steps},
           {"sup_err_modq", s.sup_err_modq},
           {"encrypted", s.encrypted},
           {"integer_mismatches", s.integer_mismatches}};
  if (s.encrypted) {
    out["sup_err_enc"] = s.sup_err_enc;
    out["sup_gap_enc"] = s.sup_gap_enc;
    out["mean_gap_enc"] = s.mean_gap_enc;
    out["encrypted_mismatches"] = s.encrypted_mismatches;
  }
  out["first_band_violation"] =
      s.first_band_violation ? json(*s.first_band_violation) : json(nullptr);
  out["integer_overflow_step"] =
      s.integer_overflow_step ? json(*s.integer_overflow_step) : json(nullptr);
  return out;
}

}  // namespace lattice_ctrl

#endif  // LATTICE_CTRL_IO_HPP_
