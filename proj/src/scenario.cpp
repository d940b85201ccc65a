// Copyright 2026 The lindform Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lindform/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace lindform {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

std::string at_index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) {
    throw InputError(path, "expected an object");
  }
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }) == allowed.end()) {
      throw InputError(join(path, key), "unknown field");
    }
  }
}

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key)) {
    throw InputError(join(path, key), "missing required field");
  }
  return obj.at(key);
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) {
    throw InputError(path, "expected a number");
  }
  const double v = j.get<double>();
  if (!std::isfinite(v)) {
    throw InputError(path, "number is not finite");
  }
  return v;
}

double as_temperature(const json& j, const std::string& path) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") {
      return kInfiniteTemperature;
    }
    throw InputError(path, "temperature must be a number or \"inf\"");
  }
  return as_number(j, path);
}

json temperature_json(double t) {
  return std::isinf(t) ? json("inf") : json(t);
}

std::size_t as_count(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    throw InputError(path, "expected a non-negative integer");
  }
  return j.get<std::size_t>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) {
    throw InputError(path, "expected true or false");
  }
  return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) {
    throw InputError(path, "expected a string");
  }
  return j.get<std::string>();
}

Complex as_complex(const json& j, const std::string& path) {
  if (j.is_number()) {
    return {as_number(j, path), 0.0};
  }
  if (!j.is_array() || j.size() != 2) {
    throw InputError(path, "expected a complex number [re, im]");
  }
  return {as_number(j[0], at_index(path, 0)), as_number(j[1], at_index(path, 1))};
}

Matrix as_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) {
    throw InputError(path, "expected a non-empty array of rows");
  }
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) {
    throw InputError(at_index(path, 0), "expected a non-empty row of complex entries");
  }
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string rp = at_index(path, r);
    if (!j[r].is_array() || j[r].size() != cols) {
      throw InputError(rp, "row length differs from row 0 (" + std::to_string(cols) + ")");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          as_complex(j[r][c], at_index(rp, c));
    }
  }
  return m;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> as_real_list(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) {
    throw InputError(path, "expected a non-empty array of numbers");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(as_number(j[i], at_index(path, i)));
  }
  return out;
}

void require_hermitian(const Matrix& m, const std::string& path) {
  if (!is_square(m)) {
    throw InputError(path, "matrix of shape " + shape(m) + " is not square");
  }
  const double defect = hermiticity_defect(m);
  if (defect > std::max(kDefaultValidationTol, 1e-12 * max_abs(m))) {
    std::ostringstream msg;
    msg << "matrix is not hermitian: max |H - H^dagger| = " << defect;
    throw InputError(path, msg.str());
  }
}

void require_square(const Matrix& m, std::size_t dim, const std::string& path,
                    const char* against) {
  if (m.rows() != static_cast<Eigen::Index>(dim) || m.cols() != static_cast<Eigen::Index>(dim)) {
    throw InputError(path, "shape " + shape(m) + " does not match " + against + " dimension " +
                               std::to_string(dim));
  }
}

SystemSpec parse_system(const json& j) {
  const std::string path = "system";
  check_keys(j, path, {"hamiltonian", "eigenvalues", "degeneracy_tol"});
  SystemSpec s;
  if (j.contains("hamiltonian") == j.contains("eigenvalues")) {
    throw InputError(path, "give exactly one of \"hamiltonian\" or \"eigenvalues\"");
  }
  if (j.contains("hamiltonian")) {
    s.hamiltonian = as_matrix(j["hamiltonian"], join(path, "hamiltonian"));
    require_hermitian(*s.hamiltonian, join(path, "hamiltonian"));
  } else {
    s.eigenvalues = as_real_list(j["eigenvalues"], join(path, "eigenvalues"));
  }
  if (j.contains("degeneracy_tol")) {
    s.degeneracy_tol = as_number(j["degeneracy_tol"], join(path, "degeneracy_tol"));
    if (*s.degeneracy_tol < 0.0) {
      throw InputError(join(path, "degeneracy_tol"), "must be non-negative");
    }
  }
  return s;
}

FiniteBathSpec parse_finite_bath(const json& j) {
  const std::string path = "bath";
  check_keys(j, path,
             {"type", "hamiltonian", "modes", "mode_model", "interaction", "temperature",
              "broadening", "center"});
  FiniteBathSpec b;
  if (j.contains("hamiltonian") == j.contains("modes")) {
    throw InputError(path, "give exactly one of \"hamiltonian\" or \"modes\"");
  }
  if (j.contains("hamiltonian")) {
    if (j.contains("mode_model") || j.contains("interaction")) {
      throw InputError(path, "\"mode_model\"/\"interaction\" only apply to \"modes\"");
    }
    b.hamiltonian = as_matrix(j["hamiltonian"], join(path, "hamiltonian"));
    require_hermitian(*b.hamiltonian, join(path, "hamiltonian"));
  } else {
    const json& modes = j["modes"];
    const std::string mp = join(path, "modes");
    if (!modes.is_array() || modes.empty()) {
      throw InputError(mp, "expected a non-empty array of modes");
    }
    for (std::size_t i = 0; i < modes.size(); ++i) {
      const std::string ip = at_index(mp, i);
      check_keys(modes[i], ip, {"frequency", "coupling"});
      b.modes.push_back({as_number(require(modes[i], "frequency", ip), join(ip, "frequency")),
                         modes[i].contains("coupling")
                             ? as_number(modes[i]["coupling"], join(ip, "coupling"))
                             : 0.0});
    }
    if (j.contains("mode_model")) {
      b.mode_model = as_string(j["mode_model"], join(path, "mode_model"));
      if (b.mode_model != "spin" && b.mode_model != "single-excitation") {
        throw InputError(join(path, "mode_model"), "expected \"spin\" or \"single-excitation\"");
      }
    }
    if (j.contains("interaction")) {
      const std::string ip = join(path, "interaction");
      check_keys(j["interaction"], ip, {"xx", "zz"});
      if (b.mode_model != "spin") {
        throw InputError(ip, "interactions need mode_model \"spin\"");
      }
      if (j["interaction"].contains("xx")) {
        b.xx = as_number(j["interaction"]["xx"], join(ip, "xx"));
      }
      if (j["interaction"].contains("zz")) {
        b.zz = as_number(j["interaction"]["zz"], join(ip, "zz"));
      }
    }
    if (b.mode_model == "spin" && b.modes.size() > 12) {
      throw InputError(mp, "at most 12 spin modes are supported");
    }
  }
  b.temperature = as_temperature(require(j, "temperature", path), join(path, "temperature"));
  if (!(b.temperature > 0.0)) {
    throw InputError(join(path, "temperature"), "must be positive or \"inf\"");
  }
  if (j.contains("broadening")) {
    b.broadening = as_number(j["broadening"], join(path, "broadening"));
    if (!(*b.broadening > 0.0)) {
      throw InputError(join(path, "broadening"), "must be positive");
    }
  }
  if (j.contains("center")) {
    b.center = as_bool(j["center"], join(path, "center"));
  }
  return b;
}

AnalyticBathSpec parse_analytic_bath(const json& j, LoadMode mode) {
  const std::string path = "bath";
  check_keys(j, path,
             {"type", "model", "gamma", "temperature", "dephasing", "channels", "entries",
              "matching_tol", "tau_b"});
  AnalyticBathSpec b;
  b.model = as_string(require(j, "model", path), join(path, "model"));
  if (j.contains("channels")) {
    b.channels = as_count(j["channels"], join(path, "channels"));
  }
  if (j.contains("tau_b")) {
    b.tau_b = as_number(j["tau_b"], join(path, "tau_b"));
    if (*b.tau_b < 0.0) {
      throw InputError(join(path, "tau_b"), "must be non-negative");
    }
  }
  if (b.model == "flat-thermal") {
    if (j.contains("entries") || j.contains("matching_tol")) {
      throw InputError(path, "\"entries\"/\"matching_tol\" belong to the \"table\" model");
    }
    b.gamma = as_number(require(j, "gamma", path), join(path, "gamma"));
    b.temperature = as_temperature(require(j, "temperature", path), join(path, "temperature"));
    if (j.contains("dephasing")) {
      b.dephasing = as_number(j["dephasing"], join(path, "dephasing"));
    }
    if (b.gamma < 0.0 || b.dephasing < 0.0) {
      throw InputError(path, "rates must be non-negative");
    }
    if (!(b.temperature >= 0.0) || std::isinf(b.temperature)) {
      throw InputError(join(path, "temperature"), "must be finite and non-negative");
    }
    return b;
  }
  if (b.model != "table") {
    throw InputError(join(path, "model"), "expected \"flat-thermal\" or \"table\"");
  }
  for (const char* key : {"gamma", "temperature", "dephasing"}) {
    if (j.contains(key)) {
      throw InputError(join(path, key), "not used by the \"table\" model");
    }
  }
  if (j.contains("matching_tol")) {
    b.matching_tol = as_number(j["matching_tol"], join(path, "matching_tol"));
  }
  const json& entries = require(j, "entries", path);
  const std::string ep = join(path, "entries");
  if (!entries.is_array() || entries.empty()) {
    throw InputError(ep, "expected a non-empty array");
  }
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string ip = at_index(ep, i);
    check_keys(entries[i], ip, {"omega", "gamma", "delta"});
    SpectralTableEntry e;
    e.omega = as_number(require(entries[i], "omega", ip), join(ip, "omega"));
    e.gamma = as_matrix(require(entries[i], "gamma", ip), join(ip, "gamma"));
    if (!is_square(e.gamma)) {
      throw InputError(join(ip, "gamma"), "matrix of shape " + shape(e.gamma) + " is not square");
    }
    if (entries[i].contains("delta")) {
      e.delta = as_matrix(entries[i]["delta"], join(ip, "delta"));
      if (e.delta->rows() != e.gamma.rows() || e.delta->cols() != e.gamma.cols()) {
        throw InputError(join(ip, "delta"), "shape differs from gamma");
      }
    }
    if (mode == LoadMode::kStrict) {
      std::ostringstream msg;
      const double scale = max_abs(e.gamma);
      const double defect = hermiticity_defect(e.gamma);
      if (defect > 1e-12 * std::max(1.0, scale)) {
        msg << "Gamma(" << e.omega << ") is not hermitian: defect " << defect;
        throw InputError(join(ip, "gamma"), msg.str());
      }
      const double lowest = min_hermitian_eigenvalue(e.gamma);
      if (lowest < -1e-8 * scale) {
        msg << "Gamma(" << e.omega << ") is not positive semidefinite: lowest eigenvalue "
            << lowest;
        throw InputError(join(ip, "gamma"), msg.str());
      }
      if (e.delta && hermiticity_defect(*e.delta) > 1e-12 * std::max(1.0, max_abs(*e.delta))) {
        msg << "Delta(" << e.omega << ") is not hermitian";
        throw InputError(join(ip, "delta"), msg.str());
      }
    }
    if (!b.table.empty() && e.gamma.rows() != b.table.front().gamma.rows()) {
      throw InputError(join(ip, "gamma"), "channel count differs from entries[0]");
    }
    b.table.push_back(std::move(e));
  }
  return b;
}

CouplingSpec parse_coupling(const json& j, const std::string& path) {
  check_keys(j, path, {"A", "X", "adjoint_partner"});
  CouplingSpec c;
  c.a = as_matrix(require(j, "A", path), join(path, "A"));
  if (j.contains("X")) {
    if (j["X"].is_string()) {
      c.x_tag = j["X"].get<std::string>();
      if (*c.x_tag != "modes") {
        throw InputError(join(path, "X"), "unknown channel tag \"" + *c.x_tag + "\"");
      }
    } else {
      c.x = as_matrix(j["X"], join(path, "X"));
    }
  }
  if (j.contains("adjoint_partner")) {
    c.adjoint_partner = as_bool(j["adjoint_partner"], join(path, "adjoint_partner"));
  }
  return c;
}

InitialStateSpec parse_initial(const json& j, std::size_t dim, double tol) {
  const std::string path = "initial_state";
  InitialStateSpec s;
  if (j.is_string()) {
    s.name = j.get<std::string>();
  } else {
    check_keys(j, path, {"named", "matrix", "diagonal"});
    if (j.size() != 1) {
      throw InputError(path, "give exactly one of \"named\", \"matrix\" or \"diagonal\"");
    }
    if (j.contains("named")) {
      s.name = as_string(j["named"], join(path, "named"));
    } else if (j.contains("matrix")) {
      s.kind = "matrix";
      s.matrix = as_matrix(j["matrix"], join(path, "matrix"));
    } else {
      s.kind = "diagonal";
      s.diagonal = as_real_list(j["diagonal"], join(path, "diagonal"));
    }
  }
  if (s.kind == "named" && s.name != "ground" && s.name != "excited" &&
      s.name != "maximally-mixed") {
    throw InputError(path, "unknown named state \"" + s.name +
                               "\" (expected ground, excited or maximally-mixed)");
  }
  if (s.kind == "matrix") {
    require_square(*s.matrix, dim, join(path, "matrix"), "system");
    const ValidationReport r = validate_density_matrix(*s.matrix, tol);
    if (!r.passed()) {
      std::ostringstream msg;
      msg << "not a density matrix: hermiticity defect " << r.hermiticity_defect
          << ", trace defect " << r.trace_defect << ", min eigenvalue " << r.min_eigenvalue;
      throw InputError(join(path, "matrix"), msg.str());
    }
  }
  if (s.kind == "diagonal") {
    if (s.diagonal.size() != dim) {
      throw InputError(join(path, "diagonal"),
                       "length " + std::to_string(s.diagonal.size()) +
                           " does not match system dimension " + std::to_string(dim));
    }
    double sum = 0.0;
    for (double p : s.diagonal) {
      if (p < -tol) {
        throw InputError(join(path, "diagonal"), "populations must be non-negative");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > tol) {
      throw InputError(join(path, "diagonal"), "populations must sum to 1");
    }
  }
  return s;
}

PolicySpec parse_policy(const json& j) {
  const std::string path = "policy";
  check_keys(j, path, {"mode", "filter", "dt", "matching_tol", "method"});
  PolicySpec p;
  if (j.contains("mode")) {
    const std::string m = as_string(j["mode"], join(path, "mode"));
    if (m == "secular") {
      p.mode = GeneratorMode::kSecular;
    } else if (m == "presecular") {
      p.mode = GeneratorMode::kPresecular;
    } else {
      throw InputError(join(path, "mode"), "expected \"secular\" or \"presecular\"");
    }
  }
  if (j.contains("filter")) {
    const std::string f = as_string(j["filter"], join(path, "filter"));
    if (f == "exact-match") {
      p.filter = SecularFilter::kExactMatch;
    } else if (f == "f-weighted") {
      p.filter = SecularFilter::kFWeighted;
    } else {
      throw InputError(join(path, "filter"), "expected \"exact-match\" or \"f-weighted\"");
    }
  }
  if (j.contains("dt")) {
    p.dt = as_number(j["dt"], join(path, "dt"));
  }
  if (j.contains("matching_tol")) {
    p.matching_tol = as_number(j["matching_tol"], join(path, "matching_tol"));
  }
  if (j.contains("method")) {
    const std::string m = as_string(j["method"], join(path, "method"));
    if (m == "auto") {
      p.method = Method::kAuto;
    } else if (m == "expm") {
      p.method = Method::kExpm;
    } else if (m == "rk4") {
      p.method = Method::kRk4;
    } else {
      throw InputError(join(path, "method"), "expected \"auto\", \"expm\" or \"rk4\"");
    }
  }
  if (p.mode == GeneratorMode::kPresecular && p.filter == SecularFilter::kFWeighted &&
      !(p.dt > 0.0)) {
    throw InputError(join(path, "dt"), "the F-weighted pre-secular mode needs dt > 0");
  }
  return p;
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  const std::size_t end = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + end, '\n'));
}

}  // namespace

Matrix SystemSpec::matrix() const {
  if (hamiltonian) {
    return *hamiltonian;
  }
  const auto& ev = eigenvalues.value();
  RealVector v = Eigen::Map<const RealVector>(ev.data(), static_cast<Eigen::Index>(ev.size()));
  return v.cast<Complex>().asDiagonal();
}

std::size_t SystemSpec::dim() const {
  return hamiltonian ? static_cast<std::size_t>(hamiltonian->rows())
                     : (eigenvalues ? eigenvalues->size() : 0);
}

std::size_t FiniteBathSpec::dim() const {
  if (hamiltonian) {
    return static_cast<std::size_t>(hamiltonian->rows());
  }
  return mode_model == "spin" ? (std::size_t{1} << modes.size()) : modes.size() + 1;
}

namespace {

// Single-site operator embedded at `site` of an n-site spin chain (site 0 is
// the most significant factor).
Matrix embed(const Matrix& op, std::size_t site, std::size_t n) {
  Matrix out = Matrix::Identity(1, 1);
  for (std::size_t k = 0; k < n; ++k) {
    out = tensor_product(out, k == site ? op : Matrix::Identity(2, 2), std::size_t{1} << n);
  }
  return out;
}

Matrix pauli_x() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = m(1, 0) = 1.0;
  return m;
}

Matrix pauli_z() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return m;
}

Matrix number_op() {
  Matrix m = Matrix::Zero(2, 2);
  m(1, 1) = 1.0;
  return m;
}

}  // namespace

Matrix FiniteBathSpec::matrix() const {
  if (hamiltonian) {
    return *hamiltonian;
  }
  const std::size_t n = modes.size();
  const auto d = static_cast<Eigen::Index>(dim());
  Matrix h = Matrix::Zero(d, d);
  if (mode_model == "spin") {
    for (std::size_t k = 0; k < n; ++k) {
      h += modes[k].frequency * embed(number_op(), k, n);
      if (k + 1 < n) {
        if (xx != 0.0) {
          h += xx * embed(pauli_x(), k, n) * embed(pauli_x(), k + 1, n);
        }
        if (zz != 0.0) {
          h += zz * embed(pauli_z(), k, n) * embed(pauli_z(), k + 1, n);
        }
      }
    }
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      h(static_cast<Eigen::Index>(k + 1), static_cast<Eigen::Index>(k + 1)) = modes[k].frequency;
    }
  }
  return h;
}

Matrix FiniteBathSpec::mode_coupling() const {
  const std::size_t n = modes.size();
  const auto d = static_cast<Eigen::Index>(dim());
  Matrix x = Matrix::Zero(d, d);
  if (mode_model == "spin") {
    for (std::size_t k = 0; k < n; ++k) {
      x += modes[k].coupling * embed(pauli_x(), k, n);
    }
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      const auto i = static_cast<Eigen::Index>(k + 1);
      x(0, i) = x(i, 0) = modes[k].coupling;
    }
  }
  return x;
}

Scenario parse_scenario(const std::string& text, LoadMode mode) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::ostringstream msg;
    msg << "JSON syntax error at line " << line_of(text, e.byte) << ": " << e.what();
    throw InputError("", msg.str());
  }
  check_keys(doc, "", {"name", "system", "bath", "couplings", "initial_state", "times", "policy",
                       "tolerances"});
  Scenario s;
  if (doc.contains("name")) {
    s.name = as_string(doc["name"], "name");
  }
  if (doc.contains("tolerances")) {
    const json& t = doc["tolerances"];
    check_keys(t, "tolerances", {"validation", "propagation"});
    if (t.contains("validation")) {
      s.tolerances.validation = as_number(t["validation"], "tolerances.validation");
    }
    if (t.contains("propagation")) {
      s.tolerances.propagation = as_number(t["propagation"], "tolerances.propagation");
    }
    if (!(s.tolerances.validation >= 0.0) || !(s.tolerances.propagation >= 0.0)) {
      throw InputError("tolerances", "tolerances must be non-negative");
    }
  }
  s.system = parse_system(require(doc, "system", ""));
  const std::size_t dim = s.system.dim();

  const json& bath = require(doc, "bath", "");
  const std::string type = as_string(require(bath, "type", "bath"), "bath.type");
  if (type == "finite") {
    s.bath = parse_finite_bath(bath);
  } else if (type == "analytic") {
    s.bath = parse_analytic_bath(bath, mode);
  } else {
    throw InputError("bath.type", "expected \"finite\" or \"analytic\"");
  }

  if (doc.contains("couplings")) {
    const json& cs = doc["couplings"];
    if (!cs.is_array()) {
      throw InputError("couplings", "expected an array");
    }
    for (std::size_t i = 0; i < cs.size(); ++i) {
      s.couplings.push_back(parse_coupling(cs[i], at_index("couplings", i)));
    }
  }
  for (std::size_t i = 0; i < s.couplings.size(); ++i) {
    const std::string cp = at_index("couplings", i);
    const CouplingSpec& c = s.couplings[i];
    require_square(c.a, dim, join(cp, "A"), "system");
    if (const auto* fb = std::get_if<FiniteBathSpec>(&s.bath)) {
      if (!c.x && !c.x_tag) {
        throw InputError(join(cp, "X"), "a finite bath needs a bath operator or the \"modes\" tag");
      }
      if (c.x) {
        require_square(*c.x, fb->dim(), join(cp, "X"), "bath");
      }
      if (c.x_tag && fb->modes.empty()) {
        throw InputError(join(cp, "X"), "the \"modes\" tag needs a bath given by modes");
      }
    } else if (c.x || c.x_tag) {
      throw InputError(join(cp, "X"), "analytic baths take no bath operators");
    }
  }
  if (const auto* ab = std::get_if<AnalyticBathSpec>(&s.bath)) {
    std::size_t channels = 0;
    for (const auto& c : s.couplings) {
      channels += c.adjoint_partner ? 2 : 1;
    }
    const std::size_t declared =
        ab->model == "table" ? static_cast<std::size_t>(ab->table.front().gamma.rows())
                             : ab->channels.value_or(channels);
    if (declared != channels) {
      throw InputError(ab->model == "table" ? "bath.entries" : "bath.channels",
                       std::to_string(declared) + " bath channels for " +
                           std::to_string(channels) + " coupling channels");
    }
  }

  s.initial_state = doc.contains("initial_state")
                        ? parse_initial(doc["initial_state"], dim, s.tolerances.validation)
                        : InitialStateSpec{};
  if (doc.contains("times")) {
    const json& t = doc["times"];
    check_keys(t, "times", {"t_max", "samples"});
    TimesSpec ts;
    ts.t_max = as_number(require(t, "t_max", "times"), "times.t_max");
    ts.samples = as_count(require(t, "samples", "times"), "times.samples");
    if (ts.t_max < 0.0) {
      throw InputError("times.t_max", "must be non-negative");
    }
    if (ts.samples < 1) {
      throw InputError("times.samples", "at least one sample is required");
    }
    s.times = ts;
  }
  if (doc.contains("policy")) {
    s.policy = parse_policy(doc["policy"]);
  }
  return s;
}

Scenario load_scenario(const std::string& path, LoadMode mode) {
  std::ifstream in(path);
  if (!in) {
    throw InputError("", "cannot open scenario file '" + path + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), mode);
}

std::string to_json_text(const Scenario& s, int indent) {
  json doc;
  if (!s.name.empty()) {
    doc["name"] = s.name;
  }
  json sys = json::object();
  if (s.system.hamiltonian) {
    sys["hamiltonian"] = matrix_json(*s.system.hamiltonian);
  } else if (s.system.eigenvalues) {
    sys["eigenvalues"] = *s.system.eigenvalues;
  }
  if (s.system.degeneracy_tol) {
    sys["degeneracy_tol"] = *s.system.degeneracy_tol;
  }
  doc["system"] = sys;

  json bath = json::object();
  if (const auto* fb = std::get_if<FiniteBathSpec>(&s.bath)) {
    bath["type"] = "finite";
    if (fb->hamiltonian) {
      bath["hamiltonian"] = matrix_json(*fb->hamiltonian);
    } else {
      json modes = json::array();
      for (const auto& m : fb->modes) {
        modes.push_back({{"frequency", m.frequency}, {"coupling", m.coupling}});
      }
      bath["modes"] = modes;
      bath["mode_model"] = fb->mode_model;
      if (fb->mode_model == "spin") {
        bath["interaction"] = {{"xx", fb->xx}, {"zz", fb->zz}};
      }
    }
    bath["temperature"] = temperature_json(fb->temperature);
    if (fb->broadening) {
      bath["broadening"] = *fb->broadening;
    }
    bath["center"] = fb->center;
  } else {
    const auto& ab = std::get<AnalyticBathSpec>(s.bath);
    bath["type"] = "analytic";
    bath["model"] = ab.model;
    if (ab.model == "flat-thermal") {
      bath["gamma"] = ab.gamma;
      bath["temperature"] = temperature_json(ab.temperature);
      bath["dephasing"] = ab.dephasing;
      if (ab.channels) {
        bath["channels"] = *ab.channels;
      }
    } else {
      json entries = json::array();
      for (const auto& e : ab.table) {
        json row = {{"omega", e.omega}, {"gamma", matrix_json(e.gamma)}};
        if (e.delta) {
          row["delta"] = matrix_json(*e.delta);
        }
        entries.push_back(std::move(row));
      }
      bath["entries"] = entries;
      bath["matching_tol"] = ab.matching_tol;
    }
    if (ab.tau_b) {
      bath["tau_b"] = *ab.tau_b;
    }
  }
  doc["bath"] = bath;

  json cs = json::array();
  for (const auto& c : s.couplings) {
    json cj = {{"A", matrix_json(c.a)}};
    if (c.x) {
      cj["X"] = matrix_json(*c.x);
    } else if (c.x_tag) {
      cj["X"] = *c.x_tag;
    }
    cj["adjoint_partner"] = c.adjoint_partner;
    cs.push_back(std::move(cj));
  }
  doc["couplings"] = cs;

  const auto& is = s.initial_state;
  if (is.kind == "matrix") {
    doc["initial_state"] = {{"matrix", matrix_json(*is.matrix)}};
  } else if (is.kind == "diagonal") {
    doc["initial_state"] = {{"diagonal", is.diagonal}};
  } else {
    doc["initial_state"] = {{"named", is.name}};
  }
  if (s.times) {
    doc["times"] = {{"t_max", s.times->t_max}, {"samples", s.times->samples}};
  }
  json pol = {{"mode", to_string(s.policy.mode)},
              {"filter", to_string(s.policy.filter)},
              {"dt", s.policy.dt},
              {"method", to_string(s.policy.method)}};
  if (s.policy.matching_tol) {
    pol["matching_tol"] = *s.policy.matching_tol;
  }
  doc["policy"] = pol;
  doc["tolerances"] = {{"validation", s.tolerances.validation},
                       {"propagation", s.tolerances.propagation}};
  return doc.dump(indent);
}

namespace {

bool same(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

bool same(const std::optional<Matrix>& a, const std::optional<Matrix>& b) {
  return a.has_value() == b.has_value() && (!a || same(*a, *b));
}

}  // namespace

bool operator==(const Scenario& a, const Scenario& b) {
  if (a.name != b.name || !same(a.system.hamiltonian, b.system.hamiltonian) ||
      a.system.eigenvalues != b.system.eigenvalues ||
      a.system.degeneracy_tol != b.system.degeneracy_tol || a.bath.index() != b.bath.index()) {
    return false;
  }
  if (const auto* fa = std::get_if<FiniteBathSpec>(&a.bath)) {
    const auto& fb = std::get<FiniteBathSpec>(b.bath);
    if (!same(fa->hamiltonian, fb.hamiltonian) || fa->modes.size() != fb.modes.size() ||
        fa->mode_model != fb.mode_model || fa->xx != fb.xx || fa->zz != fb.zz ||
        fa->temperature != fb.temperature || fa->broadening != fb.broadening ||
        fa->center != fb.center) {
      return false;
    }
    for (std::size_t k = 0; k < fa->modes.size(); ++k) {
      if (fa->modes[k].frequency != fb.modes[k].frequency ||
          fa->modes[k].coupling != fb.modes[k].coupling) {
        return false;
      }
    }
  } else {
    const auto& x = std::get<AnalyticBathSpec>(a.bath);
    const auto& y = std::get<AnalyticBathSpec>(b.bath);
    if (x.model != y.model || x.gamma != y.gamma || x.temperature != y.temperature ||
        x.dephasing != y.dephasing || x.channels != y.channels ||
        x.matching_tol != y.matching_tol || x.tau_b != y.tau_b ||
        x.table.size() != y.table.size()) {
      return false;
    }
    for (std::size_t k = 0; k < x.table.size(); ++k) {
      if (x.table[k].omega != y.table[k].omega || !same(x.table[k].gamma, y.table[k].gamma) ||
          !same(x.table[k].delta, y.table[k].delta)) {
        return false;
      }
    }
  }
  if (a.couplings.size() != b.couplings.size()) {
    return false;
  }
  for (std::size_t k = 0; k < a.couplings.size(); ++k) {
    const auto& x = a.couplings[k];
    const auto& y = b.couplings[k];
    if (!same(x.a, y.a) || !same(x.x, y.x) || x.x_tag != y.x_tag ||
        x.adjoint_partner != y.adjoint_partner) {
      return false;
    }
  }
  const auto& ia = a.initial_state;
  const auto& ib = b.initial_state;
  if (ia.kind != ib.kind || ia.name != ib.name || !same(ia.matrix, ib.matrix) ||
      ia.diagonal != ib.diagonal) {
    return false;
  }
  if (a.times.has_value() != b.times.has_value() ||
      (a.times && (a.times->t_max != b.times->t_max || a.times->samples != b.times->samples))) {
    return false;
  }
  return a.policy.mode == b.policy.mode && a.policy.filter == b.policy.filter &&
         a.policy.dt == b.policy.dt && a.policy.matching_tol == b.policy.matching_tol &&
         a.policy.method == b.policy.method &&
         a.tolerances.validation == b.tolerances.validation &&
         a.tolerances.propagation == b.tolerances.propagation;
}

Model build_model(const Scenario& s, double coupling_scale) {
  if (!std::isfinite(coupling_scale)) {
    throw InputError("coupling-scale", "must be finite");
  }
  Model m;
  m.coupling_scale = coupling_scale;
  m.h_a_input = s.system.matrix();
  m.h_a = m.h_a_input;
  std::vector<Matrix> xs;
  for (std::size_t i = 0; i < s.couplings.size(); ++i) {
    const CouplingSpec& c = s.couplings[i];
    m.a_ops.push_back(coupling_scale * c.a);
    if (s.finite_bath()) {
      const auto& fb = std::get<FiniteBathSpec>(s.bath);
      xs.push_back(c.x ? *c.x : fb.mode_coupling());
    }
    if (c.adjoint_partner) {
      m.a_ops.push_back(coupling_scale * c.a.adjoint());
      if (s.finite_bath()) {
        xs.push_back(xs.back().adjoint());
      }
    }
  }

  if (const auto* fb = std::get_if<FiniteBathSpec>(&s.bath)) {
    FiniteBath raw(fb->matrix(), fb->temperature, xs, fb->broadening);
    m.raw_bath = raw;
    if (fb->center && !xs.empty()) {
      CenteredCouplings cc = center_couplings(raw, m.a_ops);
      const double defect = hermiticity_defect(cc.h_a_shift);
      if (defect > 1e-10 * std::max(1.0, max_abs(cc.h_a_shift))) {
        std::ostringstream msg;
        msg << "the coupling mean shift is not hermitian (defect " << defect
            << "); mark non-hermitian channels with \"adjoint_partner\"";
        throw InputError("couplings", msg.str());
      }
      m.h_a += 0.5 * (cc.h_a_shift + cc.h_a_shift.adjoint());
      m.coupling_means = cc.means;
      m.bath = std::move(cc.bath);
    } else {
      m.coupling_means.assign(xs.size(), Complex(0.0));
      m.bath = raw;
    }
    return m;
  }

  const auto& ab = std::get<AnalyticBathSpec>(s.bath);
  m.tau_b = ab.tau_b;
  if (ab.model == "flat-thermal") {
    const EigenDecomposition eig = hermitian_eigendecomposition(
        m.h_a, std::max(kDefaultValidationTol, 1e-12 * max_abs(m.h_a)));
    const double tol = s.system.degeneracy_tol.value_or(default_degeneracy_tol(eig.values));
    m.bath = flat_thermal_bath(ab.gamma, ab.temperature, ab.dephasing,
                               ab.channels.value_or(m.a_ops.size()), 0.5 * tol);
  } else {
    m.bath = table_bath(ab.table, ab.matching_tol);
  }
  return m;
}

DensityMatrix initial_state(const Scenario& s, const Matrix& h_a) {
  const auto& is = s.initial_state;
  const auto d = h_a.rows();
  const double tol = s.tolerances.validation;
  if (is.kind == "matrix") {
    return DensityMatrix(*is.matrix, tol);
  }
  if (is.kind == "diagonal") {
    RealVector p =
        Eigen::Map<const RealVector>(is.diagonal.data(), static_cast<Eigen::Index>(is.diagonal.size()));
    return DensityMatrix(p.cast<Complex>().asDiagonal(), tol);
  }
  if (is.name == "maximally-mixed") {
    return DensityMatrix(Matrix::Identity(d, d) / static_cast<double>(d), tol);
  }
  const EigenDecomposition eig =
      hermitian_eigendecomposition(h_a, std::max(kDefaultValidationTol, 1e-12 * max_abs(h_a)));
  const Vector v = eig.vectors.col(is.name == "excited" ? d - 1 : 0);
  return DensityMatrix(v * v.adjoint(), tol);
}

}  // namespace lindform
