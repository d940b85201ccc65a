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

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lindform/bath.hpp"
#include "lindform/commands.hpp"
#include "lindform/core.hpp"
#include "lindform/dynamics.hpp"
#include "lindform/generator.hpp"
#include "lindform/scenario.hpp"
#include "lindform/spectral.hpp"

namespace py = pybind11;
using namespace lindform;

namespace {

Bath to_bath(const py::object& obj) {
  if (py::isinstance<FiniteBath>(obj)) {
    return obj.cast<FiniteBath>();
  }
  return obj.cast<AnalyticBath>();
}

Generator make_generator(const Matrix& h_a, const std::vector<Matrix>& a_ops,
                         const py::object& bath, const std::string& mode, double dt,
                         const std::string& filter, std::optional<double> degeneracy_tol) {
  const Spectrum s = build_spectrum(h_a, degeneracy_tol);
  const auto eigenops = decompose_couplings(a_ops, s);
  if (mode == "secular") {
    return build_standard_form(s, eigenops, to_bath(bath));
  }
  if (mode != "presecular") {
    throw InputError("mode", "expected \"secular\" or \"presecular\"");
  }
  SecularPolicy policy;
  policy.dt = dt;
  if (filter == "exact-match") {
    policy.filter = SecularFilter::kExactMatch;
  } else if (filter == "f-weighted") {
    policy.filter = SecularFilter::kFWeighted;
  } else {
    throw InputError("filter", "expected \"exact-match\" or \"f-weighted\"");
  }
  return build_presecular(s, eigenops, to_bath(bath), policy);
}

Method parse_method(const std::string& name) {
  if (name == "auto") return Method::kAuto;
  if (name == "expm") return Method::kExpm;
  if (name == "rk4") return Method::kRk4;
  throw InputError("method", "expected auto, expm or rk4");
}

py::tuple command_result(const CommandOutput& out) {
  return py::make_tuple(out.exit_code, out.text, out.csv, out.error);
}

}  // namespace

PYBIND11_MODULE(_lindform, m) {
  m.doc() = "Lindblad master equations from microscopic system-bath models";

  auto base = py::register_exception<Error>(m, "LindformError", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<SizeError>(m, "SizeError", base.ptr());
  py::register_exception<StructuralError>(m, "StructuralError", base.ptr());
  py::register_exception<ContractViolation>(m, "ContractViolation", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<PsdViolation>(m, "PsdViolation", base.ptr());
  py::register_exception<PropagationError>(m, "PropagationError", base.ptr());

  m.def("commutator", &commutator);
  m.def("tensor_product", [](const Matrix& a, const Matrix& b) { return tensor_product(a, b); });
  m.def("partial_trace_bath", &partial_trace_bath, py::arg("rho_ab"), py::arg("dim_a"),
        py::arg("dim_b"));
  m.def("partial_trace_system", &partial_trace_system, py::arg("rho_ab"), py::arg("dim_a"),
        py::arg("dim_b"));
  m.def("trace_distance", &trace_distance);
  m.def("validate_density_matrix", [](const Matrix& rho, double tol) {
    const ValidationReport r = validate_density_matrix(rho, tol);
    return py::dict(py::arg("ok") = r.passed(),
                    py::arg("hermiticity_defect") = r.hermiticity_defect,
                    py::arg("trace_defect") = r.trace_defect,
                    py::arg("min_eigenvalue") = r.min_eigenvalue);
  }, py::arg("rho"), py::arg("tol") = kDefaultValidationTol);

  py::class_<Multiplet>(m, "Multiplet")
      .def_readonly("frequency", &Multiplet::frequency)
      .def_readonly("members", &Multiplet::members)
      .def_property_readonly("degeneracy", &Multiplet::degeneracy);

  py::class_<Spectrum>(m, "Spectrum")
      .def_property_readonly("dim", &Spectrum::dim)
      .def_property_readonly("eigenvalues", &Spectrum::eigenvalues)
      .def_property_readonly("basis", &Spectrum::basis)
      .def_property_readonly("multiplets", &Spectrum::multiplets)
      .def_property_readonly("nondegenerate", &Spectrum::nondegenerate)
      .def_property_readonly("bohr_frequencies",
                             [](const Spectrum& s) { return s.bohr().values(); })
      .def("to_eigenbasis", &Spectrum::to_eigenbasis)
      .def("from_eigenbasis", &Spectrum::from_eigenbasis);

  m.def("build_spectrum", &build_spectrum, py::arg("h_a"), py::arg("degeneracy_tol") = py::none());
  m.def("eigenoperator", &eigenoperator, py::arg("a"), py::arg("spectrum"), py::arg("omega"));
  m.def("eigenoperators", [](const Matrix& a, const Spectrum& s) {
    std::vector<std::pair<double, Matrix>> out;
    for (const auto& t : eigenoperator_decomposition(a, s).terms) {
      out.emplace_back(t.omega, t.op);
    }
    return out;
  }, py::arg("a"), py::arg("spectrum"));

  py::class_<FiniteBath>(m, "FiniteBath")
      .def(py::init<Matrix, double, std::vector<Matrix>, std::optional<double>>(),
           py::arg("h_b"), py::arg("temperature"), py::arg("couplings"),
           py::arg("broadening") = py::none())
      .def_property_readonly("dim", &FiniteBath::dim)
      .def_property_readonly("gibbs", &FiniteBath::gibbs)
      .def_property_readonly("broadening", &FiniteBath::broadening)
      .def_property_readonly("channel_count", &FiniteBath::channel_count);

  py::class_<AnalyticBath>(m, "AnalyticBath")
      .def(py::init([](std::size_t channels, std::function<Matrix(double)> gamma,
                       std::function<Matrix(double)> delta) {
             return AnalyticBath{channels, std::move(gamma), std::move(delta), "custom"};
           }),
           py::arg("channel_count"), py::arg("gamma_fn"), py::arg("delta_fn") = nullptr)
      .def_readonly("channel_count", &AnalyticBath::channel_count)
      .def_readonly("model", &AnalyticBath::model);

  m.def("flat_thermal_bath", &flat_thermal_bath, py::arg("gamma"), py::arg("temperature"),
        py::arg("dephasing") = 0.0, py::arg("channels") = 1, py::arg("zero_tol") = 1e-9);
  m.def("gamma_matrix", [](const py::object& b, double w) { return gamma_matrix(to_bath(b), w); });
  m.def("delta_matrix", [](const py::object& b, double w) { return delta_matrix(to_bath(b), w); });
  m.def("correlation_function", &correlation_function, py::arg("bath"), py::arg("alpha"),
        py::arg("beta"), py::arg("tau"));
  m.def("correlation_two_time", &correlation_two_time, py::arg("bath"), py::arg("alpha"),
        py::arg("beta"), py::arg("t1"), py::arg("t2"));
  m.def("f_weight", &f_weight, py::arg("x"), py::arg("dt"));

  py::class_<Generator>(m, "Generator")
      .def_readonly("dim", &Generator::dim)
      .def_property_readonly("mode", [](const Generator& g) { return to_string(g.mode); })
      .def_readonly("h_ls", &Generator::h_ls)
      .def_readonly("h_eff", &Generator::h_eff)
      .def_property_readonly("free_evolution", &Generator::free_evolution)
      .def("rhs", &Generator::rhs)
      .def("superoperator",
           [](const Generator& g) { return liouvillian_superoperator(g).matrix; });

  m.def("build_generator", &make_generator, py::arg("h_a"), py::arg("a_ops"), py::arg("bath"),
        py::arg("mode") = "secular", py::arg("dt") = 0.0, py::arg("filter") = "f-weighted",
        py::arg("degeneracy_tol") = py::none());

  m.def("propagate", [](const Generator& g, const Matrix& rho0, const std::vector<double>& times,
                        const std::string& method) {
    PropagationOptions options;
    options.method = parse_method(method);
    return propagate(DensityMatrix(rho0), g, times, options).states;
  }, py::arg("generator"), py::arg("rho0"), py::arg("times"), py::arg("method") = "auto");

  m.def("exact_oracle", [](const Matrix& h_a, const FiniteBath& bath,
                           const std::vector<Matrix>& a_ops, const Matrix& rho0,
                           const std::vector<double>& times) {
    return exact_oracle(h_a, bath, a_ops, DensityMatrix(rho0), times).states;
  }, py::arg("h_a"), py::arg("bath"), py::arg("a_ops"), py::arg("rho0"), py::arg("times"));

  m.def("timescale_report", [](const FiniteBath& bath, const std::vector<Matrix>& a_ops) {
    const TimescaleReport r = timescale_report(bath, a_ops);
    return py::dict(py::arg("tau_b") = r.tau_b, py::arg("t_a_estimate") = r.t_a_estimate,
                    py::arg("v_strength") = r.v_strength,
                    py::arg("two_scale_ratio") = r.two_scale_ratio,
                    py::arg("verdict") = to_string(r.verdict));
  });

  // Scenario-level commands return (exit_code, text, csv, error_json).
  m.def("derive", [](const std::string& text) { return command_result(cmd_derive(parse_scenario(text))); },
        py::arg("scenario_json"));
  m.def("evolve", [](const std::string& text, std::optional<std::string> method) {
    std::optional<Method> mm;
    if (method) mm = parse_method(*method);
    return command_result(cmd_evolve(parse_scenario(text), mm));
  }, py::arg("scenario_json"), py::arg("method") = py::none());
  m.def("verify", [](const std::string& text) {
    return command_result(cmd_verify(parse_scenario(text, LoadMode::kLenient)));
  }, py::arg("scenario_json"));
  m.def("oracle", [](const std::string& text, double scale) {
    return command_result(cmd_oracle(parse_scenario(text), scale));
  }, py::arg("scenario_json"), py::arg("coupling_scale") = 1.0);
  m.def("normalize_scenario",
        [](const std::string& text) { return to_json_text(parse_scenario(text)); });
}
