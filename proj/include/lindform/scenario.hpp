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

// Scenario files: the complete microscopic input of one run.
//
// JSON layout (complex numbers are [re, im]; matrices are row-major nested
// arrays of complex numbers). See README.md for the full schema.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lindform/bath.hpp"
#include "lindform/core.hpp"
#include "lindform/dynamics.hpp"
#include "lindform/generator.hpp"
#include "lindform/spectral.hpp"

namespace lindform {

struct SystemSpec {
  std::optional<Matrix> hamiltonian;
  std::optional<std::vector<double>> eigenvalues;  // H_A = diag(eigenvalues)
  std::optional<double> degeneracy_tol;

  Matrix matrix() const;
  std::size_t dim() const;
};

struct ModeSpec {
  double frequency = 0.0;
  double coupling = 0.0;
};

/// Either an explicit H_B or a list of modes. Mode models:
///   "spin": one two-level system per mode, H_B = sum_k nu_k n_k
///           + xx sum_k s^x_k s^x_{k+1} + zz sum_k s^z_k s^z_{k+1};
///           the "modes" coupling tag is X = sum_k g_k s^x_k.
///   "single-excitation": vacuum plus one excitation per mode, H_B = sum_k nu_k |k><k|;
///           the "modes" tag is X = sum_k g_k (|0><k| + |k><0|).
struct FiniteBathSpec {
  std::optional<Matrix> hamiltonian;
  std::vector<ModeSpec> modes;
  std::string mode_model = "spin";
  double xx = 0.0;
  double zz = 0.0;
  double temperature = kInfiniteTemperature;
  std::optional<double> broadening;
  /// Subtract <X>_B from each coupling and move the offset into H_A.
  bool center = true;

  Matrix matrix() const;
  std::size_t dim() const;
  /// The operator behind the "modes" tag.
  Matrix mode_coupling() const;
};

struct AnalyticBathSpec {
  std::string model = "flat-thermal";  // or "table"
  double gamma = 0.0;
  double temperature = 0.0;
  double dephasing = 0.0;
  std::optional<std::size_t> channels;  // defaults to the number of coupling channels
  std::vector<SpectralTableEntry> table;
  double matching_tol = 1e-9;
  /// Correlation time for the timescale report (no microscopic operators here).
  std::optional<double> tau_b;
};

struct CouplingSpec {
  Matrix a;
  std::optional<Matrix> x;           // explicit bath operator (finite bath)
  std::optional<std::string> x_tag;  // "modes"
  /// Also add the channel (A^dag, X^dag) so that the total coupling is hermitian.
  bool adjoint_partner = false;
};

struct InitialStateSpec {
  std::string kind = "named";   // "named" | "matrix" | "diagonal"
  std::string name = "ground";  // "ground" | "excited" | "maximally-mixed"
  std::optional<Matrix> matrix;
  std::vector<double> diagonal;  // in the user basis
};

struct TimesSpec {
  double t_max = 0.0;
  std::size_t samples = 2;
};

struct PolicySpec {
  GeneratorMode mode = GeneratorMode::kSecular;
  SecularFilter filter = SecularFilter::kFWeighted;
  double dt = 0.0;
  std::optional<double> matching_tol;
  Method method = Method::kAuto;
};

struct ToleranceSpec {
  double validation = kDefaultValidationTol;
  double propagation = 1e-6;
};

struct Scenario {
  std::string name;
  SystemSpec system;
  std::variant<FiniteBathSpec, AnalyticBathSpec> bath;
  std::vector<CouplingSpec> couplings;
  InitialStateSpec initial_state;
  std::optional<TimesSpec> times;
  PolicySpec policy;
  ToleranceSpec tolerances;

  bool finite_bath() const { return std::holds_alternative<FiniteBathSpec>(bath); }
};

/// Strict loading rejects analytic table rows whose Gamma is not hermitian or
/// not positive semidefinite; lenient loading keeps them so that `verify` can
/// report the defect.
enum class LoadMode { kStrict, kLenient };

/// Throws InputError naming the offending JSON path (and line for syntax errors).
Scenario parse_scenario(const std::string& text, LoadMode mode = LoadMode::kStrict);
Scenario load_scenario(const std::string& path, LoadMode mode = LoadMode::kStrict);
/// Canonical JSON; parse_scenario(to_json_text(s)) reproduces s exactly.
std::string to_json_text(const Scenario& scenario, int indent = 2);

bool operator==(const Scenario& a, const Scenario& b);

/// The scenario turned into library objects.
struct Model {
  Matrix h_a_input;
  Matrix h_a;  // h_a_input plus the coupling mean shift
  std::vector<Matrix> a_ops;
  Bath bath{AnalyticBath{}};          // centered when requested
  std::optional<FiniteBath> raw_bath;  // as written in the scenario
  std::vector<Complex> coupling_means;
  std::optional<double> tau_b;        // analytic baths only
  double coupling_scale = 1.0;
};

/// Expands adjoint partners, resolves tags, centers couplings and multiplies
/// every system operator by `coupling_scale`.
Model build_model(const Scenario& scenario, double coupling_scale = 1.0);

/// The initial state as a density matrix in the user basis.
DensityMatrix initial_state(const Scenario& scenario, const Matrix& h_a);

}  // namespace lindform
