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

// Time evolution under a generator, the exact system+bath reference and
// timescale diagnostics.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lindform/bath.hpp"
#include "lindform/core.hpp"
#include "lindform/generator.hpp"

namespace lindform {

/// Largest system dimension for which a d^2 x d^2 superoperator is formed.
inline constexpr std::size_t kMaxSuperoperatorDim = 64;
/// Default cap on dim_A * dim_B for the exact oracle; LF_MAX_DIM overrides it.
inline constexpr std::size_t kDefaultOracleDim = 1024;

/// L with L vec(rho) = vec(g.rhs(rho)) under column stacking.
Superoperator liouvillian_superoperator(const Generator& g,
                                        std::size_t max_dim = kMaxSuperoperatorDim);

enum class Method { kAuto, kExpm, kRk4 };
const char* to_string(Method method);

struct SampleDiagnostics {
  double trace_defect = 0.0;
  double hermiticity_defect = 0.0;
  double min_eigenvalue = 0.0;
};

struct PropagationFailure {
  double time = 0.0;
  double min_eigenvalue = 0.0;
  std::string message;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Matrix> states;
  std::vector<SampleDiagnostics> diagnostics;
  Method method = Method::kAuto;
  /// Set when propagation stopped early; `states` holds the samples before it.
  std::optional<PropagationFailure> failure;

  std::size_t size() const { return times.size(); }
};

struct PropagationOptions {
  Method method = Method::kAuto;
  /// kAuto picks expm up to this dimension and rk4 above it.
  std::size_t expm_max_dim = 32;
  /// A state with min eigenvalue below -validity_tol stops propagation.
  double validity_tol = 1e-6;
  /// rk4 step <= step_fraction / (upper bound on the norm of L).
  double step_fraction = 0.05;
};

/// `times` must be non-negative and strictly increasing; rho0 is the state at t = 0.
/// Throws PropagationError when the state leaves the validity region.
Trajectory propagate(const DensityMatrix& rho0, const Generator& g, std::span<const double> times,
                     const PropagationOptions& options = {});

/// As propagate, but reports a validity failure in Trajectory::failure.
Trajectory propagate_partial(const DensityMatrix& rho0, const Generator& g,
                             std::span<const double> times,
                             const PropagationOptions& options = {});

/// Upper bound on the induced 2-norm of the map rho -> g.rhs(rho).
double rhs_norm_bound(const Generator& g);

/// Evenly spaced samples 0, t_max/(samples-1), ..., t_max.
std::vector<double> time_grid(double t_max, std::size_t samples);

/// Oracle dimension cap: LF_MAX_DIM if set to a positive integer, else kDefaultOracleDim.
std::size_t oracle_dim_cap();

/// H_A (x) 1 + 1 (x) H_B + sum_a A_a (x) X_a, started from rho_A (x) sigma_B and
/// evolved unitarily; the reduced state is sampled at `times`.
Trajectory exact_oracle(const Matrix& h_a, const FiniteBath& bath, std::span<const Matrix> a_ops,
                        const DensityMatrix& rho_a0, std::span<const double> times,
                        std::optional<std::size_t> max_dim = std::nullopt);

enum class PictureDirection { kTo, kFrom };

/// kTo: e^{i h0 t} op e^{-i h0 t}; kFrom: the inverse transform.
Matrix interaction_picture(const Matrix& op, const Matrix& h0, double t,
                           PictureDirection direction);

enum class Verdict { kPass, kWarn, kFail };
const char* to_string(Verdict verdict);

struct TimescaleReport {
  double tau_b = 0.0;
  double t_a_estimate = 0.0;
  double v_strength = 0.0;
  double two_scale_ratio = 0.0;
  bool tau_b_non_decaying = false;
  Verdict verdict = Verdict::kPass;
};

/// Verdict for V tau_B: pass below 0.1, warn below 1, fail otherwise.
Verdict classify_two_scale_ratio(double ratio);

/// V = sqrt(max_a Tr{X_a^dag X_a sigma_B}) * max_a ||A_a||_2, T_A = 1/(V^2 tau_B).
TimescaleReport timescale_report(const FiniteBath& bath, std::span<const Matrix> a_ops);

/// For a bath without microscopic operators: V and tau_B supplied by the caller.
TimescaleReport timescale_report(double tau_b, double v_strength);

/// max_t (1/2) ||rho_1(t) - rho_2(t)||_1 over the common samples.
double max_trace_distance(const Trajectory& a, const Trajectory& b);

}  // namespace lindform
