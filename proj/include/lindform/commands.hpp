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

// The derive / evolve / verify / oracle pipelines behind the command line.

#pragma once

#include <cstddef>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "lindform/dynamics.hpp"
#include "lindform/generator.hpp"
#include "lindform/scenario.hpp"
#include "lindform/spectral.hpp"

namespace lindform {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvariantFailure = 1;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitResourceCap = 3;

/// Largest system dimension for which derive forms energy-basis kernels and
/// the battery forms superoperators.
inline constexpr std::size_t kMaxKernelDim = 16;

/// Spectrum, eigenoperators, generator and rate tensors of one scenario.
struct Derivation {
  Model model;
  Spectrum spectrum;
  std::vector<EigenOperatorSet> eigenops;
  Generator generator;
  RateTensors rates;
  /// Omitted above kMaxKernelDim, where the d^2 x d^2 kernel gets large.
  std::optional<PauliEquations> pauli;
  std::optional<TimescaleReport> timescale;
};

Derivation derive(const Scenario& scenario, double coupling_scale = 1.0);

enum class CheckStatus { kPass, kWarn, kFail };
const char* to_string(CheckStatus status);

struct CheckResult {
  std::string name;
  CheckStatus status = CheckStatus::kPass;
  double defect = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

/// The full invariant battery. Never throws for numeric defects: a failing
/// stage is reported as a failed item.
std::vector<CheckResult> invariant_battery(const Scenario& scenario);

struct CommandOutput {
  int exit_code = kExitOk;
  /// Main artifact: JSON report (derive, verify, oracle) or CSV (evolve).
  std::string text;
  /// Second artifact: the comparison CSV of `oracle`.
  std::string csv;
  /// Structured error record (JSON) when exit_code != 0 because of an error.
  std::string error;
};

CommandOutput cmd_derive(const Scenario& scenario);
CommandOutput cmd_evolve(const Scenario& scenario, std::optional<Method> method = std::nullopt);
CommandOutput cmd_verify(const Scenario& scenario);
CommandOutput cmd_oracle(const Scenario& scenario, double coupling_scale = 1.0);

/// 2 for input, structural, domain and contract errors, 3 for size caps,
/// 1 otherwise.
int exit_code_for(const std::exception& e);
/// {"error": {"kind": ..., "message": ..., "field"?: ..., "time"?: ...}}
std::string error_record(const std::exception& e);

}  // namespace lindform
