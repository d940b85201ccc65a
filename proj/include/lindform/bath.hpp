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

// Reservoir models and their spectral matrices.
//
// Conventions (hbar = k_B = 1):
//   G_ab(tau)   = Tr{ e^{iH tau} X_a^dagger e^{-iH tau} X_b sigma_B }
//   W_ab(omega) = int_0^inf dtau e^{i omega tau} G_ab(tau)
//   Gamma       = W + W^dagger            (Fourier transform over the full line)
//   Delta       = (W - W^dagger) / (2i)   so that W = Gamma/2 + i Delta
//
// A finite bath has a discrete spectrum, so every half-line integral carries
// a convergence factor e^{-eps tau}; each oscillating term then integrates to
// weight * i / ((omega + w_zx) + i eps).

#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lindform/core.hpp"

namespace lindform {

inline constexpr double kInfiniteTemperature = std::numeric_limits<double>::infinity();

/// Gibbs state exp(-H/T)/Z; T = +inf gives the maximally mixed state.
DensityMatrix gibbs_state(const Matrix& h_b, double temperature);

/// Thermal populations of the ascending energies (shifted by min E).
RealVector boltzmann_weights(const RealVector& energies, double temperature);

/// A reservoir with an explicit hamiltonian and coupling operators X_a.
class FiniteBath {
 public:
  /// `broadening` defaults to 4x the mean spacing of the distinct Bohr
  /// frequencies of h_b.
  FiniteBath(Matrix h_b, double temperature, std::vector<Matrix> couplings,
             std::optional<double> broadening = std::nullopt);

  const Matrix& hamiltonian() const { return h_b_; }
  double temperature() const { return temperature_; }
  const std::vector<Matrix>& couplings() const { return couplings_; }
  double broadening() const { return broadening_; }
  std::size_t channel_count() const { return couplings_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(h_b_.rows()); }

  const RealVector& energies() const { return eig_.values; }
  const Matrix& eigenbasis() const { return eig_.vectors; }
  const RealVector& populations() const { return populations_; }
  /// sigma_B in the user basis.
  const Matrix& gibbs() const { return gibbs_; }
  /// Z^dagger X_a Z.
  const Matrix& coupling_in_eigenbasis(std::size_t channel) const {
    return couplings_eig_[channel];
  }

  /// Same hamiltonian and temperature, different couplings (and broadening).
  FiniteBath with_couplings(std::vector<Matrix> couplings) const;
  FiniteBath with_broadening(double broadening) const;

 private:
  Matrix h_b_;
  double temperature_;
  std::vector<Matrix> couplings_;
  double broadening_;
  EigenDecomposition eig_;
  RealVector populations_;
  Matrix gibbs_;
  std::vector<Matrix> couplings_eig_;
};

/// Mean spacing of the distinct Bohr frequencies of a spectrum, times four.
double default_broadening(const RealVector& energies);

/// Gamma/Delta supplied directly as matrix-valued functions of omega.
struct AnalyticBath {
  std::size_t channel_count = 1;
  std::function<Matrix(double)> gamma_fn;
  std::function<Matrix(double)> delta_fn;  // empty means Delta = 0
  std::string model = "custom";
};

/// Gamma(omega) = g (nbar(omega)+1) for omega > 0, g nbar(|omega|) for omega < 0
/// and `dephasing` at omega = 0 (|omega| <= zero_tol), times the identity over
/// channels; nbar is the Bose factor at `temperature` (T = 0 allowed).
AnalyticBath flat_thermal_bath(double gamma, double temperature, double dephasing = 0.0,
                               std::size_t channels = 1, double zero_tol = 1e-9);

struct SpectralTableEntry {
  double omega = 0.0;
  Matrix gamma;
  std::optional<Matrix> delta;
};

/// Piecewise lookup: the entry within `matching_tol` of omega; ContractViolation
/// if none matches. Entries are not validated here (see validate_table_entry).
AnalyticBath table_bath(std::vector<SpectralTableEntry> entries, double matching_tol = 1e-9);

using Bath = std::variant<FiniteBath, AnalyticBath>;

std::size_t channel_count(const Bath& bath);

/// Raw Gamma(omega) with no hermiticity or positivity checks.
Matrix evaluate_gamma(const Bath& bath, double omega);
/// Gamma(omega); throws ContractViolation if not hermitian and PsdViolation if
/// its lowest eigenvalue is below -1e-8 * max|Gamma|.
Matrix gamma_matrix(const Bath& bath, double omega);
/// Delta(omega); hermitian, not necessarily positive.
Matrix delta_matrix(const Bath& bath, double omega);
/// W(omega) = Gamma/2 + i Delta.
Matrix w_matrix(const Bath& bath, double omega);

struct CouplingPair {
  Matrix a;
  Matrix x;
};

/// Hermitian channels q (x) Q + p (x) P reproducing sum_k (A_k (x) X_k^dagger +
/// A_k^dagger (x) X_k); vanishing products are dropped.
std::vector<CouplingPair> hermitize_coupling(std::span<const CouplingPair> pairs);

struct CenteredCouplings {
  FiniteBath bath;             // couplings replaced by X_a - <X_a> 1
  std::vector<Complex> means;  // <X_a>_B
  Matrix h_a_shift;            // sum_a <X_a>_B A_a, to be added to H_A
};

CenteredCouplings center_couplings(const FiniteBath& bath, std::span<const Matrix> a_ops);

/// Exact double sum in the bath eigenbasis.
Complex correlation_function(const FiniteBath& bath, std::size_t alpha, std::size_t beta,
                             double tau);
/// Tr{ X~_a^dagger(t1) X~_b(t2) sigma_B } from explicit propagators.
Complex correlation_two_time(const FiniteBath& bath, std::size_t alpha, std::size_t beta,
                             double t1, double t2);
/// W_ab(omega) with the e^{-eps tau} convergence factor.
Complex half_fourier_w(const FiniteBath& bath, std::size_t alpha, std::size_t beta,
                       double omega);

struct CorrelationTime {
  double tau_b = 0.0;
  bool non_decaying = false;
  double grid_step = 0.0;
};

/// Smallest tau with max_ab |G_ab(t)| <= 0.05 max_ab |G_ab(0)| for all t in
/// [tau, 2 tau] on a sampled grid. Baths that never decay before one period of
/// their slowest Bohr frequency report half that period, flagged.
CorrelationTime estimate_correlation_time(const FiniteBath& bath);

struct CorrelationTable {
  std::vector<double> taus;
  std::vector<Matrix> values;  // channel x channel per tau
  double tau_b_estimate = 0.0;
  bool non_decaying = false;
};

CorrelationTable correlation_table(const FiniteBath& bath, std::span<const double> taus);

}  // namespace lindform
