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

// Master-equation generators built from eigenoperators and bath spectra.
//
// Secular (standard) form:
//   d rho/dt = -i[H_A + H_LS, rho]
//              + sum_w sum_ab Gamma_ab(w) (A_b(w) rho A_a(w)^dag - 1/2 {A_a(w)^dag A_b(w), rho})
//   H_LS     = sum_w sum_ab Delta_ab(w) A_a(w)^dag A_b(w)
//
// Pre-secular form, with F(x) = e^{i x dt/2} sin(x dt/2) / (x dt/2):
//   D(rho)   = sum_{w,w'} F(w'-w) sum_ab W_ab(w) (A_b(w) rho A_a(w')^dag - A_a(w')^dag A_b(w) rho)
//   d rho/dt = -i[H_A, rho] + D(rho) + D(rho^dag)^dag

#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lindform/bath.hpp"
#include "lindform/core.hpp"
#include "lindform/spectral.hpp"

namespace lindform {

enum class GeneratorMode { kSecular, kPresecular };
enum class SecularFilter { kExactMatch, kFWeighted };

const char* to_string(GeneratorMode mode);
const char* to_string(SecularFilter filter);

struct SecularPolicy {
  double dt = 0.0;
  SecularFilter filter = SecularFilter::kExactMatch;
  /// Frequency window of the exact-match rule; the spectrum's tolerance if unset.
  std::optional<double> matching_tol;
};

/// F(x) for coarse-graining time dt; F(0) = 1.
Complex f_weight(double x, double dt);

/// Exact match: 1 if |w' - w| <= matching_tol else 0. F-weighted: F(w' - w).
Complex secular_filter(double omega_prime, double omega, const SecularPolicy& policy);

struct DissipatorTerm {
  double omega = 0.0;
  std::size_t bohr_index = 0;
  Matrix gamma;             // channel x channel
  Matrix delta;             // channel x channel
  std::vector<Matrix> ops;  // A_a(omega) per channel, zero where absent
};

/// rhs(rho) = -i[h_eff, rho] + sum_k L_k rho R_k^dag (+ R_k rho L_k^dag when
/// `symmetric`) - N rho - rho N^dag.
struct Generator {
  std::size_t dim = 0;
  GeneratorMode mode = GeneratorMode::kSecular;
  SecularPolicy policy;
  Matrix h_a;
  /// Lamb shift of the secular form. Reported in both modes; the pre-secular
  /// rhs carries its Delta contributions inside W instead.
  Matrix h_ls;
  /// Hamiltonian inside the commutator of rhs: H_A + H_LS (secular) or H_A.
  Matrix h_eff;
  std::vector<DissipatorTerm> terms;

  std::vector<std::pair<Matrix, Matrix>> sandwich;  // (L_k, R_k)
  Matrix left_decay;                                 // N
  bool symmetric = false;

  Matrix rhs(const Matrix& rho) const;
  bool free_evolution() const { return sandwich.empty(); }
};

/// One decomposition per bath channel, in channel order.
std::vector<EigenOperatorSet> decompose_couplings(std::span<const Matrix> a_ops,
                                                  const Spectrum& spectrum);

Generator build_standard_form(const Spectrum& spectrum, std::span<const EigenOperatorSet> eigenops,
                              const Bath& bath);

Generator build_presecular(const Spectrum& spectrum, std::span<const EigenOperatorSet> eigenops,
                           const Bath& bath, const SecularPolicy& policy);

/// Smallest distance between distinct Bohr frequencies; +inf with fewer than two.
double min_bohr_gap(const Spectrum& spectrum);

// Energy-basis rate tensors. State indices refer to the eigenbasis of the
// spectrum (ascending eigenvalues).

using QuadIndex = std::array<std::size_t, 4>;  // (a, m, b, n)
using PairIndex = std::array<std::size_t, 2>;

struct RateTensors {
  std::size_t dim = 0;
  /// K(am,bn) = sum_ab Gamma_ab(w_m - w_a) <a|A_b|m> <b|A_a|n>^*, stored only
  /// where w_m - w_a and w_n - w_b share a Bohr frequency.
  std::map<QuadIndex, Complex> K;
  /// kappa(x,y) = sum_c K(cx, cy).
  std::map<PairIndex, Complex> kappa;
  RealMatrix pauli_gain;       // (a,m) -> K(am,am)
  RealMatrix coherence_decay;  // (a,b) -> (kappa(a,a) + kappa(b,b))/2 - Re K(aa,bb)

  Complex k_at(std::size_t a, std::size_t m, std::size_t b, std::size_t n) const;
  Complex kappa_at(std::size_t x, std::size_t y) const;
};

RateTensors rate_tensor_K(const Spectrum& spectrum, std::span<const Matrix> a_ops,
                          const Bath& bath);
std::map<PairIndex, Complex> kappa(const RateTensors& rates);
/// K, kappa, pauli_gain and coherence_decay together.
RateTensors build_rate_tensors(const Spectrum& spectrum, std::span<const Matrix> a_ops,
                               const Bath& bath);

/// Generic secular kernel in the eigenbasis, acting on column-stacked rho
/// (element rho_ab at a + b*d): unitary part from the raw eigenvalues plus
/// `h_ls`, dissipative part from K and kappa.
Matrix energy_basis_kernel(const RateTensors& rates, const Spectrum& spectrum,
                           const Matrix& h_ls);

/// (V^T (x) V^dag) L (conj(V) (x) V): a user-basis superoperator seen in the eigenbasis.
Matrix superoperator_to_eigenbasis(const Matrix& superop, const Spectrum& spectrum);

struct KernelBlock {
  std::vector<PairIndex> elements;  // (a,b) of rho_ab
  Matrix matrix;                    // restriction of the kernel to `elements`
};

struct PauliEquations {
  bool nondegenerate = true;
  /// Every nonzero Bohr frequency arises from a single multiplet pair.
  bool distinct_gaps = true;
  /// Coherences could not be reduced to blocks; `kernel` holds the full map.
  bool fallback = false;

  /// dP_a/dt = sum_m G(a,m) P_m; set for non-degenerate spectra.
  RealMatrix population_generator;
  /// (a,b), a != b: K(aa,bb) - (kappa(a,a) + kappa(b,b))/2; set when both
  /// flags above hold.
  Matrix coherence_rates;
  /// (a,b): w_a - w_b + (H_LS)_aa - (H_LS)_bb in the eigenbasis.
  RealMatrix coherence_frequencies;

  /// Elements inside multiplets (degenerate routing; also set otherwise).
  KernelBlock quasi_populations;
  /// One block per ordered pair of distinct multiplets.
  std::vector<KernelBlock> coherence_blocks;
  Matrix kernel;
  std::vector<std::string> notes;
};

PauliEquations pauli_equations(const RateTensors& rates, const Spectrum& spectrum,
                               const Matrix& h_ls);

}  // namespace lindform
