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

// Frequency multiplets of the system hamiltonian and the eigenoperators
// A(omega) = sum_{a,b : w_b - w_a = omega} |a><a|A|b><b|.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lindform/core.hpp"

namespace lindform {

/// Matrices whose entries are all below this magnitude count as zero.
inline constexpr double kZeroOperatorTol = 1e-14;

struct Multiplet {
  double frequency = 0.0;             // mean eigenfrequency of the members
  std::vector<std::size_t> members;   // eigenbasis indices, ascending
  std::size_t degeneracy() const { return members.size(); }
};

/// Distinct Bohr frequencies between multiplets, closed under negation.
class BohrFrequencySet {
 public:
  BohrFrequencySet() = default;

  const std::vector<double>& values() const { return values_; }
  double matching_tol() const { return matching_tol_; }
  std::size_t size() const { return values_.size(); }

  /// Index of the member within matching_tol of omega (nearest wins).
  std::optional<std::size_t> find(double omega) const;
  /// Bohr index of the transition w_to - w_from between multiplets.
  std::size_t pair_index(std::size_t from_multiplet, std::size_t to_multiplet) const {
    return pair_index_[from_multiplet * multiplet_count_ + to_multiplet];
  }
  /// Index of the value equal to -values()[k].
  std::size_t negated(std::size_t k) const { return values_.size() - 1 - k; }
  /// Number of ordered multiplet pairs that share Bohr frequency k.
  std::size_t multiplicity(std::size_t k) const { return multiplicity_[k]; }

 private:
  friend class Spectrum;
  std::vector<double> values_;
  double matching_tol_ = 0.0;
  std::size_t multiplet_count_ = 0;
  std::vector<std::size_t> pair_index_;
  std::vector<std::size_t> multiplicity_;
};

class Spectrum {
 public:
  /// Use build_spectrum.
  Spectrum(Matrix hamiltonian, EigenDecomposition eig, double degeneracy_tol);

  std::size_t dim() const { return static_cast<std::size_t>(hamiltonian_.rows()); }
  const Matrix& hamiltonian() const { return hamiltonian_; }
  /// Raw eigenvalues, ascending.
  const RealVector& eigenvalues() const { return eig_.values; }
  /// Columns are the eigenbasis expressed in the user basis.
  const Matrix& basis() const { return eig_.vectors; }
  double degeneracy_tol() const { return degeneracy_tol_; }

  const std::vector<Multiplet>& multiplets() const { return multiplets_; }
  std::size_t multiplet_of(std::size_t state) const { return multiplet_of_[state]; }
  /// Multiplet frequency of eigenbasis state `state`.
  double frequency(std::size_t state) const {
    return multiplets_[multiplet_of_[state]].frequency;
  }
  bool nondegenerate() const { return multiplets_.size() == dim(); }

  const BohrFrequencySet& bohr() const { return bohr_; }
  /// Bohr index of w_to - w_from for eigenbasis states.
  std::size_t transition_index(std::size_t from_state, std::size_t to_state) const {
    return bohr_.pair_index(multiplet_of_[from_state], multiplet_of_[to_state]);
  }

  /// V^dagger m V.
  Matrix to_eigenbasis(const Matrix& m) const;
  /// V m V^dagger.
  Matrix from_eigenbasis(const Matrix& m) const;

  /// Non-fatal notes, e.g. single-linkage chains wider than degeneracy_tol.
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  Matrix hamiltonian_;
  EigenDecomposition eig_;
  double degeneracy_tol_;
  std::vector<Multiplet> multiplets_;
  std::vector<std::size_t> multiplet_of_;
  BohrFrequencySet bohr_;
  std::vector<std::string> warnings_;
};

/// Default clustering tolerance: 1e-9 * max|w|, or 1e-12 for a zero hamiltonian.
double default_degeneracy_tol(const RealVector& eigenvalues);

/// Diagonalizes h_a and clusters eigenfrequencies by single linkage: neighbours
/// closer than `degeneracy_tol` share a multiplet.
Spectrum build_spectrum(const Matrix& h_a, std::optional<double> degeneracy_tol = std::nullopt);

const BohrFrequencySet& bohr_frequencies(const Spectrum& s);

/// A(omega) in the user basis; zero when omega matches no Bohr frequency.
Matrix eigenoperator(const Matrix& a_op, const Spectrum& s, double omega);

struct EigenOperatorTerm {
  double omega = 0.0;
  std::size_t bohr_index = 0;
  Matrix op;
};

/// The nonzero eigenoperators of one coupling channel, ascending in omega.
struct EigenOperatorSet {
  std::size_t channel = 0;
  std::vector<EigenOperatorTerm> terms;

  /// Pointer to the term at Bohr index k, or nullptr when it vanishes.
  const EigenOperatorTerm* find(std::size_t bohr_index) const;
  /// sum_omega A(omega).
  Matrix sum() const;
};

EigenOperatorSet eigenoperator_decomposition(const Matrix& a_op, const Spectrum& s,
                                             std::size_t channel = 0);

}  // namespace lindform
