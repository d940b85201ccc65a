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

#include "lindform/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace lindform {

std::optional<std::size_t> BohrFrequencySet::find(double omega) const {
  if (values_.empty() || !std::isfinite(omega)) {
    return std::nullopt;
  }
  const auto it = std::lower_bound(values_.begin(), values_.end(), omega);
  std::optional<std::size_t> best;
  double best_gap = matching_tol_;
  auto consider = [&](std::vector<double>::const_iterator c) {
    const double gap = std::abs(*c - omega);
    if (gap <= best_gap) {
      best_gap = gap;
      best = static_cast<std::size_t>(c - values_.begin());
    }
  };
  if (it != values_.end()) {
    consider(it);
  }
  if (it != values_.begin()) {
    consider(std::prev(it));
  }
  return best;
}

double default_degeneracy_tol(const RealVector& eigenvalues) {
  const double scale = eigenvalues.size() == 0 ? 0.0 : eigenvalues.cwiseAbs().maxCoeff();
  return scale > 0.0 ? 1e-9 * scale : 1e-12;
}

Spectrum::Spectrum(Matrix hamiltonian, EigenDecomposition eig, double degeneracy_tol)
    : hamiltonian_(std::move(hamiltonian)), eig_(std::move(eig)), degeneracy_tol_(degeneracy_tol) {
  const auto n = static_cast<std::size_t>(eig_.values.size());
  multiplet_of_.assign(n, 0);

  // Single-linkage clustering of the (sorted) eigenvalues.
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 || eig_.values(static_cast<Eigen::Index>(i)) -
                          eig_.values(static_cast<Eigen::Index>(i - 1)) >
                      degeneracy_tol_) {
      multiplets_.emplace_back();
    }
    multiplets_.back().members.push_back(i);
    multiplet_of_[i] = multiplets_.size() - 1;
  }
  for (std::size_t m = 0; m < multiplets_.size(); ++m) {
    Multiplet& mult = multiplets_[m];
    double sum = 0.0;
    for (std::size_t i : mult.members) {
      sum += eig_.values(static_cast<Eigen::Index>(i));
    }
    mult.frequency = sum / static_cast<double>(mult.degeneracy());
    const double span = eig_.values(static_cast<Eigen::Index>(mult.members.back())) -
                        eig_.values(static_cast<Eigen::Index>(mult.members.front()));
    if (span > degeneracy_tol_) {
      std::ostringstream msg;
      msg << "multiplet " << m << " chains " << mult.degeneracy()
          << " levels across a span of " << span << ", wider than the degeneracy tolerance "
          << degeneracy_tol_;
      warnings_.push_back(msg.str());
    }
  }

  // Bohr frequencies between multiplet representatives.
  const std::size_t nm = multiplets_.size();
  struct Gap {
    double value;
    std::size_t from;
    std::size_t to;
  };
  std::vector<Gap> gaps;
  for (std::size_t a = 0; a < nm; ++a) {
    for (std::size_t b = a + 1; b < nm; ++b) {
      gaps.push_back({multiplets_[b].frequency - multiplets_[a].frequency, a, b});
    }
  }
  std::stable_sort(gaps.begin(), gaps.end(),
                   [](const Gap& x, const Gap& y) { return x.value < y.value; });
  std::vector<std::size_t> cluster_of(gaps.size(), 0);
  std::vector<double> positive;
  std::vector<std::size_t> counts;
  {
    std::size_t start = 0;
    for (std::size_t g = 0; g <= gaps.size(); ++g) {
      const bool split =
          g == gaps.size() || (g > start && gaps[g].value - gaps[g - 1].value > degeneracy_tol_);
      if (split && g > start) {
        double sum = 0.0;
        for (std::size_t k = start; k < g; ++k) {
          sum += gaps[k].value;
          cluster_of[k] = positive.size();
        }
        positive.push_back(sum / static_cast<double>(g - start));
        counts.push_back(g - start);
        start = g;
      }
    }
  }
  const std::size_t np = positive.size();
  bohr_.matching_tol_ = degeneracy_tol_;
  bohr_.multiplet_count_ = nm;
  bohr_.values_.resize(2 * np + 1);
  bohr_.multiplicity_.resize(2 * np + 1);
  bohr_.values_[np] = 0.0;
  bohr_.multiplicity_[np] = nm;
  for (std::size_t c = 0; c < np; ++c) {
    bohr_.values_[np + 1 + c] = positive[c];
    bohr_.values_[np - 1 - c] = -positive[c];
    bohr_.multiplicity_[np + 1 + c] = counts[c];
    bohr_.multiplicity_[np - 1 - c] = counts[c];
  }
  bohr_.pair_index_.assign(nm * nm, np);
  for (std::size_t g = 0; g < gaps.size(); ++g) {
    const std::size_t c = cluster_of[g];
    bohr_.pair_index_[gaps[g].from * nm + gaps[g].to] = np + 1 + c;
    bohr_.pair_index_[gaps[g].to * nm + gaps[g].from] = np - 1 - c;
  }
}

Matrix Spectrum::to_eigenbasis(const Matrix& m) const {
  return eig_.vectors.adjoint() * m * eig_.vectors;
}

Matrix Spectrum::from_eigenbasis(const Matrix& m) const {
  return eig_.vectors * m * eig_.vectors.adjoint();
}

Spectrum build_spectrum(const Matrix& h_a, std::optional<double> degeneracy_tol) {
  if (!is_square(h_a) || h_a.size() == 0) {
    throw StructuralError("system hamiltonian must be a non-empty square matrix");
  }
  const double herm_tol = std::max(kDefaultValidationTol, 1e-12 * max_abs(h_a));
  EigenDecomposition eig = hermitian_eigendecomposition(h_a, herm_tol);
  const double tol = degeneracy_tol.value_or(default_degeneracy_tol(eig.values));
  if (!(tol >= 0.0)) {
    throw DomainError("degeneracy tolerance must be non-negative");
  }
  return Spectrum(h_a, std::move(eig), tol);
}

const BohrFrequencySet& bohr_frequencies(const Spectrum& s) { return s.bohr(); }

namespace {

Matrix eigenoperator_in_eigenbasis(const Matrix& a_eig, const Spectrum& s, std::size_t k) {
  const std::size_t n = s.dim();
  Matrix out = Matrix::Zero(a_eig.rows(), a_eig.cols());
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      // <a|A|b> contributes at omega = w_b - w_a.
      if (s.transition_index(a, b) == k) {
        out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
            a_eig(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      }
    }
  }
  return out;
}

void check_operator(const Matrix& a_op, const Spectrum& s) {
  if (a_op.rows() != static_cast<Eigen::Index>(s.dim()) ||
      a_op.cols() != static_cast<Eigen::Index>(s.dim())) {
    std::ostringstream msg;
    msg << "coupling operator of shape " << a_op.rows() << "x" << a_op.cols()
        << " does not match system dimension " << s.dim();
    throw StructuralError(msg.str());
  }
}

}  // namespace

Matrix eigenoperator(const Matrix& a_op, const Spectrum& s, double omega) {
  check_operator(a_op, s);
  const auto k = s.bohr().find(omega);
  if (!k) {
    return Matrix::Zero(a_op.rows(), a_op.cols());
  }
  return s.from_eigenbasis(eigenoperator_in_eigenbasis(s.to_eigenbasis(a_op), s, *k));
}

const EigenOperatorTerm* EigenOperatorSet::find(std::size_t bohr_index) const {
  for (const auto& term : terms) {
    if (term.bohr_index == bohr_index) {
      return &term;
    }
  }
  return nullptr;
}

Matrix EigenOperatorSet::sum() const {
  if (terms.empty()) {
    return Matrix();
  }
  Matrix total = Matrix::Zero(terms.front().op.rows(), terms.front().op.cols());
  for (const auto& term : terms) {
    total += term.op;
  }
  return total;
}

EigenOperatorSet eigenoperator_decomposition(const Matrix& a_op, const Spectrum& s,
                                             std::size_t channel) {
  check_operator(a_op, s);
  const Matrix a_eig = s.to_eigenbasis(a_op);
  EigenOperatorSet set;
  set.channel = channel;
  const BohrFrequencySet& bohr = s.bohr();
  for (std::size_t k = 0; k < bohr.size(); ++k) {
    Matrix piece = eigenoperator_in_eigenbasis(a_eig, s, k);
    if (max_abs(piece) < kZeroOperatorTol) {
      continue;
    }
    set.terms.push_back({bohr.values()[k], k, s.from_eigenbasis(piece)});
  }
  return set;
}

}  // namespace lindform
