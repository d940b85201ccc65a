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

#include "lindform/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lindform {

const char* to_string(GeneratorMode mode) {
  return mode == GeneratorMode::kSecular ? "secular" : "presecular";
}

const char* to_string(SecularFilter filter) {
  return filter == SecularFilter::kExactMatch ? "exact-match" : "f-weighted";
}

Complex f_weight(double x, double dt) {
  const double y = 0.5 * x * dt;
  const double sinc = std::abs(y) < 1e-8 ? 1.0 - y * y / 6.0 : std::sin(y) / y;
  return std::polar(sinc, y);
}

Complex secular_filter(double omega_prime, double omega, const SecularPolicy& policy) {
  if (policy.filter == SecularFilter::kExactMatch) {
    const double tol = policy.matching_tol.value_or(0.0);
    return std::abs(omega_prime - omega) <= tol ? 1.0 : 0.0;
  }
  if (!(policy.dt > 0.0)) {
    throw DomainError("F-weighted secular filter needs dt > 0");
  }
  return f_weight(omega_prime - omega, policy.dt);
}

Matrix Generator::rhs(const Matrix& rho) const {
  if (rho.rows() != static_cast<Eigen::Index>(dim) || rho.cols() != static_cast<Eigen::Index>(dim)) {
    std::ostringstream msg;
    msg << "rhs expects a " << dim << "x" << dim << " operator, got " << rho.rows() << "x"
        << rho.cols();
    throw StructuralError(msg.str());
  }
  Matrix out = -kI * (h_eff * rho - rho * h_eff);
  for (const auto& [l, r] : sandwich) {
    const Matrix lr = l * rho;
    out.noalias() += lr * r.adjoint();
    if (symmetric) {
      const Matrix rr = r * rho;
      out.noalias() += rr * l.adjoint();
    }
  }
  out.noalias() -= left_decay * rho;
  out.noalias() -= rho * left_decay.adjoint();
  return out;
}

std::vector<EigenOperatorSet> decompose_couplings(std::span<const Matrix> a_ops,
                                                  const Spectrum& spectrum) {
  std::vector<EigenOperatorSet> sets;
  sets.reserve(a_ops.size());
  for (std::size_t k = 0; k < a_ops.size(); ++k) {
    sets.push_back(eigenoperator_decomposition(a_ops[k], spectrum, k));
  }
  return sets;
}

namespace {

void check_channels(std::span<const EigenOperatorSet> eigenops, const Bath& bath) {
  if (eigenops.size() != channel_count(bath)) {
    std::ostringstream msg;
    msg << eigenops.size() << " coupling channels but the bath provides " << channel_count(bath);
    throw StructuralError(msg.str());
  }
}

Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

// Per Bohr index, the channel operators A_a(w) (zero where absent); only
// frequencies with at least one nonzero operator are listed.
struct FrequencyOps {
  std::size_t bohr_index;
  double omega;
  std::vector<Matrix> ops;
  std::vector<bool> present;
};

std::vector<FrequencyOps> collect_ops(const Spectrum& spectrum,
                                      std::span<const EigenOperatorSet> eigenops) {
  const auto d = static_cast<Eigen::Index>(spectrum.dim());
  std::vector<FrequencyOps> out;
  const auto& bohr = spectrum.bohr();
  for (std::size_t k = 0; k < bohr.size(); ++k) {
    FrequencyOps f{k, bohr.values()[k], {}, {}};
    bool any = false;
    for (const auto& set : eigenops) {
      const EigenOperatorTerm* term = set.find(k);
      f.present.push_back(term != nullptr);
      f.ops.push_back(term ? term->op : Matrix::Zero(d, d));
      any = any || term != nullptr;
    }
    if (any) {
      out.push_back(std::move(f));
    }
  }
  return out;
}

Generator empty_generator(const Spectrum& spectrum) {
  Generator g;
  g.dim = spectrum.dim();
  const auto d = static_cast<Eigen::Index>(g.dim);
  g.h_a = spectrum.hamiltonian();
  g.h_ls = Matrix::Zero(d, d);
  g.left_decay = Matrix::Zero(d, d);
  return g;
}

}  // namespace

Generator build_standard_form(const Spectrum& spectrum, std::span<const EigenOperatorSet> eigenops,
                              const Bath& bath) {
  check_channels(eigenops, bath);
  Generator g = empty_generator(spectrum);
  g.mode = GeneratorMode::kSecular;
  g.policy.matching_tol = spectrum.bohr().matching_tol();
  const auto d = static_cast<Eigen::Index>(g.dim);
  const std::size_t nc = eigenops.size();
  Matrix decay = Matrix::Zero(d, d);

  for (auto& f : collect_ops(spectrum, eigenops)) {
    DissipatorTerm term;
    term.omega = f.omega;
    term.bohr_index = f.bohr_index;
    term.gamma = hermitian_part(gamma_matrix(bath, f.omega));
    term.delta = hermitian_part(delta_matrix(bath, f.omega));
    for (std::size_t a = 0; a < nc; ++a) {
      if (!f.present[a]) {
        continue;
      }
      Matrix weighted = Matrix::Zero(d, d);
      Matrix shifted = Matrix::Zero(d, d);
      for (std::size_t b = 0; b < nc; ++b) {
        if (!f.present[b]) {
          continue;
        }
        const auto ia = static_cast<Eigen::Index>(a);
        const auto ib = static_cast<Eigen::Index>(b);
        weighted += term.gamma(ia, ib) * f.ops[b];
        shifted += term.delta(ia, ib) * f.ops[b];
      }
      const Matrix a_dag = f.ops[a].adjoint();
      decay += a_dag * weighted;
      g.h_ls += a_dag * shifted;
      if (max_abs(weighted) > 0.0) {
        g.sandwich.emplace_back(std::move(weighted), f.ops[a]);
      }
    }
    term.ops = std::move(f.ops);
    g.terms.push_back(std::move(term));
  }
  g.h_ls = hermitian_part(g.h_ls);
  g.h_eff = g.h_a + g.h_ls;
  g.left_decay = 0.5 * decay;
  return g;
}

Generator build_presecular(const Spectrum& spectrum, std::span<const EigenOperatorSet> eigenops,
                           const Bath& bath, const SecularPolicy& policy) {
  check_channels(eigenops, bath);
  if (policy.filter == SecularFilter::kFWeighted && !(policy.dt > 0.0)) {
    throw DomainError("pre-secular generator needs dt > 0");
  }
  Generator g = empty_generator(spectrum);
  g.mode = GeneratorMode::kPresecular;
  g.policy = policy;
  if (!g.policy.matching_tol) {
    g.policy.matching_tol = spectrum.bohr().matching_tol();
  }
  g.symmetric = true;
  g.h_eff = g.h_a;
  const auto d = static_cast<Eigen::Index>(g.dim);
  const std::size_t nc = eigenops.size();

  std::vector<FrequencyOps> freqs = collect_ops(spectrum, eigenops);
  // P_a(w) = sum_b W_ab(w) A_b(w)
  std::vector<std::vector<Matrix>> projected(freqs.size());
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    const FrequencyOps& f = freqs[k];
    const Matrix w = w_matrix(bath, f.omega);
    DissipatorTerm term;
    term.omega = f.omega;
    term.bohr_index = f.bohr_index;
    term.gamma = hermitian_part(gamma_matrix(bath, f.omega));
    term.delta = hermitian_part(delta_matrix(bath, f.omega));
    for (std::size_t a = 0; a < nc; ++a) {
      Matrix p = Matrix::Zero(d, d);
      Matrix shifted = Matrix::Zero(d, d);
      for (std::size_t b = 0; b < nc; ++b) {
        if (f.present[b]) {
          p += w(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) * f.ops[b];
          shifted +=
              term.delta(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) * f.ops[b];
        }
      }
      if (f.present[a]) {
        g.h_ls += f.ops[a].adjoint() * shifted;
      }
      projected[k].push_back(std::move(p));
    }
    term.ops = f.ops;
    g.terms.push_back(std::move(term));
  }
  g.h_ls = hermitian_part(g.h_ls);

  // E_a(w') = sum_w F(w' - w) P_a(w); D(rho) = sum E_a rho A_a(w')^dag - N rho.
  for (std::size_t kp = 0; kp < freqs.size(); ++kp) {
    for (std::size_t a = 0; a < nc; ++a) {
      if (!freqs[kp].present[a]) {
        continue;
      }
      Matrix e = Matrix::Zero(d, d);
      for (std::size_t k = 0; k < freqs.size(); ++k) {
        const Complex weight = secular_filter(freqs[kp].omega, freqs[k].omega, g.policy);
        if (weight != 0.0) {
          e += weight * projected[k][a];
        }
      }
      const Matrix& a_op = freqs[kp].ops[a];
      g.left_decay += a_op.adjoint() * e;
      if (max_abs(e) > 0.0) {
        g.sandwich.emplace_back(std::move(e), a_op);
      }
    }
  }
  return g;
}

double min_bohr_gap(const Spectrum& spectrum) {
  const auto& v = spectrum.bohr().values();
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < v.size(); ++k) {
    gap = std::min(gap, v[k] - v[k - 1]);
  }
  return gap;
}

Complex RateTensors::k_at(std::size_t a, std::size_t m, std::size_t b, std::size_t n) const {
  const auto it = K.find({a, m, b, n});
  return it == K.end() ? Complex(0.0) : it->second;
}

Complex RateTensors::kappa_at(std::size_t x, std::size_t y) const {
  const auto it = kappa.find({x, y});
  return it == kappa.end() ? Complex(0.0) : it->second;
}

RateTensors rate_tensor_K(const Spectrum& spectrum, std::span<const Matrix> a_ops,
                          const Bath& bath) {
  if (a_ops.size() != channel_count(bath)) {
    std::ostringstream msg;
    msg << a_ops.size() << " coupling channels but the bath provides " << channel_count(bath);
    throw StructuralError(msg.str());
  }
  RateTensors rates;
  const std::size_t d = spectrum.dim();
  rates.dim = d;
  const std::size_t nc = a_ops.size();
  std::vector<Matrix> a_eig;
  for (const auto& a : a_ops) {
    if (a.rows() != static_cast<Eigen::Index>(d) || a.cols() != static_cast<Eigen::Index>(d)) {
      throw StructuralError("coupling operator does not match the system dimension");
    }
    a_eig.push_back(spectrum.to_eigenbasis(a));
  }

  const auto& bohr = spectrum.bohr();
  std::vector<std::vector<PairIndex>> buckets(bohr.size());
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t m = 0; m < d; ++m) {
      buckets[spectrum.transition_index(a, m)].push_back({a, m});
    }
  }
  const auto nci = static_cast<Eigen::Index>(nc);
  for (std::size_t k = 0; k < bohr.size() && nc > 0; ++k) {
    const auto& pairs = buckets[k];
    // Matrix elements per pair as a channel vector.
    std::vector<Vector> elems;
    bool any = false;
    for (const auto& [a, m] : pairs) {
      Vector v(nci);
      for (std::size_t c = 0; c < nc; ++c) {
        v(static_cast<Eigen::Index>(c)) =
            a_eig[c](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(m));
      }
      any = any || v.cwiseAbs().maxCoeff() >= kZeroOperatorTol;
      elems.push_back(std::move(v));
    }
    if (!any) {
      continue;
    }
    const Matrix gamma = hermitian_part(gamma_matrix(bath, bohr.values()[k]));
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const Vector gu = gamma * elems[i];
      for (std::size_t j = 0; j < pairs.size(); ++j) {
        // sum_ab conj(v_a) Gamma_ab u_b
        rates.K[{pairs[i][0], pairs[i][1], pairs[j][0], pairs[j][1]}] = elems[j].dot(gu);
      }
    }
  }
  rates.pauli_gain = RealMatrix::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t m = 0; m < d; ++m) {
      rates.pauli_gain(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(m)) =
          rates.k_at(a, m, a, m).real();
    }
  }
  return rates;
}

std::map<PairIndex, Complex> kappa(const RateTensors& rates) {
  std::map<PairIndex, Complex> out;
  for (const auto& [q, value] : rates.K) {
    if (q[0] == q[2]) {
      out[{q[1], q[3]}] += value;
    }
  }
  return out;
}

RateTensors build_rate_tensors(const Spectrum& spectrum, std::span<const Matrix> a_ops,
                               const Bath& bath) {
  RateTensors rates = rate_tensor_K(spectrum, a_ops, bath);
  rates.kappa = kappa(rates);
  const auto d = static_cast<Eigen::Index>(rates.dim);
  rates.coherence_decay = RealMatrix::Zero(d, d);
  for (std::size_t a = 0; a < rates.dim; ++a) {
    for (std::size_t b = 0; b < rates.dim; ++b) {
      rates.coherence_decay(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          0.5 * (rates.kappa_at(a, a).real() + rates.kappa_at(b, b).real()) -
          rates.k_at(a, a, b, b).real();
    }
  }
  return rates;
}

Matrix energy_basis_kernel(const RateTensors& rates, const Spectrum& spectrum,
                           const Matrix& h_ls) {
  const std::size_t d = spectrum.dim();
  const auto di = static_cast<Eigen::Index>(d);
  auto idx = [d](std::size_t a, std::size_t b) { return static_cast<Eigen::Index>(a + b * d); };
  Matrix h = spectrum.eigenvalues().cast<Complex>().asDiagonal();
  if (h_ls.size() != 0) {
    h += spectrum.to_eigenbasis(h_ls);
  }
  Matrix kernel = Matrix::Zero(di * di, di * di);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t b = 0; b < d; ++b) {
      for (std::size_t m = 0; m < d; ++m) {
        // -i (H rho - rho H)_ab
        kernel(idx(a, b), idx(m, b)) +=
            -kI * h(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(m));
        kernel(idx(a, b), idx(a, m)) +=
            kI * h(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(b));
      }
    }
  }
  for (const auto& [q, value] : rates.K) {
    kernel(idx(q[0], q[2]), idx(q[1], q[3])) += value;
  }
  // The anticommutator term: M_xy = kappa(y, x).
  for (const auto& [p, value] : rates.kappa) {
    const std::size_t x = p[0];
    const std::size_t y = p[1];
    for (std::size_t b = 0; b < d; ++b) {
      kernel(idx(y, b), idx(x, b)) -= 0.5 * value;  // -(1/2) M_yx rho_xb
    }
    for (std::size_t a = 0; a < d; ++a) {
      kernel(idx(a, x), idx(a, y)) -= 0.5 * value;  // -(1/2) rho_ay M_yx
    }
  }
  return kernel;
}

Matrix superoperator_to_eigenbasis(const Matrix& superop, const Spectrum& spectrum) {
  const Matrix& v = spectrum.basis();
  const std::size_t cap = static_cast<std::size_t>(superop.rows());
  const Matrix t = tensor_product(v.transpose(), v.adjoint(), std::max(cap, kMaxTensorDim));
  return t * superop * t.adjoint();
}

namespace {

KernelBlock restrict_kernel(const Matrix& kernel, std::vector<PairIndex> elements,
                            std::size_t d) {
  KernelBlock block;
  const auto n = static_cast<Eigen::Index>(elements.size());
  block.matrix = Matrix(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& ei = elements[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& ej = elements[static_cast<std::size_t>(j)];
      block.matrix(i, j) = kernel(static_cast<Eigen::Index>(ei[0] + ei[1] * d),
                                  static_cast<Eigen::Index>(ej[0] + ej[1] * d));
    }
  }
  block.elements = std::move(elements);
  return block;
}

}  // namespace

PauliEquations pauli_equations(const RateTensors& rates, const Spectrum& spectrum,
                               const Matrix& h_ls) {
  PauliEquations eq;
  const std::size_t d = spectrum.dim();
  const auto di = static_cast<Eigen::Index>(d);
  if (rates.dim != d) {
    throw StructuralError("rate tensors and spectrum disagree on the dimension");
  }
  const auto& bohr = spectrum.bohr();
  eq.nondegenerate = spectrum.nondegenerate();
  const std::size_t zero = bohr.size() / 2;
  for (std::size_t k = 0; k < bohr.size(); ++k) {
    if (k != zero && bohr.multiplicity(k) > 1) {
      eq.distinct_gaps = false;
    }
  }

  const Matrix ls = h_ls.size() == 0 ? Matrix::Zero(di, di) : spectrum.to_eigenbasis(h_ls);
  eq.coherence_frequencies = RealMatrix::Zero(di, di);
  for (Eigen::Index a = 0; a < di; ++a) {
    for (Eigen::Index b = 0; b < di; ++b) {
      eq.coherence_frequencies(a, b) = spectrum.eigenvalues()(a) - spectrum.eigenvalues()(b) +
                                       ls(a, a).real() - ls(b, b).real();
    }
  }

  if (eq.nondegenerate) {
    eq.population_generator = RealMatrix::Zero(di, di);
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t m = 0; m < d; ++m) {
        eq.population_generator(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(m)) =
            rates.k_at(a, m, a, m).real();
      }
      eq.population_generator(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(a)) -=
          rates.kappa_at(a, a).real();
    }
    if (eq.distinct_gaps) {
      eq.coherence_rates = Matrix::Zero(di, di);
      for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = 0; b < d; ++b) {
          if (a != b) {
            eq.coherence_rates(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                rates.k_at(a, a, b, b) -
                0.5 * (rates.kappa_at(a, a).real() + rates.kappa_at(b, b).real());
          }
        }
      }
    }
  }

  eq.kernel = energy_basis_kernel(rates, spectrum, h_ls);
  const auto& mults = spectrum.multiplets();
  std::vector<PairIndex> inside;
  for (const auto& mult : mults) {
    for (std::size_t a : mult.members) {
      for (std::size_t b : mult.members) {
        inside.push_back({a, b});
      }
    }
  }
  eq.quasi_populations = restrict_kernel(eq.kernel, std::move(inside), d);

  if (eq.distinct_gaps) {
    for (std::size_t n = 0; n < mults.size(); ++n) {
      for (std::size_t m = 0; m < mults.size(); ++m) {
        if (n == m) {
          continue;
        }
        std::vector<PairIndex> elems;
        for (std::size_t a : mults[n].members) {
          for (std::size_t b : mults[m].members) {
            elems.push_back({a, b});
          }
        }
        eq.coherence_blocks.push_back(restrict_kernel(eq.kernel, std::move(elems), d));
      }
    }
  } else {
    eq.fallback = true;
    eq.notes.push_back(
        "some Bohr frequencies are shared by several multiplet pairs; coherences couple across "
        "blocks, so the full energy-basis kernel is used");
  }
  return eq;
}

}  // namespace lindform
