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

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "lindform/dynamics.hpp"
#include "lindform/error.hpp"
#include "lindform/generator.hpp"
#include "support/testing.hpp"

using namespace lindform;
using lindform::testing::max_abs_diff;

namespace {

Matrix diag(const std::vector<double>& v) {
  const auto n = static_cast<Eigen::Index>(v.size());
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = v[static_cast<std::size_t>(i)];
  }
  return m;
}

Matrix sx() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix sminus() {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 1) = 1.0;
  return m;
}

// Gamma(+w) = down, Gamma(-w) = up, Gamma(0) = deph; Delta = delta everywhere.
AnalyticBath two_rate_bath(double w, double down, double up, double deph = 0.0, double delta = 0.0) {
  AnalyticBath b;
  b.channel_count = 1;
  b.gamma_fn = [=](double omega) {
    Matrix g(1, 1);
    g(0, 0) = omega > 0.5 * w ? down : (omega < -0.5 * w ? up : deph);
    return g;
  };
  if (delta != 0.0) {
    b.delta_fn = [=](double) {
      Matrix d(1, 1);
      d(0, 0) = delta;
      return d;
    };
  }
  return b;
}

// A smooth PSD channel x channel Gamma and a hermitian Delta.
AnalyticBath smooth_bath(std::size_t channels, testing::Rng& rng) {
  const Matrix c = testing::random_matrix(channels, rng, 0.3);
  const Matrix s = testing::random_hermitian(channels, rng, 0.2);
  AnalyticBath b;
  b.channel_count = channels;
  b.gamma_fn = [c](double w) {
    const double f = 1.0 / (1.0 + std::exp(-2.0 * w)) + 0.1;
    return Matrix(f * (c * c.adjoint()));
  };
  b.delta_fn = [s](double w) { return Matrix(std::tanh(w) * s); };
  return b;
}

Generator standard(const Matrix& h, const std::vector<Matrix>& a_ops, const Bath& bath) {
  const Spectrum s = build_spectrum(h);
  return build_standard_form(s, decompose_couplings(a_ops, s), bath);
}

}  // namespace

TEST_CASE("secular filters and the F window") {
  CHECK(f_weight(0.0, 3.0) == Complex(1.0, 0.0));
  const double dt = 2.5;
  for (int n = 1; n <= 5; ++n) {
    const double x = 2.0 * std::numbers::pi * n / dt;
    CHECK(std::abs(f_weight(x, dt)) <= 1e-12);
    CHECK(std::abs(f_weight(-x, dt)) <= 1e-12);
  }
  const double half = std::numbers::pi / dt;  // x dt / 2 = pi / 2
  CHECK(std::abs(f_weight(half, dt)) == doctest::Approx(2.0 / std::numbers::pi));

  const SecularPolicy exact{dt, SecularFilter::kExactMatch, 1e-9};
  CHECK(secular_filter(1.0, 1.0, exact) == Complex(1.0, 0.0));
  CHECK(secular_filter(1.0 + 5.0 / dt, 1.0, exact) == Complex(0.0, 0.0));
  const SecularPolicy weighted{dt, SecularFilter::kFWeighted, std::nullopt};
  CHECK(std::abs(secular_filter(1.0 + half, 1.0, weighted)) ==
        doctest::Approx(2.0 / std::numbers::pi));
  CHECK_THROWS_AS(secular_filter(1.0, 0.0, SecularPolicy{0.0, SecularFilter::kFWeighted, {}}),
                  DomainError);
}

TEST_CASE("zero coupling gives a pure commutator") {
  testing::Rng rng(41);
  const Matrix h = testing::random_hermitian(3, rng);
  const Generator g = standard(h, {Matrix::Zero(3, 3)}, two_rate_bath(1.0, 0.3, 0.1));
  CHECK(g.free_evolution());
  const Matrix rho = testing::random_density(3, rng);
  CHECK(max_abs_diff(g.rhs(rho), -kI * commutator(h, rho)) < 1e-14);
}

TEST_CASE("two-level standard form") {
  const double w = 1.0, down = 0.3, up = 0.1;
  const Generator g = standard(diag({0, w}), {sx()}, two_rate_bath(w, down, up));
  testing::Rng rng(42);
  const Matrix sp = sminus().adjoint();
  for (int k = 0; k < 5; ++k) {
    const Matrix rho = testing::random_density(2, rng);
    const Matrix want =
        -kI * commutator(diag({0, w}), rho) +
        down * (sminus() * rho * sp - 0.5 * anticommutator(sp * sminus(), rho)) +
        up * (sp * rho * sminus() - 0.5 * anticommutator(sminus() * sp, rho));
    CHECK(max_abs_diff(g.rhs(rho), want) < 1e-14);
  }

  // Constant Delta shifts both levels alike.
  const double delta = 0.04;
  const Generator shifted = standard(diag({0, w}), {sx()}, two_rate_bath(w, down, up, 0.0, delta));
  CHECK(max_abs_diff(shifted.h_ls, delta * Matrix::Identity(2, 2)) < 1e-15);
}

TEST_CASE("standard form matches the term-by-term secular rhs") {
  testing::Rng rng(43);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t d = 2 + static_cast<std::size_t>(trial % 4);
    const Matrix h = testing::random_hamiltonian(d, rng, trial % 2 == 1);
    const std::vector<Matrix> a_ops{testing::random_hermitian(d, rng), testing::random_matrix(d, rng)};
    const AnalyticBath bath = smooth_bath(2, rng);
    const Generator g = standard(h, a_ops, bath);
    const double tol = build_spectrum(h).bohr().matching_tol();
    for (int k = 0; k < 3; ++k) {
      const Matrix rho = testing::random_density(d, rng);
      const Matrix want =
          testing::brute_secular_rhs(h, a_ops, bath.gamma_fn, bath.delta_fn, rho, std::max(tol, 1e-9));
      CHECK(max_abs_diff(g.rhs(rho), want) < 1e-11);
    }
    CHECK(commutator(h, g.h_ls).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(hermiticity_defect(g.h_eff) <= 1e-12);
  }
}

TEST_CASE("trace and hermiticity preservation in both modes") {
  testing::Rng rng(44);
  const Matrix h = testing::random_hermitian(4, rng);
  const std::vector<Matrix> a_ops{testing::random_hermitian(4, rng), testing::random_matrix(4, rng)};
  const AnalyticBath bath = smooth_bath(2, rng);
  const Spectrum s = build_spectrum(h);
  const auto ops = decompose_couplings(a_ops, s);
  const std::vector<Generator> gens{
      build_standard_form(s, ops, bath),
      build_presecular(s, ops, bath, {0.05, SecularFilter::kFWeighted, {}}),
      build_presecular(s, ops, bath, {3.0, SecularFilter::kExactMatch, {}})};
  for (const Generator& g : gens) {
    const double bound = std::max(1.0, rhs_norm_bound(g));
    for (int k = 0; k < 40; ++k) {
      const Matrix rho = testing::random_density(4, rng);
      CHECK(std::abs(g.rhs(rho).trace()) <= 1e-12 * bound);
      const Matrix x = testing::random_matrix(4, rng);
      CHECK(max_abs_diff(g.rhs(x.adjoint()), g.rhs(x).adjoint()) <= 1e-12 * bound);
    }
  }
}

TEST_CASE("presecular approaches secular for long coarse-graining time") {
  testing::Rng rng(45);
  const Matrix h = testing::random_hermitian(3, rng);
  const std::vector<Matrix> a_ops{testing::random_hermitian(3, rng)};
  const AnalyticBath bath = smooth_bath(1, rng);
  const Spectrum s = build_spectrum(h);
  const auto ops = decompose_couplings(a_ops, s);
  const Matrix sec = liouvillian_superoperator(build_standard_form(s, ops, bath)).matrix;
  double previous = 1e300;
  for (double factor : {1e1, 1e2, 1e3}) {
    const double dt = factor / min_bohr_gap(s);
    const Matrix pre =
        liouvillian_superoperator(build_presecular(s, ops, bath, {dt, SecularFilter::kFWeighted, {}}))
            .matrix;
    const double diff = max_abs_diff(pre, sec);
    CHECK(diff < previous);
    previous = diff;
  }
  // The exact-match rule with a tiny window is the secular generator itself.
  const Matrix exact =
      liouvillian_superoperator(build_presecular(s, ops, bath, {1.0, SecularFilter::kExactMatch, {}}))
          .matrix;
  CHECK(max_abs_diff(exact, sec) < 1e-13);
}

TEST_CASE("rate tensors on the two-level system") {
  const double w = 1.0, down = 0.3, up = 0.1;
  const Spectrum s = build_spectrum(diag({0, w}));
  const std::vector<Matrix> a_ops{sx()};
  const RateTensors r = build_rate_tensors(s, a_ops, two_rate_bath(w, down, up));
  // g = 0, e = 1; K(ge,ge) = down |<g|A|e>|^2.
  CHECK(r.k_at(0, 1, 0, 1).real() == doctest::Approx(down));
  CHECK(r.k_at(1, 0, 1, 0).real() == doctest::Approx(up));
  CHECK(r.kappa_at(1, 1).real() == doctest::Approx(down));
  CHECK(r.kappa_at(0, 0).real() == doctest::Approx(up));
  CHECK(r.pauli_gain(0, 1) == doctest::Approx(down));

  const PauliEquations p = pauli_equations(r, s, Matrix::Zero(2, 2));
  CHECK(p.population_generator(1, 1) == doctest::Approx(-down));
  CHECK(p.population_generator(1, 0) == doctest::Approx(up));
  CHECK(p.population_generator(0, 1) == doctest::Approx(down));
  CHECK(p.coherence_rates(0, 1).real() == doctest::Approx(-(down + up) / 2));

  const RateTensors deph = build_rate_tensors(s, std::vector<Matrix>{sx(), diag({1, -1})},
                                              AnalyticBath{2, [=](double omega) {
                                                             Matrix g = Matrix::Zero(2, 2);
                                                             g(0, 0) = omega > 0.5 ? down
                                                                       : omega < -0.5 ? up : 0.0;
                                                             g(1, 1) = std::abs(omega) < 0.5 ? 0.05 : 0.0;
                                                             return g;
                                                           }, {}, "custom"});
  const PauliEquations pd = pauli_equations(deph, s, Matrix::Zero(2, 2));
  // Pure dephasing through sigma_z adds 0.05 (|1|^2 + |-1|^2)/2 - 0.05 (1)(-1) = 2 * 0.05.
  CHECK(pd.coherence_rates(0, 1).real() == doctest::Approx(-(down + up) / 2 - 2 * 0.05));

  const RateTensors zero = build_rate_tensors(s, std::vector<Matrix>{Matrix::Zero(2, 2)},
                                              two_rate_bath(w, down, up));
  for (const auto& [k, v] : zero.K) {
    CHECK(v == Complex(0.0, 0.0));
  }
  for (const auto& [k, v] : zero.kappa) {
    CHECK(v == Complex(0.0, 0.0));
  }
}

TEST_CASE("rate tensor identities on random scenarios") {
  testing::Rng rng(46);
  for (int trial = 0; trial < 6; ++trial) {
    const std::size_t d = 3 + static_cast<std::size_t>(trial % 3);
    const Matrix h = testing::random_hamiltonian(d, rng, trial % 2 == 1);
    const std::vector<Matrix> a_ops{testing::random_hermitian(d, rng), testing::random_matrix(d, rng)};
    const AnalyticBath bath = smooth_bath(2, rng);
    const Spectrum s = build_spectrum(h);
    const RateTensors r = build_rate_tensors(s, a_ops, bath);
    for (std::size_t x = 0; x < d; ++x) {
      for (std::size_t y = 0; y < d; ++y) {
        Complex sum = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
          sum += r.k_at(c, x, c, y);
        }
        CHECK(std::abs(sum - r.kappa_at(x, y)) <= 1e-12);
        CHECK(std::abs(std::conj(r.kappa_at(y, x)) - r.kappa_at(x, y)) <= 1e-12);
      }
    }
    for (Eigen::Index a = 0; a < r.pauli_gain.rows(); ++a) {
      for (Eigen::Index m = 0; m < r.pauli_gain.cols(); ++m) {
        CHECK(r.pauli_gain(a, m) >= -1e-14);
        const Complex k = r.k_at(static_cast<std::size_t>(a), static_cast<std::size_t>(m),
                                 static_cast<std::size_t>(a), static_cast<std::size_t>(m));
        CHECK(std::abs(k.imag()) <= 1e-14);
      }
    }
    // The generic energy-basis kernel is the secular Liouvillian seen in the eigenbasis.
    const Generator g = build_standard_form(s, decompose_couplings(a_ops, s), bath);
    const PauliEquations p = pauli_equations(r, s, g.h_ls);
    const Matrix l = superoperator_to_eigenbasis(liouvillian_superoperator(g).matrix, s);
    CHECK(max_abs_diff(l, p.kernel) <= 1e-10);
    if (p.nondegenerate) {
      CHECK(p.population_generator.colwise().sum().cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("equidistant spectrum falls back to full coherence kernel") {
  const Spectrum s = build_spectrum(diag({0, 1, 2}));
  const std::vector<Matrix> a_ops{Matrix::Ones(3, 3)};
  const RateTensors r = build_rate_tensors(s, a_ops, two_rate_bath(1.0, 0.2, 0.05));
  const PauliEquations p = pauli_equations(r, s, Matrix::Zero(3, 3));
  CHECK(p.nondegenerate);
  CHECK_FALSE(p.distinct_gaps);
  CHECK(p.fallback);
  CHECK_FALSE(p.notes.empty());
  CHECK(p.population_generator.colwise().sum().cwiseAbs().maxCoeff() <= 1e-12);
}
