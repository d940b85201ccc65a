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

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "lindform/dynamics.hpp"
#include "lindform/error.hpp"
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

Generator two_level(double w, double down, double up) {
  const Spectrum s = build_spectrum(diag({0, w}));
  std::vector<Matrix> ops{sx()};
  AnalyticBath b;
  b.gamma_fn = [=](double omega) {
    Matrix g(1, 1);
    g(0, 0) = omega > 0.5 * w ? down : (omega < -0.5 * w ? up : 0.0);
    return g;
  };
  return build_standard_form(s, decompose_couplings(ops, s), b);
}

std::vector<Complex> sorted_eigenvalues(const Matrix& m) {
  Eigen::ComplexEigenSolver<Matrix> es(m);
  std::vector<Complex> v(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(v.begin(), v.end(), [](Complex a, Complex b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return v;
}

DensityMatrix excited() { return DensityMatrix(diag({0, 1})); }

}  // namespace

TEST_CASE("Liouvillian superoperator spectra") {
  {
    Generator g = two_level(1.0, 0.0, 0.0);
    g.h_eff = Matrix::Zero(2, 2);
    CHECK(liouvillian_superoperator(g).matrix.cwiseAbs().maxCoeff() == 0.0);
  }
  const double w = 1.4;
  const auto free = sorted_eigenvalues(liouvillian_superoperator(two_level(w, 0.0, 0.0)).matrix);
  CHECK(std::abs(free[0] - Complex(0, -w)) < 1e-12);
  CHECK(std::abs(free[1]) < 1e-12);
  CHECK(std::abs(free[2]) < 1e-12);
  CHECK(std::abs(free[3] - Complex(0, w)) < 1e-12);

  const double gamma = 0.3;
  const auto damped = sorted_eigenvalues(liouvillian_superoperator(two_level(w, gamma, 0.0)).matrix);
  CHECK(std::abs(damped[0] - (-gamma)) < 1e-12);
  CHECK(std::abs(damped[1] - Complex(-gamma / 2, -w)) < 1e-12);
  CHECK(std::abs(damped[2] - Complex(-gamma / 2, w)) < 1e-12);
  CHECK(std::abs(damped[3]) < 1e-12);

  testing::Rng rng(51);
  const Generator g = two_level(w, 0.2, 0.07);
  const Matrix brute = testing::brute_superoperator([&](const Matrix& x) { return g.rhs(x); }, 2);
  CHECK(max_abs_diff(brute, liouvillian_superoperator(g).matrix) < 1e-14);
}

TEST_CASE("time grids") {
  const auto t = time_grid(2.0, 5);
  REQUIRE(t.size() == 5);
  CHECK(t.front() == 0.0);
  CHECK(t.back() == 2.0);
  CHECK(t[1] == doctest::Approx(0.5));
  CHECK(time_grid(3.0, 1) == std::vector<double>{0.0});
  CHECK_THROWS_AS(time_grid(1.0, 0), DomainError);
  CHECK_THROWS_AS(time_grid(-1.0, 4), DomainError);
}

TEST_CASE("propagation: constant, decay, thermal fixed point") {
  const std::vector<double> times = time_grid(10.0, 11);
  {
    Generator g = two_level(1.0, 0.0, 0.0);
    g.h_eff = Matrix::Zero(2, 2);
    testing::Rng rng(52);
    const DensityMatrix rho(testing::random_density(2, rng));
    for (Method m : {Method::kExpm, Method::kRk4}) {
      const Trajectory traj = propagate(rho, g, times, {m});
      for (const auto& s : traj.states) {
        CHECK(max_abs_diff(s, rho.matrix()) < 1e-14);
      }
    }
  }
  const double gamma = 0.25;
  for (Method m : {Method::kExpm, Method::kRk4}) {
    const Trajectory traj = propagate(excited(), two_level(1.0, gamma, 0.0), times, {m});
    CHECK(traj.method == m);
    for (std::size_t k = 0; k < times.size(); ++k) {
      CHECK(std::abs(traj.states[k](1, 1).real() - std::exp(-gamma * times[k])) < 1e-7);
      CHECK(traj.diagnostics[k].min_eigenvalue >= -1e-12);
      CHECK(std::abs(traj.diagnostics[k].trace_defect) < 1e-12);
    }
  }
  const double down = 0.3, up = 0.1;
  const Trajectory hot = propagate(excited(), two_level(1.0, down, up), time_grid(200.0, 3));
  const Matrix& last = hot.states.back();
  CHECK(last(1, 1).real() / last(0, 0).real() == doctest::Approx(up / down).epsilon(1e-9));
}

TEST_CASE("propagation rejects bad grids") {
  const Generator g = two_level(1.0, 0.1, 0.0);
  CHECK_THROWS_AS(propagate(excited(), g, std::vector<double>{0.0, 1.0, 0.5}), DomainError);
  CHECK_THROWS_AS(propagate(excited(), g, std::vector<double>{-0.5, 1.0}), DomainError);
}

TEST_CASE("non-CP generator is reported as a propagation failure") {
  Generator g = two_level(1.0, 0.0, 0.0);
  // A negative rate drives populations out of [0, 1].
  Matrix sm = Matrix::Zero(2, 2);
  sm(0, 1) = 1.0;
  g.sandwich.push_back({-sm, sm});
  g.left_decay = -0.5 * sm.adjoint() * sm;
  const Trajectory partial = propagate_partial(excited(), g, time_grid(5.0, 11));
  REQUIRE(partial.failure.has_value());
  CHECK(partial.states.size() < 11);
  CHECK_THROWS_AS(propagate(excited(), g, time_grid(5.0, 11)), PropagationError);
}

TEST_CASE("exact oracle") {
  testing::Rng rng(53);
  const Matrix h_a = testing::random_hermitian(2, rng);
  const Matrix rho0 = testing::random_density(2, rng);
  const FiniteBath zero(diag({0, 0.7, 1.1}), 1.0, {Matrix::Zero(3, 3)});
  const std::vector<double> times = time_grid(4.0, 9);
  const Trajectory free = exact_oracle(h_a, zero, std::vector<Matrix>{sx()}, DensityMatrix(rho0), times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const Matrix u = testing::expm_unitary(h_a, times[k]);
    CHECK(max_abs_diff(free.states[k], u * rho0 * u.adjoint()) < 1e-12);
  }

  const FiniteBath b(testing::random_hermitian(4, rng), 0.9, {testing::random_hermitian(4, rng, 0.3)});
  const Trajectory coupled =
      exact_oracle(h_a, b, std::vector<Matrix>{sx()}, DensityMatrix(rho0), times);
  // Brute force: full unitary on the product space, then trace out the bath.
  const Matrix h_ab = tensor_product(h_a, Matrix::Identity(4, 4)) +
                      tensor_product(Matrix::Identity(2, 2), b.hamiltonian()) +
                      tensor_product(sx(), b.couplings()[0]);
  const Matrix rho_ab = tensor_product(rho0, b.gibbs());
  for (std::size_t k = 0; k < times.size(); ++k) {
    const Matrix u = testing::expm_unitary(h_ab, times[k]);
    const Matrix full = u * rho_ab * u.adjoint();
    CHECK(std::abs(full.trace() - 1.0) < 1e-12);
    CHECK(max_abs_diff(coupled.states[k], testing::brute_partial_trace_b(full, 2, 4)) < 1e-11);
    CHECK(std::abs(coupled.states[k].trace() - 1.0) < 1e-12);
  }
}

TEST_CASE("oracle dimension cap") {
  const FiniteBath b(Matrix::Identity(8, 8), 1.0, {Matrix::Identity(8, 8)});
  const DensityMatrix rho(diag({1, 0}));
  CHECK_THROWS_AS(exact_oracle(diag({0, 1}), b, std::vector<Matrix>{sx()}, rho, time_grid(1, 2), 8),
                  SizeError);
  CHECK(oracle_dim_cap() >= 1);
}

TEST_CASE("interaction picture") {
  testing::Rng rng(54);
  const Matrix h0 = testing::random_hermitian(4, rng);
  const Matrix op = testing::random_matrix(4, rng);
  const double t = 1.7;
  const Matrix there = interaction_picture(op, h0, t, PictureDirection::kTo);
  CHECK(max_abs_diff(interaction_picture(there, h0, t, PictureDirection::kFrom), op) <= 1e-12);
  const Matrix commuting = h0 * h0 + 0.3 * h0;
  CHECK(max_abs_diff(interaction_picture(commuting, h0, t, PictureDirection::kTo), commuting) <= 1e-12);
  const Matrix u = testing::expm_unitary(h0, t);
  CHECK(max_abs_diff(there, u.adjoint() * op * u) <= 1e-12);

  const Matrix ha = testing::random_hermitian(3, rng);
  const Matrix hb = testing::random_hermitian(5, rng);
  const Matrix h = tensor_product(ha, Matrix::Identity(5, 5)) + tensor_product(Matrix::Identity(3, 3), hb);
  const Matrix rho = testing::random_density(15, rng);
  const Matrix lhs = partial_trace_bath(interaction_picture(rho, h, t, PictureDirection::kTo), 3, 5);
  const Matrix rhs = interaction_picture(partial_trace_bath(rho, 3, 5), ha, t, PictureDirection::kTo);
  CHECK(max_abs_diff(lhs, rhs) <= 1e-11);
}

TEST_CASE("timescale verdicts") {
  CHECK(classify_two_scale_ratio(0.05) == Verdict::kPass);
  CHECK(classify_two_scale_ratio(0.5) == Verdict::kWarn);
  CHECK(classify_two_scale_ratio(3.0) == Verdict::kFail);
  const TimescaleReport warn = timescale_report(5.0, 0.1);
  CHECK(warn.two_scale_ratio == doctest::Approx(0.5));
  CHECK(warn.verdict == Verdict::kWarn);
  CHECK(warn.t_a_estimate == doctest::Approx(1.0 / (0.01 * 5.0)));

  const FiniteBath zero(diag({0, 1}), 1.0, {Matrix::Zero(2, 2)});
  const TimescaleReport none = timescale_report(zero, std::vector<Matrix>{sx()});
  CHECK(std::isinf(none.t_a_estimate));
  CHECK(none.verdict == Verdict::kPass);

  // V = sqrt(Tr X^dag X sigma) ||A||_2 for a single channel.
  const FiniteBath b(diag({0, 0.9, 2.0}), 1.0, {0.2 * Matrix::Ones(3, 3)});
  const TimescaleReport r = timescale_report(b, std::vector<Matrix>{2.0 * sx()});
  const Matrix x = b.couplings()[0];
  CHECK(r.v_strength == doctest::Approx(std::sqrt((x.adjoint() * x * b.gibbs()).trace().real()) * 2.0));
  CHECK(r.two_scale_ratio == doctest::Approx(r.v_strength * r.tau_b));
}
