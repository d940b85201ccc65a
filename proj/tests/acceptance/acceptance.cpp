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

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "lindform/bath.hpp"
#include "lindform/commands.hpp"
#include "lindform/core.hpp"
#include "lindform/dynamics.hpp"
#include "lindform/generator.hpp"
#include "lindform/scenario.hpp"
#include "lindform/spectral.hpp"
#include "support/testing.hpp"

#ifndef LINDFORM_SCENARIO_DIR
#define LINDFORM_SCENARIO_DIR "scenarios"
#endif

using namespace lindform;
using lindform::testing::max_abs_diff;
using lindform::testing::Rng;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

int failures = 0;

void run(int id, const char* name, double budget_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (budget_s > 0 && secs > budget_s) {
    o.pass = false;
    o.detail += "; over the " + sci(budget_s) + " s budget";
  }
  if (!o.pass) ++failures;
  std::printf("%s [%d] %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(),
              secs);
  std::fflush(stdout);
}

std::string scenario_path(const char* file) {
  return std::string(LINDFORM_SCENARIO_DIR) + "/" + file;
}

// The random ensemble shared by criteria 1 and 2.
struct Sample {
  Matrix h;
  std::vector<Matrix> a_ops;
};

std::vector<Sample> ensemble() {
  Rng rng(20260101);
  std::vector<Sample> out;
  for (int k = 0; k < 50; ++k) {
    const std::size_t d = 2 + static_cast<std::size_t>(k % 7);
    Sample s;
    s.h = testing::random_hamiltonian(d, rng, k % 3 == 0);
    s.a_ops = {testing::random_matrix(d, rng), testing::random_hermitian(d, rng)};
    out.push_back(std::move(s));
  }
  return out;
}

// A smooth two-channel analytic bath with correlated channels.
AnalyticBath smooth_bath(double strength) {
  Matrix b(2, 2);
  b << Complex(1.0, 0.0), Complex(0.3, 0.4), Complex(0.0, 0.0), Complex(0.7, 0.0);
  const Matrix mix = b * b.adjoint();
  Matrix shift(2, 2);
  shift << Complex(0.5, 0.0), Complex(0.1, -0.2), Complex(0.1, 0.2), Complex(-0.3, 0.0);
  AnalyticBath bath;
  bath.channel_count = 2;
  bath.model = "smooth";
  const double temperature = 1.2;
  bath.gamma_fn = [=](double w) -> Matrix {
    const double s = strength * (1.0 + 0.3 * std::sin(w)) / (1.0 + std::exp(-w / temperature));
    return s * mix;
  };
  bath.delta_fn = [=](double w) -> Matrix { return strength * 0.2 * std::tanh(w) * shift; };
  return bath;
}

// A non-degenerate 4-level system with distinct gaps and two couplings.
struct FourLevel {
  Matrix h;
  std::vector<Matrix> a_ops;
};

FourLevel four_level() {
  Rng rng(4444);
  RealVector levels(4);
  levels << 0.0, 0.7, 1.9, 3.4;
  const Matrix v = testing::random_unitary(4, rng);
  Matrix h = v * levels.cast<Complex>().asDiagonal() * v.adjoint();
  h = 0.5 * (h + h.adjoint());
  return {h, {testing::random_matrix(4, rng, 0.5), testing::random_hermitian(4, rng, 0.5)}};
}

}  // namespace

int main() {
  const std::vector<Sample> samples = ensemble();

  run(1, "eigenoperator completeness", 5.0, [&]() -> Outcome {
    double worst = 0.0;
    for (const auto& s : samples) {
      const Spectrum sp = build_spectrum(s.h);
      for (const auto& a : s.a_ops) {
        worst = std::max(worst, max_abs_diff(eigenoperator_decomposition(a, sp).sum(), a));
      }
    }
    return {worst <= 1e-12, "max |sum A(w) - A| = " + sci(worst) + ", tol 1e-12, 50 systems"};
  });

  run(2, "commutator identities", 0.0, [&]() -> Outcome {
    double worst = 0.0;
    for (const auto& s : samples) {
      const Spectrum sp = build_spectrum(s.h);
      const auto sets = decompose_couplings(s.a_ops, sp);
      for (const auto& set : sets) {
        for (const auto& t : set.terms) {
          worst = std::max(worst, max_abs(commutator(s.h, t.op) + t.omega * t.op));
          const Matrix adj = t.op.adjoint();
          worst = std::max(worst, max_abs(commutator(s.h, adj) - t.omega * adj));
        }
      }
      for (const auto& sa : sets) {
        for (const auto& sb : sets) {
          for (const auto& ta : sa.terms) {
            const EigenOperatorTerm* tb = sb.find(ta.bohr_index);
            if (tb == nullptr) continue;
            worst = std::max(worst, max_abs(commutator(s.h, ta.op.adjoint() * tb->op)));
          }
        }
      }
    }
    return {worst <= 1e-10, "max defect = " + sci(worst) + ", tol 1e-10"};
  });

  const FourLevel fl = four_level();

  run(3, "generator trace and hermiticity preservation", 5.0, [&]() -> Outcome {
    const Spectrum sp = build_spectrum(fl.h);
    const auto ops = decompose_couplings(fl.a_ops, sp);
    const AnalyticBath bath = smooth_bath(0.05);
    SecularPolicy policy;
    policy.dt = 4.0;
    policy.filter = SecularFilter::kFWeighted;
    const std::vector<Generator> gens{build_standard_form(sp, ops, bath),
                                      build_presecular(sp, ops, bath, policy)};
    Rng rng(333);
    double tr = 0.0, herm = 0.0;
    for (int k = 0; k < 100; ++k) {
      const Matrix rho = k % 2 ? testing::random_density(4, rng) : testing::random_matrix(4, rng);
      for (const auto& g : gens) {
        tr = std::max(tr, std::abs(g.rhs(rho).trace()));
        herm = std::max(herm, max_abs(g.rhs(rho.adjoint()) - g.rhs(rho).adjoint()));
      }
    }
    return {tr <= 1e-12 && herm <= 1e-12, "|Tr rhs| = " + sci(tr) + ", hermiticity defect = " +
                                              sci(herm) + ", tol 1e-12, secular and presecular"};
  });

  run(4, "positivity preservation", 10.0, [&]() -> Outcome {
    const Scenario s = load_scenario(scenario_path("two_level_thermal.json"));
    const Derivation dv = derive(s);
    const double gamma = std::get<AnalyticBathSpec>(s.bath).gamma;
    const std::vector<double> times = time_grid(20.0 / gamma, 201);
    Rng rng(444);
    double lowest = 1.0;
    for (int k = 0; k < 20; ++k) {
      const DensityMatrix rho0(testing::random_density(2, rng, k % 4 == 0 ? 1 : 0));
      PropagationOptions opt;
      opt.method = Method::kExpm;
      const Trajectory traj = propagate_partial(rho0, dv.generator, times, opt);
      if (traj.failure) return {false, "propagation stopped: " + traj.failure->message};
      for (const auto& st : traj.states) {
        lowest = std::min(lowest, min_hermitian_eigenvalue(st));
      }
    }
    return {lowest >= -1e-8, "min eigenvalue = " + sci(lowest) + ", tol -1e-8, 20 states x 201 samples"};
  });

  run(5, "detailed balance", 0.0, [&]() -> Outcome {
    const Scenario s = load_scenario(scenario_path("two_level_thermal.json"));
    const auto& spec = std::get<AnalyticBathSpec>(s.bath);
    const Derivation dv = derive(s);
    PropagationOptions opt;
    opt.method = Method::kExpm;
    const std::vector<double> times{0.0, 40.0 / spec.gamma};
    const Trajectory traj = propagate(initial_state(s, dv.model.h_a), dv.generator, times, opt);
    const Matrix& last = traj.states.back();
    const double omega = dv.spectrum.eigenvalues()(1) - dv.spectrum.eigenvalues()(0);
    const double ratio = last(1, 1).real() / last(0, 0).real();
    const double want = std::exp(-omega / spec.temperature);
    const double err = std::abs(ratio - want);
    return {err <= 1e-6, "rho_ee/rho_gg = " + sci(ratio) + " vs " + sci(want) + ", |diff| = " +
                             sci(err) + ", tol 1e-6"};
  });

  run(6, "Pauli reduction", 0.0, [&]() -> Outcome {
    const Spectrum sp = build_spectrum(fl.h);
    const AnalyticBath bath = smooth_bath(0.05);
    const Generator g = build_standard_form(sp, decompose_couplings(fl.a_ops, sp), bath);
    const Matrix kernel =
        superoperator_to_eigenbasis(liouvillian_superoperator(g).matrix, sp);

    // Independent assembly from the rate formulas in a separately computed eigenbasis.
    const testing::Eig e = testing::eig(fl.h);
    const Eigen::Index d = 4;
    std::vector<Matrix> at;
    for (const auto& a : fl.a_ops) at.push_back(e.vectors.adjoint() * a * e.vectors);
    auto w = [&](Eigen::Index i) { return e.values(i); };
    auto k_rate = [&](Eigen::Index a, Eigen::Index m, Eigen::Index b, Eigen::Index n) {
      const Matrix gm = bath.gamma_fn(w(m) - w(a));
      Complex sum = 0.0;
      for (Eigen::Index al = 0; al < 2; ++al) {
        for (Eigen::Index be = 0; be < 2; ++be) {
          sum += gm(al, be) * at[static_cast<std::size_t>(be)](a, m) *
                 std::conj(at[static_cast<std::size_t>(al)](b, n));
        }
      }
      return sum;
    };
    auto kappa_rate = [&](Eigen::Index x) {
      Complex sum = 0.0;
      for (Eigen::Index c = 0; c < d; ++c) sum += k_rate(c, x, c, x);
      return sum;
    };
    auto lamb = [&](Eigen::Index a) {
      Complex sum = 0.0;
      for (Eigen::Index m = 0; m < d; ++m) {
        const Matrix dm = bath.delta_fn(w(a) - w(m));
        for (Eigen::Index al = 0; al < 2; ++al) {
          for (Eigen::Index be = 0; be < 2; ++be) {
            sum += dm(al, be) * std::conj(at[static_cast<std::size_t>(al)](m, a)) *
                   at[static_cast<std::size_t>(be)](m, a);
          }
        }
      }
      return sum.real();
    };
    Matrix want = Matrix::Zero(d * d, d * d);
    for (Eigen::Index a = 0; a < d; ++a) {
      for (Eigen::Index m = 0; m < d; ++m) {
        want(a + a * d, m + m * d) = k_rate(a, m, a, m) - (a == m ? kappa_rate(a) : 0.0);
      }
    }
    for (Eigen::Index a = 0; a < d; ++a) {
      for (Eigen::Index b = 0; b < d; ++b) {
        if (a == b) continue;
        const double freq = w(a) - w(b) + lamb(a) - lamb(b);
        want(a + b * d, a + b * d) = Complex(0.0, -freq) + k_rate(a, a, b, b) -
                                     0.5 * (kappa_rate(a) + kappa_rate(b));
      }
    }
    const double err = max_abs_diff(kernel, want);
    return {err <= 1e-10, "max |kernel - rate formulas| = " + sci(err) + ", tol 1e-10, d = 4"};
  });

  run(7, "oracle agreement at weak coupling", 60.0, [&]() -> Outcome {
    const Scenario s = load_scenario(scenario_path("oracle_weak_8spin.json"));
    const CommandOutput full = cmd_oracle(s, 1.0);
    const CommandOutput half = cmd_oracle(s, 0.5);
    if (full.exit_code != kExitOk || half.exit_code != kExitOk) {
      return {false, "oracle run failed: " + full.error + half.error};
    }
    const auto rf = nlohmann::json::parse(full.text);
    const auto rh = nlohmann::json::parse(half.text);
    const double ratio = rf["timescale"]["two_scale_ratio"].get<double>();
    const double td = rf["max_trace_distance"].get<double>();
    const double td_half = rh["max_trace_distance"].get<double>();
    const double gain = td / td_half;
    const bool ok = ratio <= 0.05 && td <= 0.05 && gain >= 1.5;
    return {ok, "V tau_B = " + sci(ratio) + " (<= 0.05), max trace distance = " + sci(td) +
                    " (tol 0.05) over [0, " + sci(rf["t_max"].get<double>()) +
                    "], halving factor = " + sci(gain) + " (>= 1.5)"};
  });

  run(8, "secular limit", 0.0, [&]() -> Outcome {
    const Spectrum sp = build_spectrum(fl.h);
    const auto ops = decompose_couplings(fl.a_ops, sp);
    // The residual falls off as |F(gap)| ~ 1 / (gap dt) times the rates, so the
    // comparison runs at weak coupling: rates three decades below the gap.
    const double strength = 1e-3;
    const AnalyticBath bath = smooth_bath(strength);
    SecularPolicy policy;
    policy.dt = 1e3 / min_bohr_gap(sp);
    policy.filter = SecularFilter::kFWeighted;
    const Matrix sec = liouvillian_superoperator(build_standard_form(sp, ops, bath)).matrix;
    const Matrix pre = liouvillian_superoperator(build_presecular(sp, ops, bath, policy)).matrix;
    const double err = max_abs_diff(sec, pre);
    double zero = 0.0;
    for (int n = 1; n <= 20; ++n) {
      const double x = 2.0 * n * std::numbers::pi / policy.dt;
      zero = std::max({zero, std::abs(f_weight(x, policy.dt)), std::abs(f_weight(-x, policy.dt))});
    }
    return {err <= 1e-6 && zero <= 1e-12, "max |L_pre - L_sec| = " + sci(err) +
                                              " (tol 1e-6) at bath strength " + sci(strength) +
                                              ", max |F(2 n pi / dt)| = " + sci(zero) +
                                              " (tol 1e-12)"};
  });

  run(9, "correlation-function laws", 0.0, [&]() -> Outcome {
    Rng rng(999);
    std::uniform_real_distribution<double> u(0.3, 3.0);
    double conj_defect = 0.0, shift_defect = 0.0;
    for (std::size_t d = 2; d <= 16; ++d) {
      const FiniteBath b(testing::random_hermitian(d, rng), u(rng),
                         {testing::random_hermitian(d, rng, 0.3), testing::random_matrix(d, rng, 0.3)});
      for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t c = 0; c < 2; ++c) {
          for (double tau : {0.41, -1.3, 2.7}) {
            conj_defect = std::max(conj_defect, std::abs(std::conj(correlation_function(b, a, c, tau)) -
                                                         correlation_function(b, c, a, -tau)));
            for (double shift : {0.9, -2.2}) {
              const double t1 = 0.5, t2 = 0.5 - tau;
              shift_defect = std::max(
                  shift_defect, std::abs(correlation_two_time(b, a, c, t1 + shift, t2 + shift) -
                                         correlation_two_time(b, a, c, t1, t2)));
            }
          }
        }
      }
    }
    return {conj_defect <= 1e-10 && shift_defect <= 1e-10,
            "conjugation defect = " + sci(conj_defect) + ", translation defect = " +
                sci(shift_defect) + ", tol 1e-10, bath dims 2-16"};
  });

  run(10, "picture invariance of the reduction", 0.0, [&]() -> Outcome {
    Rng rng(1010);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const std::size_t da = 2 + static_cast<std::size_t>(k % 3);
      const std::size_t db = 2 + static_cast<std::size_t>(k % 5);
      const Matrix ha = testing::random_hermitian(da, rng);
      const Matrix hb = testing::random_hermitian(db, rng);
      const auto ia = static_cast<Eigen::Index>(da), ib = static_cast<Eigen::Index>(db);
      const Matrix h =
          tensor_product(ha, Matrix::Identity(ib, ib)) + tensor_product(Matrix::Identity(ia, ia), hb);
      const Matrix rho = testing::random_density(da * db, rng);
      const double t = 0.3 + 0.4 * k;
      const Matrix lhs = partial_trace_bath(interaction_picture(rho, h, t, PictureDirection::kTo), da, db);
      const Matrix rhs =
          interaction_picture(partial_trace_bath(rho, da, db), ha, t, PictureDirection::kTo);
      worst = std::max(worst, max_abs_diff(lhs, rhs));
    }
    return {worst <= 1e-11, "max defect = " + sci(worst) + ", tol 1e-11, 20 random states"};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
