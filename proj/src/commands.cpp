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

#include "lindform/commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <sstream>

namespace lindform {

using nlohmann::json;

namespace {

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(complex_json(m(r, c)));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json real_matrix_json(const RealMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(m(r, c));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// JSON has no infinity; unbounded quantities are written as the string "inf".
json number_json(double x) {
  if (std::isinf(x)) {
    return x > 0 ? json("inf") : json("-inf");
  }
  if (std::isnan(x)) {
    return json("nan");
  }
  return json(x);
}

std::string fmt(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

std::string element_label(const char* prefix, std::size_t i, std::size_t j, std::size_t d) {
  std::string s = prefix;
  s += std::to_string(i);
  if (d > 10) {
    s += "_";
  }
  s += std::to_string(j);
  return s;
}

Matrix random_matrix(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = Complex(n(rng), n(rng));
    }
  }
  return m;
}

Matrix random_density(std::size_t d, std::mt19937_64& rng) {
  const Matrix g = random_matrix(d, rng);
  const Matrix rho = g * g.adjoint();
  return rho / rho.trace();
}

double max_eigenvalue(const Matrix& m) {
  if (m.size() == 0) {
    return 0.0;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return solver.eigenvalues().maxCoeff();
}

double max_singular_value(const Matrix& m) {
  if (m.size() == 0) {
    return 0.0;
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

std::optional<TimescaleReport> derive_timescale(const Model& model,
                                                const std::vector<DissipatorTerm>& terms) {
  if (const auto* fb = std::get_if<FiniteBath>(&model.bath)) {
    return timescale_report(*fb, model.a_ops);
  }
  if (!model.tau_b) {
    return std::nullopt;
  }
  // Without bath operators V is inferred from the rate scale, using
  // Gamma ~ 2 V^2 tau_B for a correlation of size V^2 lasting tau_B.
  double gamma_max = 0.0;
  for (const auto& t : terms) {
    gamma_max = std::max(gamma_max, max_eigenvalue(t.gamma));
  }
  double a_norm = 0.0;
  for (const auto& a : model.a_ops) {
    a_norm = std::max(a_norm, max_singular_value(a));
  }
  const double tau = *model.tau_b;
  const double v = tau > 0.0 ? std::sqrt(gamma_max / (2.0 * tau)) * a_norm : 0.0;
  return timescale_report(tau, v);
}

SecularPolicy secular_policy(const Scenario& s) {
  SecularPolicy p;
  p.dt = s.policy.dt;
  p.filter = s.policy.filter;
  p.matching_tol = s.policy.matching_tol;
  return p;
}

json timescale_json(const TimescaleReport& r) {
  return {{"tau_b", number_json(r.tau_b)},
          {"t_a_estimate", number_json(r.t_a_estimate)},
          {"v_strength", number_json(r.v_strength)},
          {"two_scale_ratio", number_json(r.two_scale_ratio)},
          {"tau_b_non_decaying", r.tau_b_non_decaying},
          {"verdict", to_string(r.verdict)}};
}

json checks_json(const std::vector<CheckResult>& checks) {
  json out = json::array();
  for (const auto& c : checks) {
    json item = {{"name", c.name},
                 {"status", to_string(c.status)},
                 {"defect", number_json(c.defect)},
                 {"tolerance", number_json(c.tolerance)}};
    if (!c.detail.empty()) {
      item["detail"] = c.detail;
    }
    out.push_back(std::move(item));
  }
  return out;
}

bool any_failed(const std::vector<CheckResult>& checks) {
  return std::any_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.status == CheckStatus::kFail; });
}

}  // namespace

const char* to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::kPass:
      return "pass";
    case CheckStatus::kWarn:
      return "warn";
    case CheckStatus::kFail:
      break;
  }
  return "fail";
}

Derivation derive(const Scenario& s, double coupling_scale) {
  Model model = build_model(s, coupling_scale);
  Spectrum spectrum = build_spectrum(model.h_a, s.system.degeneracy_tol);
  std::vector<EigenOperatorSet> eigenops = decompose_couplings(model.a_ops, spectrum);
  Generator g = s.policy.mode == GeneratorMode::kSecular
                    ? build_standard_form(spectrum, eigenops, model.bath)
                    : build_presecular(spectrum, eigenops, model.bath, secular_policy(s));
  RateTensors rates = build_rate_tensors(spectrum, model.a_ops, model.bath);
  std::optional<PauliEquations> pauli;
  if (spectrum.dim() <= kMaxKernelDim) {
    pauli = pauli_equations(rates, spectrum, g.h_ls);
  }
  std::optional<TimescaleReport> timescale = derive_timescale(model, g.terms);
  return Derivation{std::move(model), std::move(spectrum), std::move(eigenops),
                    std::move(g),     std::move(rates),    std::move(pauli),
                    std::move(timescale)};
}

std::vector<CheckResult> invariant_battery(const Scenario& s) {
  std::vector<CheckResult> out;
  auto add = [&](std::string name, double defect, double tol, std::string detail = {}) {
    const CheckStatus status = defect <= tol ? CheckStatus::kPass : CheckStatus::kFail;
    out.push_back({std::move(name), status, defect, tol, std::move(detail)});
  };
  auto stage_failed = [&](std::string name, const std::exception& e) {
    out.push_back({std::move(name), CheckStatus::kFail, std::numeric_limits<double>::infinity(),
                   0.0, e.what()});
  };
  auto skipped = [&](std::string name, std::string why) {
    out.push_back({std::move(name), CheckStatus::kWarn, 0.0, 0.0, "skipped: " + std::move(why)});
  };
  std::mt19937_64 rng(0x5eed1e55ULL);

  std::optional<Model> model;
  try {
    model = build_model(s);
  } catch (const std::exception& e) {
    stage_failed("model", e);
    return out;
  }
  std::optional<Spectrum> spectrum;
  try {
    spectrum = build_spectrum(model->h_a, s.system.degeneracy_tol);
  } catch (const std::exception& e) {
    stage_failed("spectrum", e);
    return out;
  }
  const Spectrum& sp = *spectrum;
  const std::size_t d = sp.dim();
  const Matrix& h = model->h_a;
  const double h_scale = std::max(1.0, max_abs(h));

  if (sp.warnings().empty()) {
    add("spectrum.clustering", 0.0, 0.0);
  } else {
    out.push_back({"spectrum.clustering", CheckStatus::kWarn, 0.0, 0.0, sp.warnings().front()});
  }

  const std::vector<EigenOperatorSet> eigenops = decompose_couplings(model->a_ops, sp);
  {
    double completeness = 0.0, comm = 0.0, comm_adj = 0.0, invariance = 0.0, adjoint = 0.0;
    double a_scale = 1.0;
    for (std::size_t c = 0; c < eigenops.size(); ++c) {
      const Matrix& a = model->a_ops[c];
      a_scale = std::max(a_scale, max_abs(a));
      const Matrix sum = eigenops[c].terms.empty() ? Matrix::Zero(a.rows(), a.cols())
                                                   : eigenops[c].sum();
      completeness = std::max(completeness, max_abs(sum - a));
      for (const auto& t : eigenops[c].terms) {
        comm = std::max(comm, max_abs(commutator(h, t.op) + t.omega * t.op));
        const Matrix t_dag = t.op.adjoint();
        comm_adj = std::max(comm_adj, max_abs(commutator(h, t_dag) - t.omega * t_dag));
        adjoint = std::max(
            adjoint, max_abs(eigenoperator(a.adjoint(), sp, -t.omega) - t.op.adjoint()));
        for (std::size_t c2 = 0; c2 < eigenops.size(); ++c2) {
          if (const EigenOperatorTerm* u = eigenops[c2].find(t.bohr_index)) {
            invariance = std::max(invariance, max_abs(commutator(h, t_dag * u->op)));
          }
        }
      }
    }
    const double comm_scale = h_scale * a_scale;
    add("eigenoperators.completeness", completeness, 1e-12 * a_scale);
    add("eigenoperators.commutator", comm, 1e-10 * comm_scale);
    add("eigenoperators.adjoint_commutator", comm_adj, 1e-10 * comm_scale);
    add("eigenoperators.invariance", invariance, 1e-10 * comm_scale * a_scale);
    add("eigenoperators.adjoint_consistency", adjoint, 1e-13 * a_scale);
  }

  // Spectral matrices at every Bohr frequency that carries an eigenoperator.
  std::vector<double> omegas;
  for (std::size_t k = 0; k < sp.bohr().size(); ++k) {
    for (const auto& set : eigenops) {
      if (set.find(k)) {
        omegas.push_back(sp.bohr().values()[k]);
        break;
      }
    }
  }
  {
    double herm = 0.0, psd = 0.0, dherm = 0.0, wdef = 0.0, scale = 0.0;
    std::string worst_psd;
    try {
      for (double w : omegas) {
        const Matrix g = evaluate_gamma(model->bath, w);
        const double gs = max_abs(g);
        scale = std::max(scale, gs);
        herm = std::max(herm, hermiticity_defect(g));
        const double lowest = min_hermitian_eigenvalue(g);
        const double violation = std::max(0.0, -lowest) / std::max(gs, 1e-300);
        if (violation > psd) {
          psd = violation;
          std::ostringstream msg;
          msg << "lowest eigenvalue " << lowest << " at omega=" << w;
          worst_psd = msg.str();
        }
      }
      add("bath.gamma_hermitian", herm, 1e-12 * std::max(1.0, scale));
      add("bath.gamma_psd", psd, 1e-8, worst_psd);
    } catch (const std::exception& e) {
      stage_failed("bath.gamma", e);
    }
    try {
      for (double w : omegas) {
        dherm = std::max(dherm, hermiticity_defect(delta_matrix(model->bath, w)));
      }
      add("bath.delta_hermitian", dherm, 1e-12 * std::max(1.0, scale));
    } catch (const std::exception& e) {
      stage_failed("bath.delta_hermitian", e);
    }
    if (std::holds_alternative<FiniteBath>(model->bath)) {
      for (double w : omegas) {
        const Matrix recombined =
            0.5 * evaluate_gamma(model->bath, w) + kI * delta_matrix(model->bath, w);
        wdef = std::max(wdef, max_abs(w_matrix(model->bath, w) - recombined));
      }
      add("bath.w_recombination", wdef, 1e-12 * std::max(1.0, scale));
    }
  }

  if (const auto* fb = std::get_if<FiniteBath>(&model->bath)) {
    add("bath.gibbs_commutes", max_abs(commutator(fb->gibbs(), fb->hamiltonian())), 1e-12);
    double mean = 0.0;
    for (const auto& x : fb->couplings()) {
      mean = std::max(mean, std::abs((x * fb->gibbs()).trace()));
    }
    const auto* spec = std::get_if<FiniteBathSpec>(&s.bath);
    if (spec && spec->center) {
      add("bath.centered", mean, 1e-12 * std::max(1.0, max_abs(fb->hamiltonian())));
    }
    double conj = 0.0, stat = 0.0, g0 = 0.0, g0def = 0.0;
    const double e_scale = std::max(1.0, fb->energies().cwiseAbs().maxCoeff());
    const std::size_t nc = fb->channel_count();
    for (std::size_t a = 0; a < nc; ++a) {
      for (std::size_t b = 0; b < nc; ++b) {
        const Complex at0 = correlation_function(*fb, a, b, 0.0);
        g0 = std::max(g0, std::abs(at0));
        g0def = std::max(g0def, std::abs(at0 - (fb->couplings()[a].adjoint() *
                                                fb->couplings()[b] * fb->gibbs())
                                                   .trace()));
        for (int k = -3; k <= 3; ++k) {
          const double tau = 0.7 * k / e_scale;
          conj = std::max(conj, std::abs(std::conj(correlation_function(*fb, a, b, tau)) -
                                         correlation_function(*fb, b, a, -tau)));
          const double t1 = 0.45 * k / e_scale;
          const double t2 = -0.25 * k / e_scale;
          const double shift = 1.9 / e_scale;
          const Complex two = correlation_two_time(*fb, a, b, t1, t2);
          stat = std::max(stat, std::abs(correlation_two_time(*fb, a, b, t1 + shift, t2 + shift) -
                                         two));
          stat = std::max(stat, std::abs(correlation_function(*fb, a, b, t1 - t2) - two));
        }
      }
    }
    const double g_scale = std::max(1.0, g0);
    add("bath.correlation_at_zero", g0def, 1e-10 * g_scale);
    add("bath.correlation_conjugation", conj, 1e-10 * g_scale);
    add("bath.correlation_stationarity", stat, 1e-10 * g_scale);

    const std::size_t total = d * fb->dim();
    if (total <= 512) {
      const Matrix rho_ab = random_density(total, rng);
      const auto da = static_cast<Eigen::Index>(d);
      const auto db = static_cast<Eigen::Index>(fb->dim());
      const Matrix h0 = tensor_product(h, Matrix::Identity(db, db), total) +
                        tensor_product(Matrix::Identity(da, da), fb->hamiltonian(), total);
      const double t = 0.83 / h_scale;
      const Matrix lhs = partial_trace_bath(
          interaction_picture(rho_ab, h0, t, PictureDirection::kTo), d, fb->dim());
      const Matrix rhs =
          interaction_picture(partial_trace_bath(rho_ab, d, fb->dim()), h, t, PictureDirection::kTo);
      add("dynamics.picture_invariance", max_abs(lhs - rhs), 1e-11);
    } else {
      skipped("dynamics.picture_invariance", "system x bath dimension above 512");
    }
  }

  std::optional<Generator> gen;
  try {
    gen = s.policy.mode == GeneratorMode::kSecular
              ? build_standard_form(sp, eigenops, model->bath)
              : build_presecular(sp, eigenops, model->bath, secular_policy(s));
  } catch (const std::exception& e) {
    stage_failed("generator", e);
  }
  if (gen) {
    const double bound = std::max(1.0, rhs_norm_bound(*gen));
    add("generator.h_eff_hermitian", hermiticity_defect(gen->h_eff), 1e-12 * h_scale);
    add("generator.lamb_shift_hermitian", hermiticity_defect(gen->h_ls), 1e-12 * h_scale);
    if (gen->mode == GeneratorMode::kSecular) {
      add("generator.lamb_shift_commutes", max_abs(commutator(h, gen->h_ls)),
          1e-10 * h_scale * std::max(1.0, max_abs(gen->h_ls)));
    }
    double trace = 0.0, herm = 0.0;
    for (int k = 0; k < 100; ++k) {
      const Matrix rho = random_density(d, rng);
      trace = std::max(trace, std::abs(gen->rhs(rho).trace()));
      const Matrix x = random_matrix(d, rng);
      herm = std::max(herm, max_abs(gen->rhs(x.adjoint()) - gen->rhs(x).adjoint()));
    }
    add("generator.trace_preservation", trace, 1e-12 * bound);
    add("generator.hermiticity_preservation", herm, 1e-12 * bound);
    if (d <= kMaxKernelDim) {
      const Superoperator l = liouvillian_superoperator(*gen);
      double spot = 0.0;
      for (int k = 0; k < 10; ++k) {
        const Matrix x = random_matrix(d, rng);
        spot = std::max(spot, max_abs(l.apply(x) - gen->rhs(x)));
      }
      add("generator.superoperator_consistency", spot, 1e-12 * bound * static_cast<double>(d));
      if (gen->mode == GeneratorMode::kSecular) {
        try {
          const RateTensors rates = build_rate_tensors(sp, model->a_ops, model->bath);
          const PauliEquations eq = pauli_equations(rates, sp, gen->h_ls);
          const Matrix le = superoperator_to_eigenbasis(l.matrix, sp);
          add("generator.energy_basis_kernel", max_abs(le - eq.kernel), 1e-10 * bound);
          if (eq.nondegenerate) {
            const double conservation =
                eq.population_generator.colwise().sum().cwiseAbs().maxCoeff();
            add("generator.population_conservation", conservation,
                1e-12 * std::max(1.0, eq.population_generator.cwiseAbs().maxCoeff()));
            double gain = 0.0;
            for (Eigen::Index a = 0; a < rates.pauli_gain.rows(); ++a) {
              for (Eigen::Index m = 0; m < rates.pauli_gain.cols(); ++m) {
                gain = std::max(gain, -rates.pauli_gain(a, m));
              }
            }
            add("generator.pauli_gain_nonnegative", gain,
                1e-12 * std::max(1.0, rates.pauli_gain.cwiseAbs().maxCoeff()));
          }
          if (eq.fallback) {
            out.push_back({"generator.coherence_blocks", CheckStatus::kWarn, 0.0, 0.0,
                           eq.notes.front()});
          }
        } catch (const std::exception& e) {
          stage_failed("generator.rate_tensors", e);
        }
      }
    } else {
      skipped("generator.superoperator_consistency", "system dimension above 16");
    }

    const std::optional<TimescaleReport> ts = derive_timescale(*model, gen->terms);
    if (ts) {
      std::ostringstream msg;
      msg << "V tau_B = " << ts->two_scale_ratio << " (" << to_string(ts->verdict) << ")";
      out.push_back({"timescale.two_scale_ratio",
                     ts->verdict == Verdict::kPass ? CheckStatus::kPass : CheckStatus::kWarn,
                     ts->two_scale_ratio, 0.1, msg.str()});
    }
  }
  return out;
}

CommandOutput cmd_derive(const Scenario& s) {
  CommandOutput result;
  try {
    const Derivation dv = derive(s);
    const Spectrum& sp = dv.spectrum;
    json report;
    report["scenario"] = s.name;
    report["mode"] = to_string(dv.generator.mode);
    json mults = json::array();
    for (const auto& m : sp.multiplets()) {
      mults.push_back(
          {{"frequency", m.frequency}, {"degeneracy", m.degeneracy()}, {"members", m.members}});
    }
    report["spectrum"] = {{"dim", sp.dim()},
                          {"eigenvalues", std::vector<double>(sp.eigenvalues().data(),
                                                              sp.eigenvalues().data() +
                                                                  sp.eigenvalues().size())},
                          {"degeneracy_tol", sp.degeneracy_tol()},
                          {"multiplets", mults},
                          {"warnings", sp.warnings()}};
    report["bohr_frequencies"] = sp.bohr().values();
    json ops = json::array();
    for (const auto& set : dv.eigenops) {
      json terms = json::array();
      for (const auto& t : set.terms) {
        terms.push_back({{"omega", t.omega}, {"operator", matrix_json(t.op)}});
      }
      ops.push_back({{"channel", set.channel}, {"terms", terms}});
    }
    report["eigenoperators"] = ops;
    json spectral = json::array();
    for (const auto& t : dv.generator.terms) {
      spectral.push_back(
          {{"omega", t.omega}, {"gamma", matrix_json(t.gamma)}, {"delta", matrix_json(t.delta)}});
    }
    report["spectral_matrices"] = spectral;
    report["h_ls"] = matrix_json(dv.generator.h_ls);
    report["h_eff"] = matrix_json(dv.generator.h_eff);
    report["free_evolution"] = dv.generator.free_evolution();
    if (dv.generator.mode == GeneratorMode::kPresecular) {
      report["policy"] = {{"dt", dv.generator.policy.dt},
                          {"filter", to_string(dv.generator.policy.filter)}};
    }
    json k = json::array();
    for (const auto& [q, v] : dv.rates.K) {
      k.push_back({{"a", q[0]}, {"m", q[1]}, {"b", q[2]}, {"n", q[3]}, {"value", complex_json(v)}});
    }
    json kap = json::array();
    for (const auto& [p, v] : dv.rates.kappa) {
      kap.push_back({{"x", p[0]}, {"y", p[1]}, {"value", complex_json(v)}});
    }
    report["rate_tensors"] = {{"K", k},
                              {"kappa", kap},
                              {"pauli_gain", real_matrix_json(dv.rates.pauli_gain)},
                              {"coherence_decay", real_matrix_json(dv.rates.coherence_decay)}};
    if (dv.pauli) {
      json pauli = {{"nondegenerate", dv.pauli->nondegenerate},
                    {"distinct_gaps", dv.pauli->distinct_gaps},
                    {"fallback", dv.pauli->fallback},
                    {"notes", dv.pauli->notes}};
      if (dv.pauli->population_generator.size() != 0) {
        pauli["population_generator"] = real_matrix_json(dv.pauli->population_generator);
      }
      if (dv.pauli->coherence_rates.size() != 0) {
        pauli["coherence_rates"] = matrix_json(dv.pauli->coherence_rates);
      }
      report["pauli"] = pauli;
    }
    if (const auto* fb = std::get_if<FiniteBath>(&dv.model.bath)) {
      json means = json::array();
      for (const auto& m : dv.model.coupling_means) {
        means.push_back(complex_json(m));
      }
      report["bath"] = {{"kind", "finite"},
                        {"dim", fb->dim()},
                        {"broadening", fb->broadening()},
                        {"coupling_means", means}};
    } else {
      report["bath"] = {{"kind", "analytic"}, {"model", std::get<AnalyticBath>(dv.model.bath).model}};
    }
    if (dv.timescale) {
      report["timescale"] = timescale_json(*dv.timescale);
    }
    const std::vector<CheckResult> checks = invariant_battery(s);
    report["checks"] = checks_json(checks);
    result.exit_code = any_failed(checks) ? kExitInvariantFailure : kExitOk;
    result.text = report.dump(2) + "\n";
  } catch (const std::exception& e) {
    result.exit_code = exit_code_for(e);
    result.error = error_record(e);
  }
  return result;
}

CommandOutput cmd_evolve(const Scenario& s, std::optional<Method> method) {
  CommandOutput result;
  try {
    if (!s.times) {
      throw InputError("times", "evolve needs a time grid {t_max, samples}");
    }
    const Derivation dv = derive(s);
    const DensityMatrix rho0 = initial_state(s, dv.model.h_a);
    PropagationOptions options;
    options.method = method.value_or(s.policy.method);
    options.validity_tol = s.tolerances.propagation;
    const std::vector<double> times = time_grid(s.times->t_max, s.times->samples);
    const Trajectory traj = propagate_partial(rho0, dv.generator, times, options);

    const std::size_t d = dv.generator.dim;
    std::ostringstream csv;
    csv << "time";
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        csv << ',' << element_label("re_", i, j, d) << ',' << element_label("im_", i, j, d);
      }
    }
    csv << ",trace_defect,min_eigenvalue\n";
    for (std::size_t k = 0; k < traj.size(); ++k) {
      csv << fmt(traj.times[k]);
      const Matrix& rho = traj.states[k];
      for (Eigen::Index i = 0; i < rho.rows(); ++i) {
        for (Eigen::Index j = 0; j < rho.cols(); ++j) {
          csv << ',' << fmt(rho(i, j).real()) << ',' << fmt(rho(i, j).imag());
        }
      }
      csv << ',' << fmt(traj.diagnostics[k].trace_defect) << ','
          << fmt(traj.diagnostics[k].min_eigenvalue) << '\n';
    }
    result.text = csv.str();
    if (traj.failure) {
      const PropagationError err(traj.failure->message, traj.failure->time,
                                 traj.failure->min_eigenvalue);
      result.exit_code = kExitInvariantFailure;
      result.error = error_record(err);
    }
  } catch (const std::exception& e) {
    result.exit_code = exit_code_for(e);
    result.error = error_record(e);
  }
  return result;
}

CommandOutput cmd_verify(const Scenario& s) {
  CommandOutput result;
  const std::vector<CheckResult> checks = invariant_battery(s);
  std::size_t passed = 0, warned = 0, failed = 0;
  for (const auto& c : checks) {
    passed += c.status == CheckStatus::kPass;
    warned += c.status == CheckStatus::kWarn;
    failed += c.status == CheckStatus::kFail;
  }
  json report = {{"scenario", s.name},
                 {"checks", checks_json(checks)},
                 {"summary", {{"pass", passed}, {"warn", warned}, {"fail", failed}}}};
  result.text = report.dump(2) + "\n";
  result.exit_code = failed > 0 ? kExitInvariantFailure : kExitOk;
  return result;
}

CommandOutput cmd_oracle(const Scenario& s, double coupling_scale) {
  CommandOutput result;
  try {
    if (!s.finite_bath()) {
      throw InputError("bath.type", "the oracle needs a finite bath");
    }
    const auto& spec = std::get<FiniteBathSpec>(s.bath);
    const std::size_t total = s.system.dim() * spec.dim();
    const std::size_t cap = oracle_dim_cap();
    if (total > cap) {
      std::ostringstream msg;
      msg << "system x bath dimension " << total << " exceeds the oracle cap " << cap
          << "; use a smaller bath or raise LF_MAX_DIM";
      throw SizeError(msg.str());
    }
    const Derivation dv = derive(s, coupling_scale);
    const TimescaleReport ts = dv.timescale.value();
    std::vector<double> times;
    if (s.times) {
      times = time_grid(s.times->t_max, s.times->samples);
    } else {
      if (!std::isfinite(ts.t_a_estimate)) {
        throw InputError("times", "no coupling: give an explicit time grid");
      }
      times = time_grid(3.0 * ts.t_a_estimate, 61);
    }
    const DensityMatrix rho0 = initial_state(s, dv.model.h_a);
    PropagationOptions options;
    options.method = s.policy.method;
    options.validity_tol = s.tolerances.propagation;
    const Trajectory lindblad = propagate(rho0, dv.generator, times, options);
    const Trajectory exact =
        exact_oracle(dv.model.h_a_input, *dv.model.raw_bath, dv.model.a_ops, rho0, times, cap);

    const std::size_t d = dv.generator.dim;
    std::ostringstream csv;
    csv << "time,trace_distance";
    for (std::size_t i = 0; i < d; ++i) {
      csv << ",lindblad_p" << i;
    }
    for (std::size_t i = 0; i < d; ++i) {
      csv << ",oracle_p" << i;
    }
    csv << '\n';
    double worst = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double td = trace_distance(lindblad.states[k], exact.states[k]);
      worst = std::max(worst, td);
      csv << fmt(times[k]) << ',' << fmt(td);
      for (const auto* traj : {&lindblad, &exact}) {
        for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(d); ++i) {
          csv << ',' << fmt(traj->states[k](i, i).real());
        }
      }
      csv << '\n';
    }
    result.csv = csv.str();
    json report = {{"scenario", s.name},
                   {"coupling_scale", coupling_scale},
                   {"timescale", timescale_json(ts)},
                   {"t_max", times.back()},
                   {"samples", times.size()},
                   {"max_trace_distance", worst},
                   {"broadening", std::get<FiniteBath>(dv.model.bath).broadening()}};
    result.text = report.dump(2) + "\n";
  } catch (const std::exception& e) {
    result.exit_code = exit_code_for(e);
    result.error = error_record(e);
  }
  return result;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const SizeError*>(&e)) {
    return kExitResourceCap;
  }
  if (dynamic_cast<const PropagationError*>(&e)) {
    return kExitInvariantFailure;
  }
  if (dynamic_cast<const InputError*>(&e) || dynamic_cast<const StructuralError*>(&e) ||
      dynamic_cast<const DomainError*>(&e) || dynamic_cast<const ContractViolation*>(&e)) {
    return kExitInputError;
  }
  return kExitInvariantFailure;
}

std::string error_record(const std::exception& e) {
  json err = {{"message", e.what()}};
  if (const auto* le = dynamic_cast<const Error*>(&e)) {
    err["kind"] = le->kind();
  } else {
    err["kind"] = "internal";
  }
  if (const auto* ie = dynamic_cast<const InputError*>(&e)) {
    err["field"] = ie->field();
  }
  if (const auto* pe = dynamic_cast<const PropagationError*>(&e)) {
    err["time"] = pe->time();
    err["min_eigenvalue"] = pe->defect();
  }
  if (const auto* psd = dynamic_cast<const PsdViolation*>(&e)) {
    err["omega"] = psd->omega();
    err["min_eigenvalue"] = psd->min_eigenvalue();
  }
  return json{{"error", err}}.dump();
}

}  // namespace lindform
