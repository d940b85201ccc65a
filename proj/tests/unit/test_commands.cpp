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
#include <json.hpp>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "lindform/commands.hpp"
#include "lindform/error.hpp"

using namespace lindform;
using nlohmann::json;

namespace {

const double kGamma = 0.1;
const double kTemperature = 0.5;

std::string two_level(const std::string& extra_bath = "", const std::string& coupling =
                                                             "[[[0,0],[1,0]],[[1,0],[0,0]]]") {
  return R"({
    "name": "two-level",
    "system": {"hamiltonian": [[[0,0],[0,0]],[[0,0],[1,0]]]},
    "bath": {"type": "analytic", "model": "flat-thermal", "gamma": 0.1, "temperature": )" +
         (extra_bath.empty() ? std::string("0.5") : extra_bath) + R"(},
    "couplings": [{"A": )" + coupling + R"(}],
    "initial_state": "excited",
    "times": {"t_max": 200, "samples": 41},
    "policy": {"method": "expm"}
  })";
}

std::vector<std::vector<double>> parse_csv(const std::string& text, std::vector<std::string>& header) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  header.clear();
  {
    std::istringstream h(line);
    std::string cell;
    while (std::getline(h, cell, ',')) header.push_back(cell);
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::istringstream r(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(r, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  FAIL("missing column " << name);
  return 0;
}

const json* find_check(const json& report, const std::string& name) {
  for (const auto& c : report["checks"]) {
    if (c["name"] == name) return &c;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("derive: two-level flat-thermal report") {
  const CommandOutput out = cmd_derive(parse_scenario(two_level()));
  CHECK(out.exit_code == kExitOk);
  const json r = json::parse(out.text);
  CHECK(r["bohr_frequencies"] == json::array({-1.0, 0.0, 1.0}));
  CHECK(r["free_evolution"] == false);
  const double nbar = 1.0 / std::expm1(1.0 / kTemperature);
  bool saw_down = false, saw_up = false;
  for (const auto& t : r["spectral_matrices"]) {
    const double g = t["gamma"][0][0][0];
    if (t["omega"] == 1.0) {
      CHECK(g == doctest::Approx(kGamma * (nbar + 1)));
      saw_down = true;
    }
    if (t["omega"] == -1.0) {
      CHECK(g == doctest::Approx(kGamma * nbar));
      saw_up = true;
    }
  }
  CHECK(saw_down);
  CHECK(saw_up);
  const auto& terms = r["eigenoperators"][0]["terms"];
  REQUIRE(terms.size() == 2);
  CHECK(terms[1]["omega"] == 1.0);
  CHECK(terms[1]["operator"][0][1] == json::array({1.0, 0.0}));  // sigma_minus = |g><e|
  CHECK(terms[1]["operator"][1][0] == json::array({0.0, 0.0}));
  CHECK(r.contains("h_ls"));
  for (const auto& c : r["checks"]) {
    CHECK_MESSAGE(c["status"] != "fail", c.dump());
  }
}

TEST_CASE("derive: zero coupling and degenerate multiplets") {
  const CommandOutput zero = cmd_derive(parse_scenario(two_level("", "[[[0,0],[0,0]],[[0,0],[0,0]]]")));
  CHECK(zero.exit_code == kExitOk);
  const json z = json::parse(zero.text);
  CHECK(z["free_evolution"] == true);
  CHECK(z["spectral_matrices"].empty());

  const char* degenerate = R"({
    "name": "degenerate",
    "system": {"eigenvalues": [0, 0, 1]},
    "bath": {"type": "analytic", "model": "flat-thermal", "gamma": 0.2, "temperature": 1},
    "couplings": [{"A": [[[0,0],[0,0],[1,0]],[[0,0],[0,0],[0.5,0]],[[1,0],[0.5,0],[0,0]]]}],
    "initial_state": "maximally-mixed"
  })";
  const CommandOutput d = cmd_derive(parse_scenario(degenerate));
  CHECK(d.exit_code == kExitOk);
  const json r = json::parse(d.text);
  REQUIRE(r["spectrum"]["multiplets"].size() == 2);
  CHECK(r["spectrum"]["multiplets"][0]["degeneracy"] == 2);
  CHECK(r["spectrum"]["multiplets"][1]["degeneracy"] == 1);
}

TEST_CASE("evolve: decay, constant trajectory, detailed balance") {
  // Zero temperature: pure decay at rate gamma.
  const CommandOutput cold = cmd_evolve(parse_scenario(two_level("0")));
  REQUIRE(cold.exit_code == kExitOk);
  std::vector<std::string> header;
  const auto rows = parse_csv(cold.text, header);
  CHECK(header.front() == "time");
  CHECK(header[1] == "re_00");
  CHECK(header[2] == "im_00");
  CHECK(header[3] == "re_01");
  CHECK(header[header.size() - 2] == "trace_defect");
  CHECK(header.back() == "min_eigenvalue");
  REQUIRE(rows.size() == 41);
  const std::size_t ee = column(header, "re_11");
  for (const auto& row : rows) {
    CHECK(std::abs(row[ee] - std::exp(-kGamma * row[0])) < 1e-8);
  }

  const CommandOutput zero = cmd_evolve(parse_scenario(two_level("", "[[[0,0],[0,0]],[[0,0],[0,0]]]")));
  const auto zrows = parse_csv(zero.text, header);
  for (const auto& row : zrows) {
    CHECK(std::abs(row[ee] - 1.0) < 1e-12);
  }

  // t_max = 20 / gamma at finite temperature.
  const CommandOutput hot = cmd_evolve(parse_scenario(two_level()));
  const auto hrows = parse_csv(hot.text, header);
  const auto& last = hrows.back();
  CHECK(last[0] == doctest::Approx(20.0 / kGamma));
  const double ratio = last[column(header, "re_11")] / last[column(header, "re_00")];
  CHECK(std::abs(ratio - std::exp(-1.0 / kTemperature)) < 1e-4);
}

TEST_CASE("evolve output is deterministic") {
  const Scenario s = parse_scenario(two_level());
  for (Method m : {Method::kExpm, Method::kRk4}) {
    CHECK(cmd_evolve(s, m).text == cmd_evolve(s, m).text);
  }
}

TEST_CASE("evolve without times is an input error") {
  Scenario s = parse_scenario(two_level());
  s.times.reset();
  const CommandOutput out = cmd_evolve(s);
  CHECK(out.exit_code == kExitInputError);
  const json e = json::parse(out.error);
  CHECK(e["error"]["kind"] == "input");
  CHECK(e["error"]["field"] == "times");
}

TEST_CASE("verify: thermal scenario passes, corrupted table fails") {
  const CommandOutput ok = cmd_verify(parse_scenario(two_level()));
  CHECK(ok.exit_code == kExitOk);
  CHECK(json::parse(ok.text)["summary"]["fail"] == 0);

  const char* corrupted = R"({
    "name": "corrupted",
    "system": {"eigenvalues": [0, 1]},
    "bath": {"type": "analytic", "model": "table", "entries": [
      {"omega": 1, "gamma": [[[0.2,0],[0,0.3]],[[0,0.3],[0.1,0]]]},
      {"omega": -1, "gamma": [[[0.05,0],[0,0]],[[0,0],[0.02,0]]]},
      {"omega": 0, "gamma": [[[0,0],[0,0]],[[0,0],[0,0]]]}]},
    "couplings": [{"A": [[[0,0],[1,0]],[[1,0],[0,0]]]},
                  {"A": [[[0,0],[0,-1]],[[0,1],[0,0]]]}],
    "initial_state": "excited"
  })";
  CHECK_THROWS_AS(parse_scenario(corrupted), InputError);
  const CommandOutput bad = cmd_verify(parse_scenario(corrupted, LoadMode::kLenient));
  CHECK(bad.exit_code == kExitInvariantFailure);
  const json r = json::parse(bad.text);
  const json* item = find_check(r, "bath.gamma_hermitian");
  REQUIRE(item != nullptr);
  CHECK((*item)["status"] == "fail");
  // Gamma_01 = 0.3i and Gamma_10 = 0.3i: |Gamma_01 - conj(Gamma_10)| = 0.6.
  CHECK((*item)["defect"].get<double>() == doctest::Approx(0.6));
}

TEST_CASE("verify: presecular with a tiny coarse-graining time") {
  std::string s = two_level();
  s.replace(s.find(R"("policy": {"method": "expm"})"), 28,
            R"("policy": {"mode": "presecular", "dt": 0.01})");
  const CommandOutput out = cmd_verify(parse_scenario(s));
  const json r = json::parse(out.text);
  CHECK((*find_check(r, "generator.trace_preservation"))["status"] == "pass");
  CHECK((*find_check(r, "generator.hermiticity_preservation"))["status"] == "pass");
}

TEST_CASE("oracle: zero coupling gives zero trace distance") {
  const char* zero = R"({
    "name": "oracle-zero",
    "system": {"eigenvalues": [0, 1]},
    "bath": {"type": "finite", "modes": [{"frequency": 0.8, "coupling": 0}, {"frequency": 1.2, "coupling": 0}],
             "temperature": 1},
    "couplings": [{"A": [[[0,0],[1,0]],[[1,0],[0,0]]], "X": "modes"}],
    "initial_state": {"matrix": [[[0.5,0],[0.3,0.1]],[[0.3,-0.1],[0.5,0]]]},
    "times": {"t_max": 5, "samples": 11}
  })";
  const CommandOutput out = cmd_oracle(parse_scenario(zero));
  REQUIRE(out.exit_code == kExitOk);
  std::vector<std::string> header;
  const auto rows = parse_csv(out.csv, header);
  REQUIRE(rows.size() == 11);
  for (const auto& row : rows) {
    CHECK(row[column(header, "trace_distance")] < 1e-12);
  }
  const json r = json::parse(out.text);
  CHECK(r["timescale"]["verdict"] == "pass");
}

TEST_CASE("oracle needs a finite bath and honours the size cap") {
  const CommandOutput analytic = cmd_oracle(parse_scenario(two_level()));
  CHECK(analytic.exit_code == kExitInputError);

  std::string modes;
  for (int k = 0; k < 10; ++k) {
    modes += std::string(k ? "," : "") + R"({"frequency": )" + std::to_string(0.5 + 0.1 * k) +
             R"(, "coupling": 0.01})";
  }
  const std::string big = R"({
    "name": "big",
    "system": {"eigenvalues": [0, 1]},
    "bath": {"type": "finite", "modes": [)" + modes + R"(], "temperature": 1},
    "couplings": [{"A": [[[0,0],[1,0]],[[1,0],[0,0]]], "X": "modes"}],
    "initial_state": "excited"
  })";
  const CommandOutput capped = cmd_oracle(parse_scenario(big));
  CHECK(capped.exit_code == kExitResourceCap);
  CHECK(json::parse(capped.error)["error"]["kind"] == "size");
}

TEST_CASE("exit codes and error records") {
  CHECK(exit_code_for(InputError("x", "bad")) == kExitInputError);
  CHECK(exit_code_for(StructuralError("bad")) == kExitInputError);
  CHECK(exit_code_for(DomainError("bad")) == kExitInputError);
  CHECK(exit_code_for(ContractViolation("bad")) == kExitInputError);
  CHECK(exit_code_for(SizeError("big")) == kExitResourceCap);
  CHECK(exit_code_for(PropagationError("neg", 1.5, -0.1)) == kExitInvariantFailure);
  const json e = json::parse(error_record(PsdViolation("psd", -1.0, -0.2)));
  CHECK(e["error"]["omega"] == -1.0);
  CHECK(e["error"]["min_eigenvalue"] == -0.2);
}
