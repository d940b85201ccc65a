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

// lindform: derive, propagate and check master equations from scenario files.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "lindform/commands.hpp"
#include "lindform/scenario.hpp"

namespace {

using lindform::CommandOutput;

bool write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  out << contents;
  return static_cast<bool>(out);
}

int emit(const CommandOutput& result, const std::string& out_path, const std::string& csv_path) {
  if (!result.error.empty()) {
    std::cerr << result.error << '\n';
  }
  if (!result.text.empty()) {
    if (out_path.empty()) {
      std::cout << result.text;
    } else if (!write_file(out_path, result.text)) {
      std::cerr << R"({"error":{"kind":"io","message":"cannot write )" << out_path << "\"}}\n";
      return lindform::kExitInputError;
    }
  }
  if (!result.csv.empty()) {
    if (csv_path.empty()) {
      std::cout << result.csv;
    } else if (!write_file(csv_path, result.csv)) {
      std::cerr << R"({"error":{"kind":"io","message":"cannot write )" << csv_path << "\"}}\n";
      return lindform::kExitInputError;
    }
  }
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Derive, propagate and validate Lindblad master equations"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_path;
  std::string csv_path;
  std::optional<std::string> method_name;
  double coupling_scale = 1.0;

  auto* derive = app.add_subcommand("derive", "Build the generator and print the JSON report");
  derive->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  derive->add_option("--out", out_path, "Write the report here instead of stdout");

  auto* evolve = app.add_subcommand("evolve", "Propagate the initial state and print a CSV trajectory");
  evolve->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  evolve->add_option("--method", method_name, "Integrator")
      ->check(CLI::IsMember({"auto", "expm", "rk4"}));
  evolve->add_option("--out", out_path, "Write the CSV here instead of stdout");

  auto* verify = app.add_subcommand("verify", "Run the invariant battery");
  verify->add_option("scenario", scenario_path, "Scenario JSON file")->required();

  auto* oracle = app.add_subcommand("oracle", "Compare against exact system+bath evolution");
  oracle->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  oracle->add_option("--coupling-scale", coupling_scale, "Multiply every coupling by this factor");
  oracle->add_option("--out", csv_path, "Write the comparison CSV here instead of stdout");
  oracle->add_option("--report", out_path, "Write the JSON report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : lindform::kExitInputError;
  }

  const auto mode = verify->parsed() ? lindform::LoadMode::kLenient : lindform::LoadMode::kStrict;
  std::optional<lindform::Scenario> scenario;
  try {
    scenario = lindform::load_scenario(scenario_path, mode);
  } catch (const std::exception& e) {
    std::cerr << lindform::error_record(e) << '\n';
    return lindform::exit_code_for(e);
  }

  if (derive->parsed()) {
    return emit(lindform::cmd_derive(*scenario), out_path, {});
  }
  if (evolve->parsed()) {
    std::optional<lindform::Method> method;
    if (method_name) {
      static const std::map<std::string, lindform::Method> kMethods = {
          {"auto", lindform::Method::kAuto},
          {"expm", lindform::Method::kExpm},
          {"rk4", lindform::Method::kRk4}};
      method = kMethods.at(*method_name);
    }
    return emit(lindform::cmd_evolve(*scenario, method), out_path, {});
  }
  if (verify->parsed()) {
    return emit(lindform::cmd_verify(*scenario), {}, {});
  }
  return emit(lindform::cmd_oracle(*scenario, coupling_scale), out_path, csv_path);
}
