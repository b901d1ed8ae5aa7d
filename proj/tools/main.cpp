// Copyright 2026 The HSC Authors.
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

// hsc: classify enterprises into a sector taxonomy and estimate emissions.
//
// Exit codes: 0 success, 1 usage, 2 data validation, 3 runtime.

#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

namespace {

int run(int argc, char** argv) {
  CLI::App app{"Hierarchical sector classification and emission estimates"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  hsc::cli::Overrides o;
  app.add_option("--config", config_path, "Run config (JSON)");
  app.add_option("--seed", o.seed, "Root seed for every stochastic step");
  app.add_option("--out", o.out, "Output directory");
  app.add_option("--mode", o.mode, "Search mode")
      ->check(CLI::IsMember({"flat", "group"}));
  app.add_option("--k", o.k, "Beam width");
  app.add_option("--topn", o.topn, "Ranked leaves to keep per query");
  app.add_option("--threads", o.threads, "Worker threads for classification");
  app.add_flag("--no-timing", o.no_timing,
               "Leave timing columns empty so outputs are byte-identical");

  auto* validate = app.add_subcommand("validate", "Parse and cross-check all inputs");
  auto* train = app.add_subcommand("train", "Train per-level adapters");
  auto* classify = app.add_subcommand("classify", "Rank leaf codes per enterprise");
  auto* eval = app.add_subcommand("eval", "Accuracy, beam sweep and ablation");
  bool no_ablation = false;
  eval->add_flag("--no-ablation", no_ablation, "Skip the ablation table");
  auto* estimate = app.add_subcommand("estimate", "Emission estimates and MAPE");
  hsc::cli::EstimateOptions est;
  estimate->add_option("--codes", est.codes_from,
                       "Where codes come from: classify or labels")
      ->check(CLI::IsMember({"classify", "labels"}));
  estimate->add_option("--audit", est.audit, "Case table to audit");
  estimate->add_option("--stated-mape", est.stated_mape,
                       "Published aggregate MAPE to compare against");
  auto* theorem = app.add_subcommand("theorem-check",
                                     "Entropy and cost grid for uniform trees");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (theorem->parsed()) {
    return hsc::cli::cmd_theorem_check(o.k.value_or(1), o.out.value_or("out"),
                                       std::cout);
  }

  hsc::cli::RunConfig config;
  if (!config_path.empty()) {
    config = hsc::cli::load_config(config_path);
  } else if (!estimate->parsed() || !est.audit) {
    std::cerr << "hsc: --config is required\n";
    return 1;
  }
  hsc::cli::apply_overrides(config, o);

  if (validate->parsed()) return hsc::cli::cmd_validate(config, std::cout);
  if (train->parsed()) return hsc::cli::cmd_train(config, std::cout);
  if (classify->parsed()) return hsc::cli::cmd_classify(config, std::cout);
  if (eval->parsed()) return hsc::cli::cmd_eval(config, !no_ablation, std::cout);
  return hsc::cli::cmd_estimate(config, est, std::cout);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const hsc::ValidationError& e) {
    std::cerr << "hsc: invalid input: " << e.what() << '\n';
    return 2;
  } catch (const hsc::RuntimeError& e) {
    std::cerr << "hsc: runtime error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "hsc: usage: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "hsc: runtime error: " << e.what() << '\n';
    return 3;
  }
}
