// Copyright 2026 The mgnn Authors.
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

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mgnn/config.hpp"
#include "mgnn/experiment.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed_override;
  std::optional<std::string> out;
  std::optional<mgnn::Index> jobs;
};

void add_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed-override", flags.seed_override, "run this single seed instead of the config's seeds");
  cmd->add_option("--out", flags.out, "output directory (overrides MGNN_OUT_DIR and the config)");
  cmd->add_option("--jobs", flags.jobs, "seeds run in parallel")->check(CLI::Range(mgnn::Index{1}, mgnn::Index{4096}));
}

int execute(const CommonFlags& flags, std::optional<mgnn::Mode> mode) {
  try {
    auto config = mgnn::load_config(flags.config);
    mgnn::RunOptions options{flags.seed_override, flags.out, flags.jobs, mode};
    auto report = mgnn::run_experiment(std::move(config), options, std::cout);
    std::cout << "wrote " << (report.out_dir / "summary.json").string() << "\n";
    return 0;
  } catch (const mgnn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mgnn: multiscale graph neural network training"};
  app.set_version_flag("--version", MGNN_VERSION);
  app.require_subcommand(1);

  CommonFlags flags;
  auto* run = app.add_subcommand("run", "run the config's mode for every seed");
  auto* inspect = app.add_subcommand("inspect", "per-level node, edge and loss-gap statistics of the plan");
  auto* theorem = app.add_subcommand("theorem", "least-squares coarsening bound trials");
  auto* flops = app.add_subcommand("flops", "analytic FLOPs of the schedule against the fine baseline");
  for (auto* cmd : {run, inspect, theorem, flops}) add_flags(cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (run->parsed()) return execute(flags, std::nullopt);
  if (inspect->parsed()) return execute(flags, mgnn::Mode::CoarsenInspect);
  if (theorem->parsed()) return execute(flags, mgnn::Mode::Theorem);
  return execute(flags, mgnn::Mode::Flops);
}
