/* Copyright 2026 The wcnorm Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// wcnorm: gradient checks, toy GAN training, ablations and timing.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "wcnorm/version.hpp"
#include "wcnorm_cli/commands.hpp"

int main(int argc, char** argv) {
  using namespace wcnorm::cli;
  CLI::App app{"Whitening-and-coloring batch normalization toolkit", "wcnorm"};
  app.set_version_flag("--version", std::string(wcnorm::kVersion));
  app.require_subcommand(1);

  GradcheckOptions gc;
  std::string gc_variant;
  auto* gradcheck = app.add_subcommand("gradcheck", "Compare analytic and numeric gradients");
  gradcheck->add_option("--variant", gc_variant, "Single variant to check (default: all)");
  gradcheck->add_option("--d", gc.d, "Channels")->check(CLI::PositiveNumber);
  gradcheck->add_option("--m", gc.m, "Batch size")->check(CLI::Range(2, 1 << 20));
  gradcheck->add_option("--n-classes", gc.n_classes, "Classes")->check(CLI::PositiveNumber);
  gradcheck->add_option("--tolerance", gc.tolerance, "Maximum relative error")
      ->check(CLI::PositiveNumber);
  gradcheck->add_option("--seed", gc.seed, "Problem seed");

  TrainOptions tr;
  std::uint64_t tr_seed = 0;
  std::string tr_out;
  auto* train = app.add_subcommand("train", "Train a toy GAN from a JSON config");
  train->add_option("--config", tr.config, "Config file")->required();
  auto* tr_seed_opt = train->add_option("--seed", tr_seed, "Override the config seed");
  auto* tr_out_opt = train->add_option("--out", tr_out, "Run directory");

  AblateOptions ab;
  ab.threads = thread_cap();
  auto* ablate = app.add_subcommand("ablate", "Train every variant over several seeds");
  ablate->add_option("--config", ab.config, "Ablation config file")->required();
  ablate->add_option("--out", ab.out, "Output directory");

  BenchOptions bn;
  auto* bench = app.add_subcommand("bench", "Time Cholesky and ZCA whitening");
  bench->add_option("--sizes", bn.sizes, "Channel counts")->check(CLI::PositiveNumber);
  bench->add_option("--m", bn.m, "Batch size")->check(CLI::Range(2, 1 << 20));
  bench->add_option("--repeat", bn.repeat, "Timed repetitions")->check(CLI::PositiveNumber);
  bench->add_option("--seed", bn.seed, "Data seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadConfig;
  }

  try {
    if (*gradcheck) {
      if (!gc_variant.empty()) gc.variant = gc_variant;
      return cmd_gradcheck(gc, std::cout);
    }
    if (*train) {
      if (*tr_seed_opt) tr.seed = tr_seed;
      if (*tr_out_opt) tr.out = tr_out;
      return cmd_train(tr, std::cout, std::cerr);
    }
    if (*ablate) return cmd_ablate(ab, std::cout, std::cerr);
    if (*bench) return cmd_bench(bn, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
