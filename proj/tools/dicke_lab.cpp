// Copyright 2026 The Dicke Lab Authors
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

// dicke_lab: command-line front end for the experiment pipelines.
//
// Exit status: 0 success, 2 configuration error, 3 numerical failure,
// 4 resource cap exceeded.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "dicke/pipeline.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitResource = 4;

int exit_code(dicke::ErrorKind kind) {
  using dicke::ErrorKind;
  switch (kind) {
    case ErrorKind::kConfigError:
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kIndexOutOfRange:
    case ErrorKind::kSiteOutOfRange:
    case ErrorKind::kEmptySelection:
    case ErrorKind::kSubsystemTooLarge:
    case ErrorKind::kInvalidTruncation:
    case ErrorKind::kIOError:
      return kExitConfig;
    case ErrorKind::kDimensionCapExceeded:
    case ErrorKind::kResourceLimit:
      return kExitResource;
    default:
      return kExitNumeric;
  }
}

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  sub->add_option("--seed", o.seed, "override the configured seed");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--threads", o.threads, "worker threads (0: all cores)");
}

void report(const dicke::RunManifest& m) {
  for (const auto& w : m.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << m.command << ": wrote " << m.files.size() << " files";
  for (const auto& [name, t] : m.timings_s)
    if (name == "total") std::cout << " in " << dicke::fmt(t) << " s";
  std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonuniform Dicke-model simulation pipelines"};
  app.require_subcommand(1);
  Options opts;
  CLI::App* modes = app.add_subcommand("modes", "crystal equilibrium and transverse mode table");
  CLI::App* evolve = app.add_subcommand("evolve", "site-averaged Pauli series with the echo sequence");
  CLI::App* dist = app.add_subcommand("distributions", "total-spin histograms, exact and sampled");
  CLI::App* entropy = app.add_subcommand("entropy", "subsystem entropies from simulated tomography");
  CLI::App* engineered = app.add_subcommand("engineered", "pair entropies under an engineered mode pattern");
  for (CLI::App* sub : {modes, evolve, dist, entropy, engineered}) add_common(sub, opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    dicke::RunConfig cfg = dicke::load_run_config(opts.config);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.out) cfg.output_dir = *opts.out;
    if (opts.threads) cfg.threads = *opts.threads;
    if (modes->parsed()) report(dicke::cmd_modes(cfg).manifest);
    if (evolve->parsed()) report(dicke::cmd_evolve(cfg).manifest);
    if (dist->parsed()) report(dicke::cmd_distributions(cfg).manifest);
    if (entropy->parsed()) report(dicke::cmd_entropy(cfg).manifest);
    if (engineered->parsed()) report(dicke::cmd_engineered(cfg).manifest);
  } catch (const dicke::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::bad_alloc&) {
    std::cerr << "error: out of memory\n";
    return kExitResource;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return 0;
}
