#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bellvol/membership.hpp"
#include "bellvol/scenario.hpp"

namespace bellvol {

// INI layout:
//   [run]        scenario, samples, seed, output_dir, workers
//   [sampler]    burn_in, thinning
//   [membership] targets, vstar, gate
//   [solver]     tolerance, max_iterations
struct RunConfig {
  BellScenario scenario{2, 2};
  std::int64_t n_samples = 10000;
  std::uint64_t seed = 1;
  int burn_in = 1000;
  int thinning = 5;
  std::vector<TargetSet> targets{TargetSet{}};
  // Targets whose v* is always solved for; others may be settled by inclusion.
  std::vector<TargetSet> vstar_targets;
  std::optional<TargetSet> mes_gate;
  std::string output_dir = "bellvol-out";
  // 0 = hardware concurrency.
  int workers = 0;
  double solver_tolerance = 1e-8;
  int max_iterations = 200;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

// Missing keys keep their defaults; unknown keys and bad values throw ConfigError.
RunConfig read_config(std::istream& is);
void write_config(std::ostream& os, const RunConfig& c);
RunConfig load_config(const std::string& path);

// BELLVOL_WORKERS overrides the configured count.
int resolve_workers(const RunConfig& c);

}  // namespace bellvol
