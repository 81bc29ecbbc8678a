#pragma once

#include <string>
#include <vector>

#include "specshare/env.hpp"
#include "specshare/harness.hpp"
#include "specshare/train.hpp"

namespace specshare {

// JSON run configuration:
//   {"env": {...}, "train": {..., "policy": {...}},
//    "experiment_defaults": {...}, "experiments": [{...}, ...]}
// Every section is optional; unknown keys are rejected. Experiment fields given as arrays
// expand into the cartesian product of their values (test_seeds is always a plain list).
struct RunConfig {
  EnvConfig env;
  TrainConfig train;
  std::vector<ExperimentSpec> experiments;

  SweepPlan plan() const { return {env, train, experiments}; }
};

RunConfig parse_run_config(const std::string& text, const std::string& source = "<string>");
RunConfig load_run_config(const std::string& path);

EnvConfig load_env_config(const std::string& path);

}  // namespace specshare
