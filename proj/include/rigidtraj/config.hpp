// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rigidtraj/core.hpp"
#include "rigidtraj/ctsmooth.hpp"
#include "rigidtraj/registration.hpp"
#include "rigidtraj/synthgen.hpp"

namespace rigidtraj {

/// Stage hyperparameters. Defaults are the reference operating point of the
/// pipeline; any field can be overridden through a dotted path.
struct PipelineConfig {
  // ingest
  int erosion_radius = 3;     // px
  double max_range = 80.0;    // m
  double dbscan_eps = 0.5;    // m
  int dbscan_min_pts = 10;
  // registration
  double min_similarity = 0.8;
  int ransac_iterations = 100000;
  double fitness_radius = 0.1;  // m
  double fitness_threshold = 0.5;
  int max_points = 5000;
  // smoothing
  double huber_threshold = 1.0;
  double whitened_cutoff = 1.345;
  int lm_max_iterations = 10;
  double static_displacement = 1.0;  // m
  // evaluation
  std::vector<double> mot_thresholds = {0.5, 1.0, 2.0, 3.0, 5.0, 10.0};

  uint64_t seed = 0;
  int workers = 0;  // 0 = hardware concurrency

  reg::RansacParams ransac_params() const;
  ct::SmootherParams smoother_params() const;
};

/// Applies "--set path=value" style overrides, e.g. "register.iterations".
/// Throws ConfigError naming the path on unknown keys or unparsable values.
void apply_override(PipelineConfig& config, std::string_view path,
                    std::string_view value);

/// Parses "path=value".
void apply_override_expr(PipelineConfig& config, std::string_view expr);

/// Scenario configuration file (JSON) for the generator. Unknown fields and
/// out-of-range values raise ConfigError naming the field.
synth::ScenarioConfig parse_scenario_config(const std::filesystem::path& path);

}  // namespace rigidtraj
