// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <filesystem>
#include <vector>

#include "rigidtraj/config.hpp"
#include "rigidtraj/ctsmooth.hpp"
#include "rigidtraj/io.hpp"
#include "rigidtraj/registration.hpp"

namespace rigidtraj {

struct SequenceData {
  io::SequenceMeta meta;
  std::vector<io::SequenceFrame> frames;  // chronological
};

SequenceData load_sequence(const std::filesystem::path& dir);

struct InstanceResult {
  int instance_id = 0;
  reg::MeasuredTrajectory measured;
  ct::SmoothedTrajectory smoothed;
  bool is_static = false;
  bool all_measurements_rejected = false;
  /// Timestamps whose observation was dropped because DBSCAN left only noise.
  std::vector<double> dropped_observation_times;
};

struct RunOutput {
  std::vector<double> grid_times;
  std::vector<InstanceResult> instances;  // ascending instance id
};

/// lift -> cluster -> register -> classify/smooth for every instance in the
/// sequence. Instances run on a worker pool; results are deterministic for a
/// fixed seed regardless of the worker count.
RunOutput run_pipeline(const SequenceData& sequence,
                       const PipelineConfig& config);

/// Registration only: measured trajectories, no smoothing.
RunOutput run_registration(const SequenceData& sequence,
                           const PipelineConfig& config);

/// Per-instance measured + smoothed trajectory files, the combined predicted
/// tracks file, a machine-readable summary, and a trajectory plot.
void write_run_outputs(const std::filesystem::path& out_dir,
                       const RunOutput& output, const PipelineConfig& config);

}  // namespace rigidtraj
