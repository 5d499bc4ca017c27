// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "rigidtraj/core.hpp"
#include "rigidtraj/geometry.hpp"
#include "rigidtraj/ingest.hpp"

namespace rigidtraj::synth {

struct ObjectSpec {
  int id = 1;
  Vec3 box_dims = Vec3(4.2, 1.9, 1.5);  // length, width, height (m)
  // Surface density must support the clustering gate: ~600 points on this
  // box is ~17 points/m^2, comfortably above min_pts=10 within eps=0.5.
  int point_count = 600;
  double spawn_yaw = 0.0;
  Vec3 spawn_position = Vec3(20.0, 0.0, 1.5);
  /// Per-step profiles; a single entry is broadcast to all steps.
  std::vector<double> speeds = {8.0};
  std::vector<double> curvatures = {0.0};
  double min_visible_fraction = 0.65;
};

struct CorruptionSpec {
  double point_sigma = 0.0;       // m, additive position noise
  double dropout_prob = 0.0;      // whole-frame observation dropout
  double outlier_frame_prob = 0.0;
  double outlier_shift = 5.0;     // m, displacement of gross-outlier frames
  double descriptor_sigma = 0.0;  // descriptor noise before re-normalization
};

struct ScenarioConfig {
  uint64_t seed = 0;
  int frame_count = 50;
  double dt = 0.1;
  int descriptor_dim = 16;
  int background_points = 0;
  Vec3 sensor_origin = Vec3(0.0, 0.0, 2.0);
  ingest::CameraModel camera;  // default_camera() unless configured
  std::vector<ObjectSpec> objects;
  CorruptionSpec noise;

  ScenarioConfig();

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Wide-FOV forward camera at (0, 0, 1.6) looking along world +x.
ingest::CameraModel default_camera();

struct ObjectTruth {
  int id = 0;
  Vec3 box_dims = Vec3::Zero();
  std::vector<geom::Pose> poses;       // one per frame
  std::vector<double> speeds;          // per step (frame_count - 1)
  std::vector<double> curvatures;      // per step
  std::vector<Vec3> canonical_points;  // object frame, box surface
  std::vector<VecX> descriptors;       // distinct unit vectors
  std::vector<bool> dropped;           // per frame
  std::vector<bool> outlier;           // per frame (displaced observation)
  int full_visibility_frame = 0;       // frame kept fully visible
};

struct SyntheticFrame {
  ingest::LidarFrame lidar;
  std::vector<ingest::InstanceMask> masks;
  std::vector<int> truth_labels;  // per point: object id, 0 for background
};

struct Scenario {
  ScenarioConfig config;
  std::vector<ObjectTruth> objects;
  std::vector<SyntheticFrame> frames;
};

/// Deterministic generation: trajectories integrated with the CT motion
/// model, box-surface point clouds with distinct descriptors, per-frame
/// angular-sector occlusion, masks from dilated point projections, and the
/// configured corruption. Identical configs produce identical scenarios.
Scenario generate(const ScenarioConfig& config);

/// Writes the sequence directory (meta.json, frames/, gt/) consumed by the
/// pipeline and by evaluation. Byte-identical given the same scenario.
void emit(const Scenario& scenario, const std::filesystem::path& dir);

}  // namespace rigidtraj::synth
