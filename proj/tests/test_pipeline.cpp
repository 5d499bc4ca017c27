// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
// Library-level integration tests of the full lift -> cluster -> register ->
// smooth chain on in-memory synthetic scenarios.
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "rigidtraj/pipeline.hpp"
#include "rigidtraj/synthgen.hpp"

using namespace rigidtraj;

namespace {

SequenceData to_sequence(const synth::Scenario& scenario) {
  SequenceData data;
  data.meta.dt = scenario.config.dt;
  data.meta.frame_count = scenario.config.frame_count;
  data.meta.seed = scenario.config.seed;
  data.meta.descriptor_dim = scenario.config.descriptor_dim;
  data.meta.camera = scenario.config.camera;
  for (const auto& f : scenario.frames) {
    data.frames.push_back({f.lidar, f.masks});
  }
  return data;
}

PipelineConfig fast_config() {
  PipelineConfig config;
  config.ransac_iterations = 8000;
  config.workers = 1;
  config.seed = 17;
  return config;
}

}  // namespace

TEST_CASE("pipeline: clean two-object scenario tracks ground truth") {
  // trajectories stay several meters apart at all times; the clustering
  // stage cannot separate instances whose point clouds touch
  synth::ScenarioConfig sc;
  sc.seed = 21;
  sc.frame_count = 30;
  sc.dt = 0.1;
  sc.background_points = 150;
  synth::ObjectSpec a;
  a.id = 1;
  a.spawn_position = Vec3(14, -5, 1.5);
  a.spawn_yaw = 0.03;
  a.speeds = {8.0};
  a.curvatures = {0.0};
  synth::ObjectSpec b;
  b.id = 2;
  b.point_count = 550;
  b.spawn_position = Vec3(20, 5, 1.4);
  b.speeds = {6.0};
  b.curvatures = {-0.01};
  sc.objects = {a, b};
  sc.noise.point_sigma = 0.01;
  const auto scenario = synth::generate(sc);

  const auto output = run_pipeline(to_sequence(scenario), fast_config());
  REQUIRE(output.instances.size() == 2);
  for (size_t k = 0; k < 2; ++k) {
    const auto& result = output.instances[k];
    const auto& truth = scenario.objects[k];
    CHECK(result.instance_id == truth.id);
    CHECK_FALSE(result.is_static);
    CHECK(result.measured.failed_times.empty());
    CHECK(result.smoothed.rejected_times.empty());
    REQUIRE(result.smoothed.states.size() == size_t(sc.frame_count));
    double worst = 0.0;
    for (int i = 0; i < sc.frame_count; ++i) {
      worst = std::max(worst, (result.smoothed.states.poses[i].translation() -
                               truth.poses[i].translation())
                                  .norm());
    }
    CHECK(worst < 0.1);
  }
}

TEST_CASE("pipeline: gross-outlier frames are rejected by the smoother") {
  synth::ScenarioConfig sc;
  sc.seed = 99;
  sc.frame_count = 40;
  sc.dt = 0.1;
  sc.background_points = 150;
  synth::ObjectSpec obj;
  obj.id = 1;
  obj.spawn_position = Vec3(15, -2, 1.5);
  obj.speeds = {8.0};
  obj.curvatures = {0.01};
  sc.objects = {obj};
  sc.noise.point_sigma = 0.01;
  sc.noise.outlier_frame_prob = 0.08;
  sc.noise.outlier_shift = 5.0;
  const auto scenario = synth::generate(sc);
  const auto& truth = scenario.objects[0];
  int n_outliers = 0;
  for (bool o : truth.outlier) n_outliers += o;
  REQUIRE(n_outliers > 0);

  const auto output = run_pipeline(to_sequence(scenario), fast_config());
  REQUIRE(output.instances.size() == 1);
  const auto& result = output.instances[0];

  // expected rejections: outlier frames whose registration produced a
  // measurement
  std::vector<double> expected;
  for (int k = 0; k < sc.frame_count; ++k) {
    const double t = scenario.frames[k].lidar.timestamp;
    if (truth.outlier[k] && result.measured.measurements.count(t) > 0) {
      expected.push_back(t);
    }
  }
  CHECK(result.smoothed.rejected_times == expected);

  double worst = 0.0;
  for (int i = 0; i < sc.frame_count; ++i) {
    worst = std::max(worst, (result.smoothed.states.poses[i].translation() -
                             truth.poses[i].translation())
                                .norm());
  }
  CHECK(worst < 0.1);
}

TEST_CASE("pipeline: sub-meter mover is converted to static") {
  synth::ScenarioConfig sc;
  sc.seed = 4;
  sc.frame_count = 20;
  sc.dt = 0.1;
  synth::ObjectSpec obj;
  obj.id = 3;
  obj.spawn_position = Vec3(18, 1, 1.5);
  obj.speeds = {0.2};  // 0.38 m over the sequence
  sc.objects = {obj};
  const auto scenario = synth::generate(sc);

  const auto output = run_pipeline(to_sequence(scenario), fast_config());
  REQUIRE(output.instances.size() == 1);
  CHECK(output.instances[0].is_static);
  CHECK(output.instances[0].smoothed.is_static);
  const auto& poses = output.instances[0].smoothed.states.poses;
  for (const auto& p : poses) {
    CHECK((p.translation() - poses.front().translation()).norm() == 0.0);
  }
}
