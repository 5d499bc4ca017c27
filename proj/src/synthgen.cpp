// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
#include "rigidtraj/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rigidtraj/ctsmooth.hpp"
#include "rigidtraj/io.hpp"
#include "rigidtraj/rng.hpp"

namespace rigidtraj::synth {

namespace {
// Seed stream tags, one namespace per sampling purpose.
constexpr uint64_t kTagObject = 0x01;
constexpr uint64_t kTagFrame = 0x02;
constexpr uint64_t kTagBackground = 0x03;
}  // namespace

ingest::CameraModel default_camera() {
  ingest::CameraModel cam;
  cam.width = 640;
  cam.height = 400;
  cam.intrinsics << 420.0, 0.0, 320.0,
                    0.0, 420.0, 200.0,
                    0.0, 0.0, 1.0;
  // Sensor frame: z forward (+x world), x right (-y world), y down (-z world).
  Mat3 r_cw;
  r_cw << 0.0, -1.0, 0.0,
          0.0, 0.0, -1.0,
          1.0, 0.0, 0.0;
  const Vec3 center(0.0, 0.0, 1.6);
  cam.extrinsic = geom::Pose(r_cw, -(r_cw * center));
  return cam;
}

ScenarioConfig::ScenarioConfig() : camera(default_camera()) {}

void ScenarioConfig::validate() const {
  if (frame_count < 1) throw ConfigError("frame_count must be >= 1");
  if (dt <= 0.0) throw ConfigError("dt must be > 0");
  if (descriptor_dim < 4) throw ConfigError("descriptor_dim must be >= 4");
  if (background_points < 0) {
    throw ConfigError("background_points must be >= 0");
  }
  auto check_prob = [](double p, const char* field) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConfigError(std::string(field) + " must be in [0, 1]");
    }
  };
  check_prob(noise.dropout_prob, "noise.dropout_prob");
  check_prob(noise.outlier_frame_prob, "noise.outlier_frame_prob");
  if (noise.point_sigma < 0.0) throw ConfigError("noise.point_sigma must be >= 0");
  if (noise.descriptor_sigma < 0.0) {
    throw ConfigError("noise.descriptor_sigma must be >= 0");
  }
  if (noise.outlier_shift < 0.0) {
    throw ConfigError("noise.outlier_shift must be >= 0");
  }
  camera.validate();
  for (const auto& obj : objects) {
    if (obj.id <= 0) throw ConfigError("objects[].id must be positive");
    if (obj.point_count < 10) {
      throw ConfigError("objects[].point_count must be >= 10");
    }
    if ((obj.box_dims.array() <= 0.0).any()) {
      throw ConfigError("objects[].box must have positive dimensions");
    }
    if (obj.speeds.empty() || obj.curvatures.empty()) {
      throw ConfigError("objects[].speed and curvature profiles must be non-empty");
    }
    if (!(obj.min_visible_fraction > 0.0 && obj.min_visible_fraction <= 1.0)) {
      throw ConfigError("objects[].min_visible_fraction must be in (0, 1]");
    }
  }
  for (size_t i = 0; i < objects.size(); ++i) {
    for (size_t j = i + 1; j < objects.size(); ++j) {
      if (objects[i].id == objects[j].id) {
        throw ConfigError("objects[].id values must be unique");
      }
    }
  }
}

namespace {

double profile_at(const std::vector<double>& profile, int step) {
  if (profile.size() == 1) return profile.front();
  return profile[std::min<size_t>(step, profile.size() - 1)];
}

/// Uniform sample on the box surface, faces weighted by area.
Vec3 sample_box_surface(const Vec3& dims, Rng& rng) {
  const double lx = dims.x(), ly = dims.y(), lz = dims.z();
  const double area_x = ly * lz;  // +-x faces
  const double area_y = lx * lz;
  const double area_z = lx * ly;
  const double total = 2.0 * (area_x + area_y + area_z);
  double pick = rng.uniform01() * total;
  const double u = rng.uniform01() - 0.5;
  const double v = rng.uniform01() - 0.5;
  const double side = rng.uniform01() < 0.5 ? -0.5 : 0.5;
  if (pick < 2.0 * area_x) {
    return Vec3(side * lx, u * ly, v * lz);
  }
  pick -= 2.0 * area_x;
  if (pick < 2.0 * area_y) {
    return Vec3(u * lx, side * ly, v * lz);
  }
  return Vec3(u * lx, v * ly, side * lz);
}

/// Distinct unit descriptor: rejection-sampled so pairwise cosine stays
/// below 0.7, keeping nearest-descriptor matching unambiguous at the 0.8
/// similarity gate even under moderate descriptor noise.
VecX sample_descriptor(int dim, const std::vector<VecX>& existing, Rng& rng) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    VecX d(dim);
    for (int k = 0; k < dim; ++k) d(k) = rng.normal();
    const double n = d.norm();
    if (n < 1e-9) continue;
    d /= n;
    bool ok = true;
    for (const auto& e : existing) {
      if (d.dot(e) > 0.7) {
        ok = false;
        break;
      }
    }
    if (ok) return d;
  }
  throw Error("descriptor sampling failed; descriptor_dim too small for point count");
}

VecX corrupt_descriptor(const VecX& d, double sigma, Rng& rng) {
  if (sigma <= 0.0) return d;
  VecX out = d;
  for (int k = 0; k < out.size(); ++k) out(k) += sigma * rng.normal();
  const double n = out.norm();
  if (n < 1e-9) return d;
  return out / n;
}

}  // namespace

Scenario generate(const ScenarioConfig& config) {
  config.validate();
  Scenario scenario;
  scenario.config = config;

  // Ground truth per object.
  for (const auto& spec : config.objects) {
    ObjectTruth truth;
    truth.id = spec.id;
    truth.box_dims = spec.box_dims;

    Rng obj_rng(derive_seed(config.seed, kTagObject, spec.id));

    geom::Pose pose(geom::rot_z(spec.spawn_yaw).rotation(),
                    spec.spawn_position);
    truth.poses.push_back(pose);
    for (int k = 0; k + 1 < config.frame_count; ++k) {
      const double v = profile_at(spec.speeds, k);
      const double kappa = profile_at(spec.curvatures, k);
      truth.speeds.push_back(v);
      truth.curvatures.push_back(kappa);
      pose = ct::ct_predict(pose, v, kappa, config.dt);
      truth.poses.push_back(pose);
    }

    truth.canonical_points.reserve(spec.point_count);
    truth.descriptors.reserve(spec.point_count);
    for (int i = 0; i < spec.point_count; ++i) {
      truth.canonical_points.push_back(
          sample_box_surface(spec.box_dims, obj_rng));
      truth.descriptors.push_back(sample_descriptor(
          config.descriptor_dim, truth.descriptors, obj_rng));
    }

    truth.full_visibility_frame =
        static_cast<int>(obj_rng.bounded(config.frame_count));
    truth.dropped.assign(config.frame_count, false);
    truth.outlier.assign(config.frame_count, false);
    for (int k = 0; k < config.frame_count; ++k) {
      if (k == truth.full_visibility_frame) continue;  // always kept clean
      if (obj_rng.uniform01() < config.noise.dropout_prob) {
        truth.dropped[k] = true;
      } else if (obj_rng.uniform01() < config.noise.outlier_frame_prob) {
        truth.outlier[k] = true;
      }
    }
    scenario.objects.push_back(std::move(truth));
  }

  // Per-frame observations.
  const int mask_dilation = 6;
  std::vector<std::pair<int, int>> dilation_disk;
  for (int dy = -mask_dilation; dy <= mask_dilation; ++dy) {
    for (int dx = -mask_dilation; dx <= mask_dilation; ++dx) {
      if (dx * dx + dy * dy <= mask_dilation * mask_dilation) {
        dilation_disk.emplace_back(dx, dy);
      }
    }
  }

  for (int k = 0; k < config.frame_count; ++k) {
    SyntheticFrame frame;
    frame.lidar.timestamp = k * config.dt;
    frame.lidar.sensor_origin = config.sensor_origin;

    for (const auto& truth : scenario.objects) {
      if (truth.dropped[k]) continue;
      Rng rng(derive_seed(config.seed, kTagFrame,
                          static_cast<uint64_t>(truth.id) * 100000 + k));

      geom::Pose obs_pose = truth.poses[k];
      if (truth.outlier[k]) {
        const double angle = rng.uniform(0.0, 2.0 * M_PI);
        obs_pose = geom::Pose(
            obs_pose.rotation(),
            obs_pose.translation() + config.noise.outlier_shift *
                                         Vec3(std::cos(angle),
                                              std::sin(angle), 0.0));
      }

      // Visible subset: a contiguous angular sector about the object z axis;
      // one frame per object stays fully visible so the canonical anchor sees
      // the whole surface.
      double sector_start = 0.0, sector_span = 2.0 * M_PI;
      if (k != truth.full_visibility_frame) {
        const auto& spec = *std::find_if(
            config.objects.begin(), config.objects.end(),
            [&](const ObjectSpec& s) { return s.id == truth.id; });
        sector_start = rng.uniform(0.0, 2.0 * M_PI);
        sector_span =
            2.0 * M_PI * rng.uniform(spec.min_visible_fraction, 1.0);
      }

      ingest::Bitmap bitmap(config.camera.width, config.camera.height);
      bool any_pixel = false;
      for (size_t i = 0; i < truth.canonical_points.size(); ++i) {
        const Vec3& q = truth.canonical_points[i];
        if (sector_span < 2.0 * M_PI) {
          double az = std::atan2(q.y(), q.x()) - sector_start;
          az -= 2.0 * M_PI * std::floor(az / (2.0 * M_PI));
          if (az > sector_span) continue;
        }
        Vec3 p = obs_pose.apply(q);
        if (config.noise.point_sigma > 0.0) {
          p += config.noise.point_sigma *
               Vec3(rng.normal(), rng.normal(), rng.normal());
        }
        frame.lidar.points.push_back(p);
        frame.lidar.descriptors.push_back(corrupt_descriptor(
            truth.descriptors[i], config.noise.descriptor_sigma, rng));
        frame.truth_labels.push_back(truth.id);

        double u, v, depth;
        if (config.camera.project(p, u, v, depth)) {
          const int px = static_cast<int>(std::floor(u));
          const int py = static_cast<int>(std::floor(v));
          for (const auto& [dx, dy] : dilation_disk) {
            const int x = px + dx, y = py + dy;
            if (x >= 0 && x < bitmap.width && y >= 0 && y < bitmap.height) {
              bitmap.set(x, y, true);
              any_pixel = true;
            }
          }
        }
      }
      if (any_pixel) {
        ingest::InstanceMask mask;
        mask.instance_id = truth.id;
        mask.class_label = "car";
        mask.frame_time = frame.lidar.timestamp;
        mask.bitmap = std::move(bitmap);
        frame.masks.push_back(std::move(mask));
      }
    }

    if (config.background_points > 0) {
      Rng rng(derive_seed(config.seed, kTagBackground, k));
      for (int i = 0; i < config.background_points; ++i) {
        const double x = rng.uniform(8.0, 75.0);
        const double y = rng.uniform(-0.6 * x, 0.6 * x);
        const double z = rng.uniform(0.0, 0.15);
        frame.lidar.points.emplace_back(x, y, z);
        VecX d(config.descriptor_dim);
        for (int c = 0; c < config.descriptor_dim; ++c) d(c) = rng.normal();
        const double n = d.norm();
        frame.lidar.descriptors.push_back(n > 1e-9 ? VecX(d / n)
                                                   : VecX(VecX::Unit(
                                                         config.descriptor_dim,
                                                         0)));
        frame.truth_labels.push_back(0);
      }
    }

    scenario.frames.push_back(std::move(frame));
  }
  return scenario;
}

void emit(const Scenario& scenario, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  io::SequenceMeta meta;
  meta.dt = scenario.config.dt;
  meta.frame_count = scenario.config.frame_count;
  meta.seed = scenario.config.seed;
  meta.descriptor_dim = scenario.config.descriptor_dim;
  meta.camera = scenario.config.camera;
  io::write_sequence_meta(dir, meta);

  for (int k = 0; k < scenario.config.frame_count; ++k) {
    io::SequenceFrame frame;
    frame.lidar = scenario.frames[k].lidar;
    frame.masks = scenario.frames[k].masks;
    io::write_sequence_frame(dir, k, frame);
  }

  // Ground-truth trajectories and the combined tracks file for evaluation.
  std::vector<io::TrackSeries> tracks;
  for (const auto& truth : scenario.objects) {
    io::TrajectoryFile traj;
    traj.instance_id = truth.id;
    traj.kind = "ground_truth";
    io::TrackSeries series;
    series.instance_id = truth.id;
    for (int k = 0; k < scenario.config.frame_count; ++k) {
      io::TrajectoryStateRecord s;
      s.t = scenario.frames[k].lidar.timestamp;
      s.pose = truth.poses[k];
      if (k + 1 < scenario.config.frame_count) {
        s.speed = truth.speeds[k];
        s.curvature = truth.curvatures[k];
      }
      traj.states.push_back(s);
      series.states.emplace_back(s.t, truth.poses[k].translation());
    }
    char name[40];
    std::snprintf(name, sizeof(name), "trajectory_%06d.json", truth.id);
    io::write_trajectory(dir / "gt" / name, traj);
    tracks.push_back(std::move(series));
  }
  io::write_tracks(dir / "gt" / "tracks.json", tracks);
}

}  // namespace rigidtraj::synth
