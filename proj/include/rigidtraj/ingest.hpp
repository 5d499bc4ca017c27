// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rigidtraj/core.hpp"
#include "rigidtraj/geometry.hpp"

namespace rigidtraj::ingest {

/// Calibrated pinhole camera. `extrinsic` maps world coordinates into the
/// sensor frame (z forward, x right, y down).
struct CameraModel {
  Mat3 intrinsics = Mat3::Identity();
  geom::Pose extrinsic;
  int width = 0;
  int height = 0;

  /// Throws Error unless focal lengths are positive and the principal point
  /// lies inside the image.
  void validate() const;

  /// Projects a world point. Returns false when the point is behind the
  /// camera (depth <= 0); u/v are pixel coordinates, depth the camera-frame z.
  bool project(const Vec3& world_point, double& u, double& v,
               double& depth) const;
};

struct Bitmap {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> data;  // row-major, one byte per pixel

  Bitmap() = default;
  Bitmap(int w, int h) : width(w), height(h), data(size_t(w) * h, 0) {}

  bool at(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height &&
           data[size_t(y) * width + x] != 0;
  }
  void set(int x, int y, bool v) {
    data[size_t(y) * width + x] = v ? 1 : 0;
  }
  size_t count() const;
};

/// One instance's 2D segmentation in one frame. Instance id 0 is reserved for
/// the static background and never appears here.
struct InstanceMask {
  int instance_id = 0;
  std::string class_label;
  double frame_time = 0.0;
  Bitmap bitmap;
};

/// One lidar sweep with per-point descriptors (unit L2 norm). Descriptors are
/// pipeline inputs; the toolkit never runs feature extraction itself.
struct LidarFrame {
  double timestamp = 0.0;
  Vec3 sensor_origin = Vec3::Zero();
  std::vector<Vec3> points;  // world frame
  std::vector<VecX> descriptors;
};

struct InstanceObservation {
  int instance_id = 0;
  double timestamp = 0.0;
  std::vector<Vec3> points;  // world frame
  std::vector<VecX> descriptors;
};

/// Morphological erosion by a discrete Euclidean disk (dx^2 + dy^2 <= r^2).
/// Pixels whose disk leaves the image erode away; the result is always a
/// subset of the input.
InstanceMask erode_mask(const InstanceMask& mask, int radius = 3);
Bitmap erode_bitmap(const Bitmap& bitmap, int radius);

/// Lifts lidar points into labeled instance observations. A point joins
/// instance z iff it is within max_range of the sensor origin, has positive
/// camera depth, and its projection falls inside z's eroded mask. Points
/// matched by no mask are background and are dropped. When masks overlap the
/// lowest instance id wins. Masks must share one frame time.
std::vector<InstanceObservation> lift_instance_points(
    const LidarFrame& frame, const std::vector<InstanceMask>& masks,
    const CameraModel& camera, double max_range = 80.0,
    int erosion_radius = 3);

/// Classic DBSCAN. Neighborhoods are closed balls (<= eps) and include the
/// point itself in the min_pts count. Returns one label per point, -1 for
/// noise; cluster ids are numbered by ascending smallest core index, and
/// border points attach to the lowest-labeled cluster in range.
std::vector<int> dbscan(const std::vector<Vec3>& points, double eps = 0.5,
                        int min_pts = 10);

/// Keeps only the most populous non-noise cluster (ties -> lowest label).
/// Returns nullopt when every point is noise, signaling the caller to drop
/// this frame's observation.
std::optional<InstanceObservation> keep_largest_cluster(
    const InstanceObservation& obs, double eps = 0.5, int min_pts = 10);

}  // namespace rigidtraj::ingest
