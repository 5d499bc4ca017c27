// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
#include "rigidtraj/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "rigidtraj/spatial_grid.hpp"

namespace rigidtraj::ingest {

void CameraModel::validate() const {
  if (intrinsics(0, 0) <= 0.0 || intrinsics(1, 1) <= 0.0) {
    throw Error("camera: focal lengths must be positive");
  }
  const double cx = intrinsics(0, 2);
  const double cy = intrinsics(1, 2);
  if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height) {
    throw Error("camera: principal point outside image");
  }
  if (width <= 0 || height <= 0) {
    throw Error("camera: image size must be positive");
  }
}

bool CameraModel::project(const Vec3& world_point, double& u, double& v,
                          double& depth) const {
  const Vec3 cam = extrinsic.apply(world_point);
  depth = cam.z();
  if (depth <= 0.0) return false;
  const Vec3 pix = intrinsics * cam;
  u = pix.x() / pix.z();
  v = pix.y() / pix.z();
  return true;
}

size_t Bitmap::count() const {
  size_t n = 0;
  for (uint8_t b : data) n += b != 0;
  return n;
}

Bitmap erode_bitmap(const Bitmap& bitmap, int radius) {
  if (radius <= 0) return bitmap;
  // Disk offsets once; radius is small (3 by default).
  std::vector<std::pair<int, int>> disk;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy <= radius * radius) disk.emplace_back(dx, dy);
    }
  }
  Bitmap out(bitmap.width, bitmap.height);
  for (int y = 0; y < bitmap.height; ++y) {
    for (int x = 0; x < bitmap.width; ++x) {
      if (!bitmap.at(x, y)) continue;
      bool keep = true;
      for (const auto& [dx, dy] : disk) {
        if (!bitmap.at(x + dx, y + dy)) {  // out of bounds counts as empty
          keep = false;
          break;
        }
      }
      if (keep) out.set(x, y, true);
    }
  }
  return out;
}

InstanceMask erode_mask(const InstanceMask& mask, int radius) {
  InstanceMask out = mask;
  out.bitmap = erode_bitmap(mask.bitmap, radius);
  return out;
}

std::vector<InstanceObservation> lift_instance_points(
    const LidarFrame& frame, const std::vector<InstanceMask>& masks,
    const CameraModel& camera, double max_range, int erosion_radius) {
  camera.validate();
  for (const auto& m : masks) {
    if (m.instance_id <= 0) {
      throw Error("lift: instance id must be positive (0 is background)");
    }
    if (m.frame_time != masks.front().frame_time) {
      throw Error("lift: masks must share one frame time");
    }
  }
  if (frame.points.size() != frame.descriptors.size()) {
    throw Error("lift: points and descriptors must be parallel");
  }

  // Eroded masks in ascending instance id order; the lowest id wins overlaps.
  std::vector<const InstanceMask*> ordered;
  ordered.reserve(masks.size());
  for (const auto& m : masks) ordered.push_back(&m);
  std::sort(ordered.begin(), ordered.end(),
            [](const InstanceMask* a, const InstanceMask* b) {
              return a->instance_id < b->instance_id;
            });
  std::vector<Bitmap> eroded;
  eroded.reserve(ordered.size());
  for (const auto* m : ordered) {
    eroded.push_back(erode_bitmap(m->bitmap, erosion_radius));
  }

  std::vector<InstanceObservation> out(ordered.size());
  for (size_t k = 0; k < ordered.size(); ++k) {
    out[k].instance_id = ordered[k]->instance_id;
    out[k].timestamp = frame.timestamp;
  }

  for (size_t i = 0; i < frame.points.size(); ++i) {
    const Vec3& p = frame.points[i];
    if ((p - frame.sensor_origin).norm() > max_range) continue;
    double u, v, depth;
    if (!camera.project(p, u, v, depth)) continue;
    const int px = static_cast<int>(std::floor(u));
    const int py = static_cast<int>(std::floor(v));
    for (size_t k = 0; k < eroded.size(); ++k) {
      if (eroded[k].at(px, py)) {
        out[k].points.push_back(p);
        out[k].descriptors.push_back(frame.descriptors[i]);
        break;
      }
    }
  }

  std::erase_if(out, [](const InstanceObservation& o) { return o.points.empty(); });
  return out;
}

std::vector<int> dbscan(const std::vector<Vec3>& points, double eps,
                        int min_pts) {
  const int n = static_cast<int>(points.size());
  std::vector<int> labels(n, -1);
  if (n == 0) return labels;
  if (eps <= 0.0 || min_pts < 1) {
    throw Error("dbscan: eps must be > 0 and min_pts >= 1");
  }

  kernels::PointsSoA soa(points);
  VoxelGrid grid(soa, eps);

  std::vector<std::vector<int>> neighbors(n);
  std::vector<bool> core(n, false);
  for (int i = 0; i < n; ++i) {
    grid.neighbors_within(points[i], eps, neighbors[i]);
    core[i] = static_cast<int>(neighbors[i].size()) >= min_pts;
  }

  // Union-find over density-connected core points.
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (int i = 0; i < n; ++i) {
    if (!core[i]) continue;
    for (int j : neighbors[i]) {
      if (core[j]) parent[find(i)] = find(j);
    }
  }

  // Canonical cluster numbering: ascending smallest core index.
  std::vector<int> root_label(n, -1);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    if (!core[i]) continue;
    const int r = find(i);
    if (root_label[r] < 0) root_label[r] = next++;
    labels[i] = root_label[r];
  }

  // Border points: lowest cluster label among in-range cores.
  for (int i = 0; i < n; ++i) {
    if (core[i]) continue;
    int best = -1;
    for (int j : neighbors[i]) {
      if (!core[j]) continue;
      const int lbl = labels[j];
      if (best < 0 || lbl < best) best = lbl;
    }
    labels[i] = best;
  }
  return labels;
}

std::optional<InstanceObservation> keep_largest_cluster(
    const InstanceObservation& obs, double eps, int min_pts) {
  const auto labels = dbscan(obs.points, eps, min_pts);
  int max_label = -1;
  for (int l : labels) max_label = std::max(max_label, l);
  if (max_label < 0) return std::nullopt;

  std::vector<int> sizes(max_label + 1, 0);
  for (int l : labels) {
    if (l >= 0) ++sizes[l];
  }
  int winner = 0;
  for (int l = 1; l <= max_label; ++l) {
    if (sizes[l] > sizes[winner]) winner = l;  // ties keep the lowest label
  }

  InstanceObservation out;
  out.instance_id = obs.instance_id;
  out.timestamp = obs.timestamp;
  for (size_t i = 0; i < obs.points.size(); ++i) {
    if (labels[i] == winner) {
      out.points.push_back(obs.points[i]);
      out.descriptors.push_back(obs.descriptors[i]);
    }
  }
  return out;
}

}  // namespace rigidtraj::ingest
