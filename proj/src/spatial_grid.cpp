// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
#include "rigidtraj/spatial_grid.hpp"

#include <algorithm>
#include <cmath>

namespace rigidtraj {

namespace {
// Packs three signed cell coordinates into 21 bits each (collision-free for
// cells within +-2^20 of the origin, i.e. hundreds of kilometers at any
// sensible cell size) and avalanches for bucket spread.
inline uint64_t mix_key(int64_t cx, int64_t cy, int64_t cz) {
  constexpr uint64_t mask = (uint64_t{1} << 21) - 1;
  uint64_t h = (static_cast<uint64_t>(cx) & mask) |
               ((static_cast<uint64_t>(cy) & mask) << 21) |
               ((static_cast<uint64_t>(cz) & mask) << 42);
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebULL;
  h ^= h >> 31;
  return h;
}
}  // namespace

VoxelGrid::VoxelGrid(const kernels::PointsSoA& points, double cell,
                     bool build_dilated_occupancy)
    : points_(&points), cell_(cell) {
  cells_.reserve(points.size());
  for (size_t i = 0; i < points.size(); ++i) {
    int64_t cx, cy, cz;
    cell_coords(points.point(i), cx, cy, cz);
    cells_[key(cx, cy, cz)].push_back(static_cast<int32_t>(i));
  }
  if (build_dilated_occupancy) {
    dilated_.reserve(cells_.size() * 27);
    for (size_t i = 0; i < points.size(); ++i) {
      int64_t cx, cy, cz;
      cell_coords(points.point(i), cx, cy, cz);
      for (int dx = -1; dx <= 1; ++dx) {
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dz = -1; dz <= 1; ++dz) {
            dilated_.insert(key(cx + dx, cy + dy, cz + dz));
          }
        }
      }
    }
    has_dilated_ = true;
  }
}

uint64_t VoxelGrid::key(int64_t cx, int64_t cy, int64_t cz) const {
  return mix_key(cx, cy, cz);
}

void VoxelGrid::cell_coords(const Vec3& p, int64_t& cx, int64_t& cy,
                            int64_t& cz) const {
  cx = static_cast<int64_t>(std::floor(p.x() / cell_));
  cy = static_cast<int64_t>(std::floor(p.y() / cell_));
  cz = static_cast<int64_t>(std::floor(p.z() / cell_));
}

bool VoxelGrid::any_within(const Vec3& p, double radius) const {
  int64_t cx, cy, cz;
  cell_coords(p, cx, cy, cz);
  if (has_dilated_ && dilated_.find(key(cx, cy, cz)) == dilated_.end()) {
    return false;
  }
  const double r2 = radius * radius;
  const double px = p.x(), py = p.y(), pz = p.z();
  for (int dx = -1; dx <= 1; ++dx) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dz = -1; dz <= 1; ++dz) {
        auto it = cells_.find(key(cx + dx, cy + dy, cz + dz));
        if (it == cells_.end()) continue;
        for (int32_t i : it->second) {
          const double ddx = points_->x[i] - px;
          const double ddy = points_->y[i] - py;
          const double ddz = points_->z[i] - pz;
          if (((ddx * ddx) + (ddy * ddy)) + (ddz * ddz) <= r2) {
            return true;
          }
        }
      }
    }
  }
  return false;
}

void VoxelGrid::neighbors_within(const Vec3& p, double radius,
                                 std::vector<int>& out) const {
  out.clear();
  int64_t cx, cy, cz;
  cell_coords(p, cx, cy, cz);
  scratch_.x.clear();
  scratch_.y.clear();
  scratch_.z.clear();
  scratch_idx_.clear();
  for (int dx = -1; dx <= 1; ++dx) {
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dz = -1; dz <= 1; ++dz) {
        auto it = cells_.find(key(cx + dx, cy + dy, cz + dz));
        if (it == cells_.end()) continue;
        for (int32_t i : it->second) {
          scratch_.push_back(points_->point(i));
          scratch_idx_.push_back(i);
        }
      }
    }
  }
  const size_t n = scratch_.size();
  scratch_d2_.resize(n);
  if (n > 0) {
    kernels::squared_distances(p, scratch_, scratch_d2_.data());
  }
  const double r2 = radius * radius;
  for (size_t k = 0; k < n; ++k) {
    if (scratch_d2_[k] <= r2) {
      out.push_back(scratch_idx_[k]);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
}

}  // namespace rigidtraj
