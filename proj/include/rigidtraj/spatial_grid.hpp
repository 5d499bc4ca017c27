// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rigidtraj/core.hpp"
#include "rigidtraj/kernels.hpp"

namespace rigidtraj {

/// Uniform voxel hash over a fixed point set, built for exact radius queries
/// with radius <= cell size. A query only has to inspect the 3x3x3 cell
/// neighborhood, and every candidate is distance-checked, so results are
/// exact (inclusive boundary) regardless of hashing.
class VoxelGrid {
 public:
  /// cell must be >= the largest radius that will be queried.
  VoxelGrid(const kernels::PointsSoA& points, double cell,
            bool build_dilated_occupancy = false);

  /// True iff some point lies within `radius` (<=) of p. When the dilated
  /// occupancy set was built, misses cost a single hash probe.
  bool any_within(const Vec3& p, double radius) const;

  /// Indices of all points within `radius` (<=) of p, ascending.
  void neighbors_within(const Vec3& p, double radius,
                        std::vector<int>& out) const;

  size_t size() const { return points_->size(); }
  double cell() const { return cell_; }

 private:
  uint64_t key(int64_t cx, int64_t cy, int64_t cz) const;
  void cell_coords(const Vec3& p, int64_t& cx, int64_t& cy, int64_t& cz) const;

  const kernels::PointsSoA* points_;
  double cell_;
  std::unordered_map<uint64_t, std::vector<int32_t>> cells_;
  std::unordered_set<uint64_t> dilated_;
  bool has_dilated_ = false;
  mutable kernels::PointsSoA scratch_;
  mutable std::vector<double> scratch_d2_;
  mutable std::vector<int32_t> scratch_idx_;
};

}  // namespace rigidtraj
