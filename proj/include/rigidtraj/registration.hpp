// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "rigidtraj/core.hpp"
#include "rigidtraj/geometry.hpp"
#include "rigidtraj/ingest.hpp"

namespace rigidtraj::reg {

/// An instance's canonical model: the densest frame's points, re-centered at
/// the axis-aligned bounding-box midpoint c_z, growing as later frames merge
/// in. The canonical frame is axis-aligned (init pose rotation is identity).
struct CanonicalInstance {
  int instance_id = 0;
  std::vector<Vec3> points;  // canonical frame
  std::vector<VecX> descriptors;
  double t_init = 0.0;
  geom::Pose init_pose;  // (I, c_z)
  Vec3 box_center = Vec3::Zero();
};

struct Measurement {
  geom::Pose pose;  // world-from-canonical at this timestamp
  double fitness = 0.0;
};

struct MeasuredTrajectory {
  int instance_id = 0;
  double t_init = 0.0;
  std::map<double, Measurement> measurements;
  std::vector<Vec3> canonical_points;  // merged canonical set
  std::vector<VecX> canonical_descriptors;
  /// Timestamps whose registration failed (gaps for the smoother).
  std::vector<double> failed_times;
};

struct Correspondence {
  int source_index = -1;
  int target_index = -1;
  double similarity = 0.0;
};

struct RansacParams {
  int iterations = 100000;
  double min_similarity = 0.8;
  double fitness_radius = 0.1;
  double fitness_threshold = 0.5;
  int max_points = 5000;
  uint64_t seed = 0;
};

enum class RegFailure { NoMatches, BelowFitness, DegenerateAllIterations };

struct RegistrationResult {
  bool ok = false;
  geom::Pose pose;  // world-from-canonical (valid when ok)
  double fitness = 0.0;
  int inliers = 0;
  RegFailure failure = RegFailure::NoMatches;
};

const char* to_string(RegFailure f);

/// Picks the densest observation (ties -> earliest timestamp) as the
/// canonical anchor and re-centers its points at the AABB midpoint.
CanonicalInstance init_canonical(
    const std::vector<ingest::InstanceObservation>& observations);

/// For every target descriptor, its best source descriptor by cosine
/// similarity (descriptors must be unit-normalized, so the dot product is the
/// cosine). Matches with similarity <= min_sim are discarded (strict
/// inequality). An empty result means no usable correspondences.
std::vector<Correspondence> match_features(
    const std::vector<VecX>& source_descriptors,
    const std::vector<VecX>& target_descriptors, double min_sim = 0.8);

/// Fraction of target points whose nearest source neighbor, after mapping the
/// target into the source frame by pose.inverse(), lies within radius
/// (inclusive).
double fitness(const std::vector<Vec3>& source_points,
               const std::vector<Vec3>& target_points, const geom::Pose& pose,
               double radius = 0.1);

/// RANSAC rigid registration of an observation onto the canonical set. Both
/// clouds are subsampled to at most max_points (seeded); each iteration fits
/// a 3-correspondence rigid hypothesis and scores it by the number of target
/// points within fitness_radius of a source point. The best hypothesis is
/// refit on its inlier correspondences and accepted iff fitness >
/// fitness_threshold. Deterministic given the seed.
RegistrationResult ransac_register(const CanonicalInstance& source,
                                   const ingest::InstanceObservation& target,
                                   const RansacParams& params);

/// Full per-instance trajectory: canonical init, then remaining frames
/// registered in descending point count (ties -> earlier timestamp), with
/// successful frames merged back into the canonical set. Failed frames
/// become gaps.
MeasuredTrajectory build_trajectory(
    const std::vector<ingest::InstanceObservation>& observations,
    const RansacParams& params);

}  // namespace rigidtraj::reg
