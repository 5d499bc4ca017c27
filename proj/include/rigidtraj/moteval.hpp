// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <vector>

#include "rigidtraj/core.hpp"

namespace rigidtraj::mot {

struct TrackEntry {
  int track_id = 0;
  Vec3 position = Vec3::Zero();
};

struct TrackFrame {
  double timestamp = 0.0;
  std::vector<TrackEntry> entries;  // track ids unique within a frame
};

struct Assignment {
  /// (gt index, pred index) pairs, all with distance <= threshold.
  std::vector<std::pair<int, int>> pairs;
  double total_distance = 0.0;
};

/// Maximum-cardinality, then minimum-total-distance one-to-one assignment
/// among pairs with Euclidean distance <= threshold (Hungarian algorithm
/// with pairs above the threshold modeled as forbidden edges).
Assignment hungarian_match(const std::vector<Vec3>& gt,
                           const std::vector<Vec3>& pred, double threshold);

struct ThresholdMetrics {
  double threshold = 0.0;
  long frames = 0;
  long objects = 0;      // ground-truth appearances
  long predictions = 0;  // predicted appearances
  long matches = 0;      // matched gt-pred pairs (switch events included)
  long switches = 0;
  long false_positives = 0;
  long false_negatives = 0;
  double mota = 0.0;
  double motp = 0.0;
  double recall = 0.0;
  double precision = 0.0;
};

struct TrackingReport {
  std::vector<ThresholdMetrics> per_threshold;
  bool empty_ground_truth = false;  // MOTA undefined when set
};

/// MOTA = 1 - (FP + FN + Switches) / Objects.
double mota_from_counts(long objects, long fp, long fn, long switches);

/// CLEAR-MOT evaluation over time-aligned frames. A ground-truth object keeps
/// its previous partner while it stays within the threshold; the remainder is
/// assigned per frame by the Hungarian algorithm. A switch is counted when a
/// ground-truth identity is matched to a different predicted identity than
/// its most recent match. Throws Error on prediction timestamps missing from
/// the ground truth.
TrackingReport evaluate(const std::vector<TrackFrame>& gt,
                        const std::vector<TrackFrame>& pred,
                        const std::vector<double>& thresholds);

}  // namespace rigidtraj::mot
