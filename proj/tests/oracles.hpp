// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
// Independent brute-force reference implementations used as test oracles.
// These deliberately share no code with the library paths they check.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rigidtraj/core.hpp"
#include "rigidtraj/geometry.hpp"
#include "rigidtraj/ingest.hpp"
#include "rigidtraj/rng.hpp"

namespace oracles {

using rigidtraj::Mat3;
using rigidtraj::Vec3;

/// O(n^2) DBSCAN with the same conventions as the library: closed balls,
/// self-inclusive counts, clusters numbered by smallest core index, border
/// points to the lowest label in range.
inline std::vector<int> dbscan_bruteforce(const std::vector<Vec3>& pts,
                                          double eps, int min_pts) {
  const int n = static_cast<int>(pts.size());
  std::vector<std::vector<int>> nbrs(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if ((pts[i] - pts[j]).norm() <= eps) nbrs[i].push_back(j);
    }
  }
  std::vector<bool> core(n);
  for (int i = 0; i < n; ++i) {
    core[i] = static_cast<int>(nbrs[i].size()) >= min_pts;
  }
  std::vector<int> labels(n, -1);
  int next = 0;
  for (int i = 0; i < n; ++i) {
    if (!core[i] || labels[i] >= 0) continue;
    // flood fill over density-connected cores
    labels[i] = next;
    std::vector<int> stack = {i};
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v : nbrs[u]) {
        if (core[v] && labels[v] < 0) {
          labels[v] = next;
          stack.push_back(v);
        }
      }
    }
    ++next;
  }
  for (int i = 0; i < n; ++i) {
    if (core[i]) continue;
    int best = -1;
    for (int j : nbrs[i]) {
      if (core[j] && (best < 0 || labels[j] < best)) best = labels[j];
    }
    labels[i] = best;
  }
  return labels;
}

/// True iff two labelings describe the same partition with noise preserved.
inline bool same_partition(const std::vector<int>& a,
                           const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::vector<std::pair<int, int>> mapping;
  for (size_t i = 0; i < a.size(); ++i) {
    if ((a[i] < 0) != (b[i] < 0)) return false;
    if (a[i] < 0) continue;
    bool found = false;
    for (const auto& [x, y] : mapping) {
      if (x == a[i] || y == b[i]) {
        if (x != a[i] || y != b[i]) return false;
        found = true;
        break;
      }
    }
    if (!found) mapping.emplace_back(a[i], b[i]);
  }
  return true;
}

/// Pixel-by-pixel erosion by a Euclidean disk.
inline rigidtraj::ingest::Bitmap erode_bruteforce(
    const rigidtraj::ingest::Bitmap& in, int radius) {
  rigidtraj::ingest::Bitmap out(in.width, in.height);
  for (int y = 0; y < in.height; ++y) {
    for (int x = 0; x < in.width; ++x) {
      if (!in.at(x, y)) continue;
      bool keep = true;
      for (int dy = -radius; dy <= radius && keep; ++dy) {
        for (int dx = -radius; dx <= radius && keep; ++dx) {
          if (dx * dx + dy * dy > radius * radius) continue;
          if (!in.at(x + dx, y + dy)) keep = false;
        }
      }
      if (keep) out.set(x, y, true);
    }
  }
  return out;
}

/// Exhaustive assignment oracle: maximize matched pairs under the threshold,
/// then minimize total distance. Feasible only for small inputs.
inline std::pair<int, double> assignment_bruteforce(
    const std::vector<Vec3>& gt, const std::vector<Vec3>& pred,
    double threshold) {
  const int ng = static_cast<int>(gt.size());
  const int np = static_cast<int>(pred.size());
  std::vector<int> perm(np);
  std::iota(perm.begin(), perm.end(), 0);
  int best_matches = 0;
  double best_cost = 0.0;
  // iterate over injective maps gt -> pred by permuting pred and taking
  // prefixes; with optional skipping via subsets of gt
  std::vector<int> idx(ng);
  std::iota(idx.begin(), idx.end(), 0);
  // enumerate subsets of gt that get matched
  for (int mask = 0; mask < (1 << ng); ++mask) {
    std::vector<int> chosen;
    for (int i = 0; i < ng; ++i) {
      if (mask & (1 << i)) chosen.push_back(i);
    }
    if (static_cast<int>(chosen.size()) > np) continue;
    std::vector<int> p(perm);
    std::sort(p.begin(), p.end());
    do {
      double cost = 0.0;
      bool ok = true;
      for (size_t k = 0; k < chosen.size(); ++k) {
        const double d = (gt[chosen[k]] - pred[p[k]]).norm();
        if (d > threshold) {
          ok = false;
          break;
        }
        cost += d;
      }
      if (ok) {
        const int matches = static_cast<int>(chosen.size());
        if (matches > best_matches ||
            (matches == best_matches && cost < best_cost)) {
          best_matches = matches;
          best_cost = cost;
        }
      }
    } while (std::next_permutation(p.begin(), p.end()));
  }
  return {best_matches, best_cost};
}

/// Uniform-ish random rotation from a normal 3-vector axis-angle.
inline Mat3 random_rotation(rigidtraj::Rng& rng, double max_angle = M_PI * 0.9) {
  Vec3 axis(rng.normal(), rng.normal(), rng.normal());
  if (axis.norm() < 1e-9) axis = Vec3::UnitX();
  axis.normalize();
  const double angle = rng.uniform(0.0, max_angle);
  return rigidtraj::geom::so3_exp(axis * angle);
}

inline rigidtraj::geom::Pose random_pose(rigidtraj::Rng& rng,
                                         double trans_scale = 10.0,
                                         double max_angle = M_PI * 0.9) {
  return rigidtraj::geom::Pose(
      random_rotation(rng, max_angle),
      Vec3(rng.uniform(-trans_scale, trans_scale),
           rng.uniform(-trans_scale, trans_scale),
           rng.uniform(-trans_scale, trans_scale)));
}

}  // namespace oracles
