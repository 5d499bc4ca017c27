// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
#include "rigidtraj/registration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rigidtraj/kernels.hpp"
#include "rigidtraj/rng.hpp"
#include "rigidtraj/spatial_grid.hpp"

namespace rigidtraj::reg {

const char* to_string(RegFailure f) {
  switch (f) {
    case RegFailure::NoMatches:
      return "no_matches";
    case RegFailure::BelowFitness:
      return "below_fitness";
    case RegFailure::DegenerateAllIterations:
      return "degenerate_all_iterations";
  }
  return "unknown";
}

CanonicalInstance init_canonical(
    const std::vector<ingest::InstanceObservation>& observations) {
  if (observations.empty()) {
    throw Error("init_canonical: need at least one observation");
  }
  size_t densest = 0;
  for (size_t i = 1; i < observations.size(); ++i) {
    const auto& cand = observations[i];
    const auto& best = observations[densest];
    if (cand.points.size() > best.points.size() ||
        (cand.points.size() == best.points.size() &&
         cand.timestamp < best.timestamp)) {
      densest = i;
    }
  }
  const auto& anchor = observations[densest];
  if (anchor.points.empty()) {
    throw Error("init_canonical: anchor observation has no points");
  }

  Vec3 lo = anchor.points.front();
  Vec3 hi = anchor.points.front();
  for (const auto& p : anchor.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }

  CanonicalInstance out;
  out.instance_id = anchor.instance_id;
  out.t_init = anchor.timestamp;
  out.box_center = 0.5 * (lo + hi);
  out.init_pose = geom::Pose(Mat3::Identity(), out.box_center);
  out.points.reserve(anchor.points.size());
  for (const auto& p : anchor.points) {
    out.points.push_back(p - out.box_center);
  }
  out.descriptors = anchor.descriptors;
  return out;
}

namespace {

/// Packs descriptors row-major; all must share one dimension.
std::vector<double> pack_descriptors(const std::vector<VecX>& descs,
                                     size_t dim) {
  std::vector<double> flat(descs.size() * dim);
  for (size_t i = 0; i < descs.size(); ++i) {
    if (static_cast<size_t>(descs[i].size()) != dim) {
      throw Error("match_features: descriptor dimensions differ");
    }
    for (size_t k = 0; k < dim; ++k) flat[i * dim + k] = descs[i](k);
  }
  return flat;
}

}  // namespace

std::vector<Correspondence> match_features(
    const std::vector<VecX>& source_descriptors,
    const std::vector<VecX>& target_descriptors, double min_sim) {
  std::vector<Correspondence> out;
  if (source_descriptors.empty() || target_descriptors.empty()) return out;
  const size_t dim = source_descriptors.front().size();
  const auto src = pack_descriptors(source_descriptors, dim);
  const auto tgt = pack_descriptors(target_descriptors, dim);

  std::vector<double> best(target_descriptors.size());
  std::vector<int> idx(target_descriptors.size());
  kernels::active_kernels().best_dot(tgt.data(), target_descriptors.size(),
                                     src.data(), source_descriptors.size(),
                                     dim, best.data(), idx.data());
  for (size_t j = 0; j < target_descriptors.size(); ++j) {
    if (best[j] > min_sim) {
      out.push_back({idx[j], static_cast<int>(j), best[j]});
    }
  }
  return out;
}

double fitness(const std::vector<Vec3>& source_points,
               const std::vector<Vec3>& target_points, const geom::Pose& pose,
               double radius) {
  if (source_points.empty() || target_points.empty()) {
    throw Error("fitness: point sets must be non-empty");
  }
  kernels::PointsSoA src(source_points);
  VoxelGrid grid(src, radius, /*build_dilated_occupancy=*/true);
  const geom::Pose inv = pose.inverse();
  size_t inliers = 0;
  for (const auto& p : target_points) {
    if (grid.any_within(inv.apply(p), radius)) ++inliers;
  }
  return static_cast<double>(inliers) / static_cast<double>(target_points.size());
}

namespace {

/// Draws k distinct indices uniformly (partial Fisher-Yates); when k == n the
/// result is a full random permutation, which also randomizes the inlier
/// scan order so the early-bail prefix is representative.
std::vector<int> subsample_indices(size_t n, size_t k, Rng& rng) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  const size_t take = std::min(n, k);
  for (size_t i = 0; i < take; ++i) {
    const size_t j = i + rng.bounded(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(take);
  return idx;
}

struct Cloud {
  std::vector<Vec3> points;
  std::vector<VecX> descriptors;
};

Cloud take(const std::vector<Vec3>& pts, const std::vector<VecX>& descs,
           const std::vector<int>& idx) {
  Cloud c;
  c.points.reserve(idx.size());
  c.descriptors.reserve(idx.size());
  for (int i : idx) {
    c.points.push_back(pts[i]);
    c.descriptors.push_back(descs[i]);
  }
  return c;
}

/// Counts target points within `radius` of any source point under
/// `pose` (targets are mapped into the source frame by the inverse).
/// Scanning stops as soon as the count provably cannot exceed `best`;
/// the returned value is then irrelevant because the caller only takes
/// strictly better hypotheses.
int count_structural_inliers(const VoxelGrid& grid,
                             const kernels::PointsSoA& targets,
                             const geom::Pose& pose, double radius, int best) {
  const geom::Pose inv = pose.inverse();
  double rot[9];
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rot[r * 3 + c] = inv.rotation()(r, c);
  }
  const double trans[3] = {inv.translation().x(), inv.translation().y(),
                           inv.translation().z()};
  const size_t n = targets.size();
  constexpr size_t kBlock = 64;
  double bx[kBlock], by[kBlock], bz[kBlock];
  int count = 0;
  size_t scanned = 0;
  while (scanned < n) {
    // a small first block lets hopeless hypotheses bail after few probes
    const size_t want = scanned == 0 ? 16 : kBlock;
    const size_t len = std::min(want, n - scanned);
    kernels::active_kernels().transform_points(
        rot, trans, targets.x.data() + scanned, targets.y.data() + scanned,
        targets.z.data() + scanned, len, bx, by, bz);
    for (size_t i = 0; i < len; ++i) {
      if (grid.any_within(Vec3(bx[i], by[i], bz[i]), radius)) ++count;
    }
    scanned += len;
    if (count + static_cast<int>(n - scanned) <= best) {
      return count;  // cannot strictly beat the incumbent
    }
  }
  return count;
}

}  // namespace

RegistrationResult ransac_register(const CanonicalInstance& source,
                                   const ingest::InstanceObservation& target,
                                   const RansacParams& params) {
  RegistrationResult result;
  if (params.iterations < 1) {
    throw Error("ransac_register: iterations must be >= 1");
  }
  if (source.points.empty() || target.points.empty()) {
    result.failure = RegFailure::NoMatches;
    return result;
  }

  Rng rng(derive_seed(params.seed, 0x5a5a));
  const auto src_idx = subsample_indices(
      source.points.size(), static_cast<size_t>(params.max_points), rng);
  const auto tgt_idx = subsample_indices(
      target.points.size(), static_cast<size_t>(params.max_points), rng);
  const Cloud src = take(source.points, source.descriptors, src_idx);
  const Cloud tgt = take(target.points, target.descriptors, tgt_idx);

  const auto corr =
      match_features(src.descriptors, tgt.descriptors, params.min_similarity);
  if (corr.empty()) {
    result.failure = RegFailure::NoMatches;
    return result;
  }
  if (corr.size() < 3) {
    result.failure = RegFailure::DegenerateAllIterations;
    return result;
  }

  kernels::PointsSoA src_soa(src.points);
  kernels::PointsSoA tgt_soa(tgt.points);
  VoxelGrid grid(src_soa, params.fitness_radius,
                 /*build_dilated_occupancy=*/true);
  const int n_targets = static_cast<int>(tgt.points.size());

  geom::Pose best_pose;
  int best_count = 0;
  bool have_hypothesis = false;

  Vec3 s3[3], d3[3];
  for (int iter = 0; iter < params.iterations; ++iter) {
    // Degenerate samples are redrawn without consuming the iteration budget.
    bool sampled = false;
    for (int retry = 0; retry <= 10 && !sampled; ++retry) {
      int a = static_cast<int>(rng.bounded(corr.size()));
      int b, c;
      do {
        b = static_cast<int>(rng.bounded(corr.size()));
      } while (b == a);
      do {
        c = static_cast<int>(rng.bounded(corr.size()));
      } while (c == a || c == b);
      const Correspondence& ca = corr[a];
      const Correspondence& cb = corr[b];
      const Correspondence& cc = corr[c];
      s3[0] = src.points[ca.source_index];
      s3[1] = src.points[cb.source_index];
      s3[2] = src.points[cc.source_index];
      d3[0] = tgt.points[ca.target_index];
      d3[1] = tgt.points[cb.target_index];
      d3[2] = tgt.points[cc.target_index];
      sampled = !geom::collinear(s3[0], s3[1], s3[2]) &&
                !geom::collinear(d3[0], d3[1], d3[2]);
    }
    if (!sampled) continue;

    geom::Pose hypothesis;
    try {
      hypothesis = geom::umeyama(std::span<const Vec3>(s3, 3),
                                 std::span<const Vec3>(d3, 3));
    } catch (const DegenerateConfiguration&) {
      continue;
    }
    have_hypothesis = true;

    const int count = count_structural_inliers(
        grid, tgt_soa, hypothesis, params.fitness_radius, best_count);
    if (count > best_count) {
      best_count = count;
      best_pose = hypothesis;
    }
  }

  if (!have_hypothesis) {
    result.failure = RegFailure::DegenerateAllIterations;
    return result;
  }

  // Least-squares refit over the inlier correspondences of the winning
  // hypothesis; kept only when it does not lose structural inliers.
  if (best_count > 0) {
    std::vector<Vec3> in_src, in_dst;
    const double r2 = params.fitness_radius * params.fitness_radius;
    for (const auto& c : corr) {
      const Vec3 mapped = best_pose.apply(src.points[c.source_index]);
      if ((tgt.points[c.target_index] - mapped).squaredNorm() <= r2) {
        in_src.push_back(src.points[c.source_index]);
        in_dst.push_back(tgt.points[c.target_index]);
      }
    }
    if (in_src.size() >= 3) {
      try {
        const geom::Pose refit = geom::umeyama(in_src, in_dst);
        const int refit_count = count_structural_inliers(
            grid, tgt_soa, refit, params.fitness_radius, -1);
        if (refit_count >= best_count) {
          best_count = refit_count;
          best_pose = refit;
        }
      } catch (const DegenerateConfiguration&) {
        // keep the sampled hypothesis
      }
    }
  }

  const double fit = static_cast<double>(best_count) / n_targets;
  if (!(fit > params.fitness_threshold)) {
    result.failure = RegFailure::BelowFitness;
    result.fitness = fit;
    result.inliers = best_count;
    return result;
  }

  result.ok = true;
  result.pose = best_pose;
  result.fitness = fit;
  result.inliers = best_count;
  return result;
}

MeasuredTrajectory build_trajectory(
    const std::vector<ingest::InstanceObservation>& observations,
    const RansacParams& params) {
  if (observations.empty()) {
    throw Error("build_trajectory: need at least one observation");
  }

  // Stable per-frame seed tags: rank in chronological order.
  std::vector<size_t> by_time(observations.size());
  std::iota(by_time.begin(), by_time.end(), 0);
  std::sort(by_time.begin(), by_time.end(), [&](size_t a, size_t b) {
    return observations[a].timestamp < observations[b].timestamp;
  });
  std::vector<size_t> time_rank(observations.size());
  for (size_t r = 0; r < by_time.size(); ++r) {
    if (r > 0 && observations[by_time[r]].timestamp ==
                     observations[by_time[r - 1]].timestamp) {
      throw Error("build_trajectory: duplicate observation timestamps");
    }
    time_rank[by_time[r]] = r;
  }

  CanonicalInstance canonical = init_canonical(observations);

  MeasuredTrajectory traj;
  traj.instance_id = canonical.instance_id;
  traj.t_init = canonical.t_init;
  traj.measurements[canonical.t_init] = {canonical.init_pose, 1.0};

  // Remaining frames in descending point count, ties by earlier timestamp.
  std::vector<size_t> order;
  for (size_t i = 0; i < observations.size(); ++i) {
    if (observations[i].timestamp != canonical.t_init) order.push_back(i);
  }
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const auto& oa = observations[a];
    const auto& ob = observations[b];
    if (oa.points.size() != ob.points.size()) {
      return oa.points.size() > ob.points.size();
    }
    return oa.timestamp < ob.timestamp;
  });

  for (size_t i : order) {
    const auto& obs = observations[i];
    RansacParams frame_params = params;
    frame_params.seed = derive_seed(params.seed, time_rank[i]);
    const RegistrationResult res =
        ransac_register(canonical, obs, frame_params);
    if (!res.ok) {
      traj.failed_times.push_back(obs.timestamp);
      continue;
    }
    traj.measurements[obs.timestamp] = {res.pose, res.fitness};
    const geom::Pose inv = res.pose.inverse();
    for (size_t k = 0; k < obs.points.size(); ++k) {
      canonical.points.push_back(inv.apply(obs.points[k]));
      canonical.descriptors.push_back(obs.descriptors[k]);
    }
  }

  std::sort(traj.failed_times.begin(), traj.failed_times.end());
  traj.canonical_points = std::move(canonical.points);
  traj.canonical_descriptors = std::move(canonical.descriptors);
  return traj;
}

}  // namespace rigidtraj::reg
