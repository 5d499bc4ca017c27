// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
#include "rigidtraj/ctsmooth.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace rigidtraj::ct {

geom::Pose ct_predict(const geom::Pose& pose, double speed, double curvature,
                      double dt) {
  const double theta = curvature * speed * dt;
  double dx, dy;
  if (std::abs(curvature) < 1e-8) {
    // Analytic limit, continuous at curvature = 0.
    dx = speed * dt;
    dy = 0.5 * curvature * speed * speed * dt * dt;
  } else {
    dx = std::sin(theta) / curvature;
    dy = (1.0 - std::cos(theta)) / curvature;
  }
  const geom::Pose increment(geom::rot_z(theta).rotation(), Vec3(dx, dy, 0.0));
  return geom::compose(pose, increment);
}

geom::Pose align(const geom::Pose& pose, const Mat3& shared_rotation) {
  return geom::Pose(pose.rotation() * shared_rotation, pose.translation());
}

Vec6 residual_measurement(const geom::Pose& state_pose,
                          const geom::Pose& measurement,
                          const NoiseParams& noise) {
  const geom::Tangent err =
      geom::log(geom::compose(measurement.inverse(), state_pose));
  Vec6 r;
  r.head<3>() = err.rot / noise.meas_sigma_rot;
  r.tail<3>() = err.trans / noise.meas_sigma_trans;
  return r;
}

Vec6 residual_motion(const geom::Pose& pose_t, double speed_t,
                     double curvature_t, const geom::Pose& pose_next,
                     const Mat3& shared_rotation, double dt,
                     const NoiseParams& noise) {
  const geom::Pose predicted =
      ct_predict(align(pose_t, shared_rotation), speed_t, curvature_t, dt);
  const geom::Tangent err = geom::log(
      geom::compose(predicted.inverse(), align(pose_next, shared_rotation)));
  Vec6 r;
  r.head<3>() = err.rot / noise.motion_sigma_rot;
  r.tail<3>() = err.trans / noise.motion_sigma_trans;
  return r;
}

double residual_random_walk(double x_t, double x_next, double dt,
                            WalkProcess process, const NoiseParams& noise) {
  if (dt <= 0.0) throw Error("residual_random_walk: dt must be > 0");
  const double rate = process == WalkProcess::Speed
                          ? noise.speed_walk_rate
                          : noise.curvature_walk_rate;
  return (x_next - x_t) / std::sqrt(rate * dt);
}

Eigen::Vector2d residual_attitude_prior(const geom::Pose& pose_t,
                                        const Mat3& shared_rotation,
                                        const NoiseParams& noise) {
  const geom::RollPitch rp = geom::roll_pitch(align(pose_t, shared_rotation));
  return Eigen::Vector2d(rp.roll / noise.attitude_sigma,
                         rp.pitch / noise.attitude_sigma);
}

double residual_curvature_prior(double curvature_t, const NoiseParams& noise) {
  return curvature_t / noise.curvature_prior_sigma;
}

VecX factor_residual(const Factor& factor, const SmootherState& state,
                     const FactorGraph& graph) {
  switch (factor.kind) {
    case FactorKind::Measurement:
      return residual_measurement(state.poses[factor.t0], factor.measurement,
                                  graph.noise);
    case FactorKind::Motion:
      return residual_motion(state.poses[factor.t0], state.speeds[factor.t0],
                             state.curvatures[factor.t0],
                             state.poses[factor.t1], state.shared_rotation,
                             graph.dts[factor.t0], graph.noise);
    case FactorKind::SpeedWalk: {
      VecX r(1);
      r(0) = residual_random_walk(state.speeds[factor.t0],
                                  state.speeds[factor.t1],
                                  graph.dts[factor.t0], WalkProcess::Speed,
                                  graph.noise);
      return r;
    }
    case FactorKind::CurvatureWalk: {
      VecX r(1);
      r(0) = residual_random_walk(
          state.curvatures[factor.t0], state.curvatures[factor.t1],
          graph.dts[factor.t0], WalkProcess::Curvature, graph.noise);
      return r;
    }
    case FactorKind::Attitude:
      return residual_attitude_prior(state.poses[factor.t0],
                                     state.shared_rotation, graph.noise);
    case FactorKind::CurvaturePrior: {
      VecX r(1);
      r(0) = residual_curvature_prior(state.curvatures[factor.t0],
                                      graph.noise);
      return r;
    }
  }
  throw Error("factor_residual: unknown factor kind");
}

namespace {

double huber_rho(double s, double k) {
  return s <= k ? 0.5 * s * s : k * (s - 0.5 * k);
}

double huber_weight(double s, double k) { return s <= k ? 1.0 : k / s; }

// Parameter blocks touched by each factor kind, as (offset, size) pairs in
// the stacked variable vector: poses [0,6N), speeds [6N,7N), curvatures
// [7N,8N), shared rotation [8N,8N+3).
struct BlockRef {
  enum Kind { PoseBlock, SpeedBlock, CurvatureBlock, SharedBlock } kind;
  int index;  // timestep for per-step blocks
  int size;
};

std::vector<BlockRef> factor_blocks(const Factor& f) {
  switch (f.kind) {
    case FactorKind::Measurement:
      return {{BlockRef::PoseBlock, f.t0, 6}};
    case FactorKind::Motion:
      return {{BlockRef::PoseBlock, f.t0, 6},
              {BlockRef::PoseBlock, f.t1, 6},
              {BlockRef::SpeedBlock, f.t0, 1},
              {BlockRef::CurvatureBlock, f.t0, 1},
              {BlockRef::SharedBlock, 0, 3}};
    case FactorKind::SpeedWalk:
      return {{BlockRef::SpeedBlock, f.t0, 1}, {BlockRef::SpeedBlock, f.t1, 1}};
    case FactorKind::CurvatureWalk:
      return {{BlockRef::CurvatureBlock, f.t0, 1},
              {BlockRef::CurvatureBlock, f.t1, 1}};
    case FactorKind::Attitude:
      return {{BlockRef::PoseBlock, f.t0, 6}, {BlockRef::SharedBlock, 0, 3}};
    case FactorKind::CurvaturePrior:
      return {{BlockRef::CurvatureBlock, f.t0, 1}};
  }
  throw Error("factor_blocks: unknown factor kind");
}

int block_offset(const BlockRef& b, int n) {
  switch (b.kind) {
    case BlockRef::PoseBlock:
      return 6 * b.index;
    case BlockRef::SpeedBlock:
      return 6 * n + b.index;
    case BlockRef::CurvatureBlock:
      return 7 * n + b.index;
    case BlockRef::SharedBlock:
      return 8 * n;
  }
  return 0;
}

// Applies a single-parameter perturbation in place; the caller restores from
// the returned saved value.
void perturb(SmootherState& state, const BlockRef& b, int param, double h) {
  switch (b.kind) {
    case BlockRef::PoseBlock: {
      geom::Tangent t;
      if (param < 3) {
        t.rot(param) = h;
      } else {
        t.trans(param - 3) = h;
      }
      state.poses[b.index] = geom::compose(state.poses[b.index], geom::exp(t));
      break;
    }
    case BlockRef::SpeedBlock:
      state.speeds[b.index] += h;
      break;
    case BlockRef::CurvatureBlock:
      state.curvatures[b.index] += h;
      break;
    case BlockRef::SharedBlock: {
      Vec3 w = Vec3::Zero();
      w(param) = h;
      state.shared_rotation = state.shared_rotation * geom::so3_exp(w);
      break;
    }
  }
}

constexpr double kFdStep = 1e-6;

// Central-difference Jacobian of the whitened residual w.r.t. the factor's
// blocks, stacked column-wise in block order.
MatX factor_jacobian(const Factor& factor, const SmootherState& state,
                     const FactorGraph& graph,
                     const std::vector<BlockRef>& blocks, int residual_dim) {
  int total = 0;
  for (const auto& b : blocks) total += b.size;
  MatX jac(residual_dim, total);

  SmootherState work = state;
  int col = 0;
  for (const auto& b : blocks) {
    for (int k = 0; k < b.size; ++k, ++col) {
      // save/restore of the touched variable only
      geom::Pose saved_pose;
      double saved_scalar = 0.0;
      Mat3 saved_rot;
      if (b.kind == BlockRef::PoseBlock) saved_pose = work.poses[b.index];
      if (b.kind == BlockRef::SpeedBlock) saved_scalar = work.speeds[b.index];
      if (b.kind == BlockRef::CurvatureBlock)
        saved_scalar = work.curvatures[b.index];
      if (b.kind == BlockRef::SharedBlock) saved_rot = work.shared_rotation;

      perturb(work, b, k, kFdStep);
      const VecX plus = factor_residual(factor, work, graph);
      // restore, perturb the other way
      if (b.kind == BlockRef::PoseBlock) work.poses[b.index] = saved_pose;
      if (b.kind == BlockRef::SpeedBlock) work.speeds[b.index] = saved_scalar;
      if (b.kind == BlockRef::CurvatureBlock)
        work.curvatures[b.index] = saved_scalar;
      if (b.kind == BlockRef::SharedBlock) work.shared_rotation = saved_rot;

      perturb(work, b, k, -kFdStep);
      const VecX minus = factor_residual(factor, work, graph);
      if (b.kind == BlockRef::PoseBlock) work.poses[b.index] = saved_pose;
      if (b.kind == BlockRef::SpeedBlock) work.speeds[b.index] = saved_scalar;
      if (b.kind == BlockRef::CurvatureBlock)
        work.curvatures[b.index] = saved_scalar;
      if (b.kind == BlockRef::SharedBlock) work.shared_rotation = saved_rot;

      jac.col(col) = (plus - minus) / (2.0 * kFdStep);
    }
  }
  return jac;
}

SmootherState retract(const SmootherState& state, const VecX& delta) {
  const int n = static_cast<int>(state.size());
  SmootherState out = state;
  for (int i = 0; i < n; ++i) {
    geom::Tangent t;
    t.rot = delta.segment<3>(6 * i);
    t.trans = delta.segment<3>(6 * i + 3);
    out.poses[i] = geom::compose(state.poses[i], geom::exp(t));
    out.speeds[i] = state.speeds[i] + delta(6 * n + i);
    out.curvatures[i] = state.curvatures[i] + delta(7 * n + i);
  }
  out.shared_rotation =
      state.shared_rotation * geom::so3_exp(delta.segment<3>(8 * n));
  return out;
}

double total_cost(const FactorGraph& graph, const SmootherState& state) {
  double cost = 0.0;
  for (const auto& f : graph.factors) {
    cost += factor_cost(f, state, graph, graph.noise);
  }
  return cost;
}

}  // namespace

double factor_cost(const Factor& factor, const SmootherState& state,
                   const FactorGraph& graph, const NoiseParams& noise) {
  const double s = factor_residual(factor, state, graph).norm();
  if (factor.robust) return huber_rho(s, noise.huber_threshold);
  return 0.5 * s * s;
}

VecX factor_gradient(const Factor& factor, const SmootherState& state,
                     const FactorGraph& graph, const NoiseParams& noise) {
  const auto blocks = factor_blocks(factor);
  const VecX r = factor_residual(factor, state, graph);
  const MatX jac = factor_jacobian(factor, state, graph, blocks,
                                   static_cast<int>(r.size()));
  double w = 1.0;
  if (factor.robust) w = huber_weight(r.norm(), noise.huber_threshold);
  return w * (jac.transpose() * r);
}

OptimizeResult optimize(const FactorGraph& graph, const SmootherState& init,
                        int max_iters) {
  const int n = static_cast<int>(init.size());
  if (n == 0) throw Error("optimize: empty state");
  if (n > 1 && graph.dts.size() != static_cast<size_t>(n - 1)) {
    throw Error("optimize: dts must have size N-1");
  }
  const int dim = 8 * n + 3;

  OptimizeResult result;
  result.state = init;
  result.cost = total_cost(graph, result.state);

  double lambda = 1e-4;
  bool done = false;
  while (!done && result.accepted_steps < max_iters) {
    // Linearize: H = sum w J^T J, g = sum w J^T r (IRLS scaling of the
    // robustifier; exact for the gradient).
    MatX h = MatX::Zero(dim, dim);
    VecX g = VecX::Zero(dim);
    for (const auto& factor : graph.factors) {
      const auto blocks = factor_blocks(factor);
      const VecX r = factor_residual(factor, result.state, graph);
      const MatX jac = factor_jacobian(factor, result.state, graph, blocks,
                                       static_cast<int>(r.size()));
      double w = 1.0;
      if (factor.robust) w = huber_weight(r.norm(), graph.noise.huber_threshold);

      int row_off = 0;
      for (const auto& bi : blocks) {
        const int oi = block_offset(bi, n);
        const MatX ji = jac.middleCols(row_off, bi.size);
        g.segment(oi, bi.size) += w * (ji.transpose() * r);
        int col_off = 0;
        for (const auto& bj : blocks) {
          const int oj = block_offset(bj, n);
          h.block(oi, oj, bi.size, bj.size) +=
              w * (ji.transpose() * jac.middleCols(col_off, bj.size));
          col_off += bj.size;
        }
        row_off += bi.size;
      }
    }

    if (g.norm() < 1e-14) break;  // already stationary

    while (true) {
      MatX damped = h;
      for (int i = 0; i < dim; ++i) {
        damped(i, i) += lambda * std::max(h(i, i), 1e-12);
      }
      Eigen::LDLT<MatX> ldlt(damped);
      VecX delta;
      bool solved = ldlt.info() == Eigen::Success;
      if (solved) {
        delta = ldlt.solve(-g);
        solved = delta.allFinite();
      }
      if (!solved) {
        if (lambda >= 1e6) {
          throw SingularSystem(
              "optimize: normal equations rank-deficient at max damping");
        }
        lambda *= 10.0;
        continue;
      }

      const SmootherState candidate = retract(result.state, delta);
      const double candidate_cost = total_cost(graph, candidate);
      if (std::isfinite(candidate_cost) && candidate_cost < result.cost) {
        const double rel =
            (result.cost - candidate_cost) / std::max(result.cost, 1e-300);
        result.state = candidate;
        result.cost = candidate_cost;
        result.accepted_steps += 1;
        lambda = std::max(lambda / 10.0, 1e-12);
        if (rel < 1e-6) done = true;  // converged
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e8) {
        done = true;  // no acceptable step remains
        break;
      }
    }
  }
  return result;
}

namespace {

geom::Pose interpolate_pose(const geom::Pose& a, const geom::Pose& b,
                            double s) {
  const Vec3 t = (1.0 - s) * a.translation() + s * b.translation();
  Mat3 r;
  try {
    const Vec3 w = geom::so3_log(a.rotation().transpose() * b.rotation());
    r = a.rotation() * geom::so3_exp(s * w);
  } catch (const NearPiRotation&) {
    r = s < 0.5 ? a.rotation() : b.rotation();
  }
  return geom::Pose(r, t);
}

}  // namespace

namespace {

/// Grid indices of the measurement timestamps (which must lie on the grid).
std::vector<int> measurement_indices(const reg::MeasuredTrajectory& measured,
                                     const std::vector<double>& grid_times) {
  std::vector<int> idx;
  for (const auto& [t, m] : measured.measurements) {
    const auto it =
        std::lower_bound(grid_times.begin(), grid_times.end(), t - 1e-9);
    if (it == grid_times.end() || std::abs(*it - t) > 1e-9) {
      throw Error("smooth: measurement timestamp not on the grid");
    }
    idx.push_back(static_cast<int>(it - grid_times.begin()));
  }
  return idx;
}

}  // namespace

std::vector<bool> measured_flags(const reg::MeasuredTrajectory& measured,
                                 const std::vector<double>& grid_times) {
  std::vector<bool> flags(grid_times.size(), false);
  for (int idx : measurement_indices(measured, grid_times)) {
    flags[idx] = true;
  }
  return flags;
}

SmootherState initialize_state(const reg::MeasuredTrajectory& measured,
                               const std::vector<double>& grid_times) {
  if (measured.measurements.empty()) {
    throw Error("initialize_state: need at least one measurement");
  }
  const int n = static_cast<int>(grid_times.size());
  if (n == 0) throw Error("initialize_state: empty time grid");

  const std::vector<int> meas_idx = measurement_indices(measured, grid_times);
  std::vector<geom::Pose> meas_pose;
  for (const auto& [t, m] : measured.measurements) meas_pose.push_back(m.pose);

  SmootherState init;
  init.times = grid_times;
  init.poses.resize(n);
  init.speeds.assign(n, 0.0);
  init.curvatures.assign(n, 0.0);

  const int m = static_cast<int>(meas_idx.size());
  for (int i = 0; i < n; ++i) {
    // bracketing measurements
    int next = 0;
    while (next < m && meas_idx[next] < i) ++next;
    const int prev = next - 1;
    if (next < m && meas_idx[next] == i) {
      init.poses[i] = meas_pose[next];
    } else if (prev < 0) {
      init.poses[i] = meas_pose.front();
    } else if (next >= m) {
      init.poses[i] = meas_pose.back();
    } else {
      const double ta = grid_times[meas_idx[prev]];
      const double tb = grid_times[meas_idx[next]];
      const double s = (grid_times[i] - ta) / (tb - ta);
      init.poses[i] = interpolate_pose(meas_pose[prev], meas_pose[next], s);
    }

    if (m >= 2) {
      int a = std::max(prev, 0);
      if (a >= m - 1) a = m - 2;
      const double ta = grid_times[meas_idx[a]];
      const double tb = grid_times[meas_idx[a + 1]];
      init.speeds[i] =
          (meas_pose[a + 1].translation() - meas_pose[a].translation()).norm() /
          (tb - ta);
    }
  }

  // Shared rotation: yaw taking the first measured displacement, expressed in
  // the first pose's body frame, onto local +x.
  init.shared_rotation = Mat3::Identity();
  for (int k = 0; k + 1 < m; ++k) {
    const Vec3 d =
        meas_pose[k + 1].translation() - meas_pose[k].translation();
    if (d.norm() > 1e-9) {
      const Vec3 body = meas_pose[k].rotation().transpose() * d;
      init.shared_rotation =
          geom::rot_z(std::atan2(body.y(), body.x())).rotation();
      break;
    }
  }
  return init;
}

SmoothedTrajectory smooth(const reg::MeasuredTrajectory& measured,
                          const std::vector<double>& grid_times,
                          const SmootherParams& params) {
  if (measured.measurements.empty()) {
    throw Error("smooth: need at least one measurement");
  }
  const int n = static_cast<int>(grid_times.size());
  if (n == 0) throw Error("smooth: empty time grid");

  const std::vector<int> meas_idx = measurement_indices(measured, grid_times);
  std::vector<geom::Pose> meas_pose;
  for (const auto& [t, m] : measured.measurements) meas_pose.push_back(m.pose);
  const int m = static_cast<int>(meas_idx.size());

  const SmootherState init = initialize_state(measured, grid_times);

  // --- factor graph ---
  FactorGraph graph;
  graph.noise = params.noise;
  graph.dts.resize(n - 1);
  for (int i = 0; i + 1 < n; ++i) {
    graph.dts[i] = grid_times[i + 1] - grid_times[i];
    if (graph.dts[i] <= 0.0) throw Error("smooth: grid times must increase");
  }
  for (int k = 0; k < m; ++k) {
    Factor f;
    f.kind = FactorKind::Measurement;
    f.t0 = meas_idx[k];
    f.measurement = meas_pose[k];
    f.robust = true;
    graph.factors.push_back(f);
  }
  for (int i = 0; i + 1 < n; ++i) {
    graph.factors.push_back({FactorKind::Motion, i, i + 1, {}, false});
    graph.factors.push_back({FactorKind::SpeedWalk, i, i + 1, {}, false});
    graph.factors.push_back({FactorKind::CurvatureWalk, i, i + 1, {}, false});
  }
  for (int i = 0; i < n; ++i) {
    graph.factors.push_back({FactorKind::Attitude, i, -1, {}, false});
    graph.factors.push_back({FactorKind::CurvaturePrior, i, -1, {}, false});
  }

  // Pass 1: full graph.
  const OptimizeResult pass1 =
      optimize(graph, init, params.lm_max_iterations);

  // Outlier surgery: unrobustified whitened norm at the pass-1 optimum.
  SmoothedTrajectory out;
  out.instance_id = measured.instance_id;
  std::vector<bool> rejected(m, false);
  int n_rejected = 0;
  for (int k = 0; k < m; ++k) {
    const double err =
        residual_measurement(pass1.state.poses[meas_idx[k]], meas_pose[k],
                             params.noise)
            .norm();
    if (err > params.whitened_cutoff) {
      rejected[k] = true;
      ++n_rejected;
      out.rejected_times.push_back(grid_times[meas_idx[k]]);
    }
  }
  if (n_rejected == m) {
    throw AllMeasurementsRejected("smooth: every measurement exceeded the cutoff");
  }

  // Pass 2: pruned graph, warm-started from pass 1.
  FactorGraph pruned;
  pruned.noise = graph.noise;
  pruned.dts = graph.dts;
  int meas_counter = 0;
  for (const auto& f : graph.factors) {
    if (f.kind == FactorKind::Measurement) {
      if (!rejected[meas_counter++]) pruned.factors.push_back(f);
    } else {
      pruned.factors.push_back(f);
    }
  }
  const OptimizeResult pass2 =
      optimize(pruned, pass1.state, params.lm_max_iterations);

  out.states = pass2.state;
  out.final_cost = pass2.cost;
  out.measured.assign(n, false);
  for (int k = 0; k < m; ++k) out.measured[meas_idx[k]] = true;
  return out;
}

bool classify_static(const reg::MeasuredTrajectory& measured,
                     double displacement_threshold) {
  double max_d2 = 0.0;
  for (auto it = measured.measurements.begin();
       it != measured.measurements.end(); ++it) {
    auto jt = it;
    for (++jt; jt != measured.measurements.end(); ++jt) {
      max_d2 = std::max(max_d2, (it->second.pose.translation() -
                                 jt->second.pose.translation())
                                    .squaredNorm());
    }
  }
  return std::sqrt(max_d2) < displacement_threshold;
}

SmoothedTrajectory make_static_trajectory(
    const reg::MeasuredTrajectory& measured,
    const std::vector<double>& grid_times) {
  const auto it = measured.measurements.find(measured.t_init);
  if (it == measured.measurements.end()) {
    throw Error("make_static_trajectory: missing t_init measurement");
  }
  SmoothedTrajectory out;
  out.instance_id = measured.instance_id;
  out.is_static = true;
  out.states.times = grid_times;
  out.states.poses.assign(grid_times.size(), it->second.pose);
  out.states.speeds.assign(grid_times.size(), 0.0);
  out.states.curvatures.assign(grid_times.size(), 0.0);
  out.measured = measured_flags(measured, grid_times);
  return out;
}

}  // namespace rigidtraj::ct
