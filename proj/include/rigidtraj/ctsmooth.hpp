// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <vector>

#include "rigidtraj/core.hpp"
#include "rigidtraj/geometry.hpp"
#include "rigidtraj/registration.hpp"

namespace rigidtraj::ct {

/// Diagonal noise standard deviations for every factor type, plus the Huber
/// threshold for the measurement factors.
struct NoiseParams {
  double meas_sigma_rot = 0.1;    // rad, per axis
  double meas_sigma_trans = 0.2;  // m, per axis
  double motion_sigma_rot = 0.1;
  double motion_sigma_trans = 0.2;
  double speed_walk_rate = 0.5;       // sigma = sqrt(0.5 dt)
  double curvature_walk_rate = 1e-5;  // sigma = sqrt(1e-5 dt)
  double attitude_sigma = 0.4;        // roll and pitch
  double curvature_prior_sigma = 0.01;
  double huber_threshold = 1.0;  // on the whitened measurement norm
};

struct SmootherParams {
  NoiseParams noise;
  double whitened_cutoff = 1.345;  // outlier rejection after pass 1
  int lm_max_iterations = 10;
  double static_displacement = 1.0;  // m
};

/// Per-timestep state triple plus the single alignment rotation shared across
/// all timesteps (it re-axes the canonical frame so local +x is forward).
struct SmootherState {
  std::vector<double> times;
  std::vector<geom::Pose> poses;
  std::vector<double> speeds;      // m/s
  std::vector<double> curvatures;  // 1/m
  Mat3 shared_rotation = Mat3::Identity();

  size_t size() const { return times.size(); }
};

/// Coordinated-turn prediction over one step: theta = kappa v dt, local
/// increment (sin(theta)/kappa, (1-cos(theta))/kappa, 0) with rotation
/// R_z(theta), applied on the right of T. Below |kappa| = 1e-8 the analytic
/// limit (v dt, kappa v^2 dt^2 / 2) keeps the map continuous at kappa = 0.
geom::Pose ct_predict(const geom::Pose& pose, double speed, double curvature,
                      double dt);

/// T right-multiplied by the shared rotation (translation unchanged).
geom::Pose align(const geom::Pose& pose, const Mat3& shared_rotation);

// Whitened residuals. These define the cost; the optimizer differentiates
// them numerically.

/// log(measurement^-1 * T_t), rotational part / sigma_rot, translational
/// part / sigma_trans.
Vec6 residual_measurement(const geom::Pose& state_pose,
                          const geom::Pose& measurement,
                          const NoiseParams& noise);

/// Deviation of align(T_{t+1}) from the CT prediction of align(T_t).
Vec6 residual_motion(const geom::Pose& pose_t, double speed_t,
                     double curvature_t, const geom::Pose& pose_next,
                     const Mat3& shared_rotation, double dt,
                     const NoiseParams& noise);

enum class WalkProcess { Speed, Curvature };

/// (x_{t+1} - x_t) / sqrt(rate * dt).
double residual_random_walk(double x_t, double x_next, double dt,
                            WalkProcess process, const NoiseParams& noise);

/// (roll, pitch) of align(T_t), each / attitude sigma.
Eigen::Vector2d residual_attitude_prior(const geom::Pose& pose_t,
                                        const Mat3& shared_rotation,
                                        const NoiseParams& noise);

/// kappa_t / prior sigma.
double residual_curvature_prior(double curvature_t, const NoiseParams& noise);

enum class FactorKind {
  Measurement,
  Motion,
  SpeedWalk,
  CurvatureWalk,
  Attitude,
  CurvaturePrior
};

struct Factor {
  FactorKind kind = FactorKind::Measurement;
  int t0 = -1;
  int t1 = -1;               // second timestep for binary factors
  geom::Pose measurement;    // Measurement factors only
  bool robust = false;       // Huber on the whitened norm
};

struct FactorGraph {
  std::vector<Factor> factors;
  std::vector<double> dts;  // dts[i] = times[i+1] - times[i]
  NoiseParams noise;
};

/// Whitened residual of one factor at the given state.
VecX factor_residual(const Factor& factor, const SmootherState& state,
                     const FactorGraph& graph);

/// Robustified factor cost: 0.5 s^2 below the Huber threshold, k(s - k/2)
/// above (s = whitened norm); plain 0.5 s^2 for non-robust factors.
double factor_cost(const Factor& factor, const SmootherState& state,
                   const FactorGraph& graph, const NoiseParams& noise);

/// Gradient of factor_cost w.r.t. the factor's own parameter blocks, via the
/// same Jacobian machinery the optimizer uses (numeric residual Jacobian +
/// exact robust chain rule). Used by the finite-difference consistency tests.
VecX factor_gradient(const Factor& factor, const SmootherState& state,
                     const FactorGraph& graph, const NoiseParams& noise);

struct OptimizeResult {
  SmootherState state;
  double cost = 0.0;
  int accepted_steps = 0;
};

/// Levenberg-Marquardt on the manifold (poses retract through the SE(3) exp,
/// the shared rotation through the SO(3) exp, scalars additively). Jacobians
/// by central differences with step 1e-6. Accepted steps never increase the
/// robustified cost; terminates on max_iters accepted steps or relative cost
/// decrease < 1e-6. Throws SingularSystem if the damped normal equations stay
/// unsolvable at damping >= 1e6.
OptimizeResult optimize(const FactorGraph& graph, const SmootherState& init,
                        int max_iters = 10);

struct SmoothedTrajectory {
  int instance_id = 0;
  SmootherState states;
  std::vector<bool> measured;        // per timestep
  std::vector<double> rejected_times;
  bool is_static = false;
  double final_cost = 0.0;
};

/// Measurement-anchored initial state over the grid: measured poses where
/// available, constant-velocity interpolation across gaps (nearest
/// measurement beyond the ends), speeds from consecutive measured
/// displacements, zero curvature, and the shared rotation from the yaw of
/// the first measured displacement expressed in the body frame.
SmootherState initialize_state(const reg::MeasuredTrajectory& measured,
                               const std::vector<double>& grid_times);

/// Per-timestep flag: a measurement exists at this grid time (1e-9 timestamp
/// tolerance, same matching as smooth()).
std::vector<bool> measured_flags(const reg::MeasuredTrajectory& measured,
                                 const std::vector<double>& grid_times);

/// Two-pass iterative smoothing: optimize the full graph, drop measurement
/// factors whose unrobustified whitened norm exceeds the cutoff, re-optimize.
/// States exist at every grid timestep; gaps are bridged by the motion model.
/// Throws AllMeasurementsRejected when pruning removes every measurement.
SmoothedTrajectory smooth(const reg::MeasuredTrajectory& measured,
                          const std::vector<double>& grid_times,
                          const SmootherParams& params);

/// True iff the maximum pairwise translation distance over the measured poses
/// is below the displacement threshold.
bool classify_static(const reg::MeasuredTrajectory& measured,
                     double displacement_threshold = 1.0);

/// Constant-pose trajectory (the t_init measurement) over the grid.
SmoothedTrajectory make_static_trajectory(
    const reg::MeasuredTrajectory& measured,
    const std::vector<double>& grid_times);

}  // namespace rigidtraj::ct
