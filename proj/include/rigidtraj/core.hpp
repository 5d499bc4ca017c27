// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace rigidtraj {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown by the rigid estimator when the correspondence set is collinear
/// (or otherwise rank-deficient) and no unique rotation exists.
class DegenerateConfiguration : public Error {
 public:
  using Error::Error;
};

/// Thrown by the SE(3)/SO(3) logarithm at the cut locus (rotation angle ~ pi).
class NearPiRotation : public Error {
 public:
  using Error::Error;
};

/// Thrown by Euler extraction when pitch sits at the +-pi/2 singularity.
class GimbalLock : public Error {
 public:
  using Error::Error;
};

/// Thrown by the optimizer when the damped normal equations stay
/// rank-deficient even at the maximum damping.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

/// Thrown by trajectory smoothing when outlier pruning removes every
/// measurement factor. The caller keeps the raw trajectory and flags it.
class AllMeasurementsRejected : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration (bad field value, unknown override path). Maps to
/// exit code 2 in the CLI; all other errors map to exit code 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace rigidtraj
