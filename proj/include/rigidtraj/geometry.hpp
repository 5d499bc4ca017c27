// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <span>
#include <vector>

#include "rigidtraj/core.hpp"

namespace rigidtraj::geom {

/// Rigid transform in SE(3). The rotation is kept orthonormal by an SVD
/// projection after every 100 compositions, so long chains stay on the
/// manifold to better than 1e-9.
class Pose {
 public:
  Pose() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  Pose(const Mat3& rotation, const Vec3& translation)
      : rotation_(rotation), translation_(translation) {}

  static Pose identity() { return Pose(); }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  /// Apply to a point: R p + t.
  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }

  Pose inverse() const {
    Pose out(rotation_.transpose(), -(rotation_.transpose() * translation_));
    out.chain_ = chain_;
    return out;
  }

  int chain_length() const { return chain_; }

 private:
  friend Pose compose(const Pose&, const Pose&);
  Mat3 rotation_;
  Vec3 translation_;
  int chain_ = 0;  // compositions since last re-orthonormalization
};

/// SE(3) tangent vector: rotational part in radians, translational in meters.
struct Tangent {
  Vec3 rot = Vec3::Zero();
  Vec3 trans = Vec3::Zero();

  Vec6 stacked() const {
    Vec6 v;
    v << rot, trans;
    return v;
  }
  double norm() const { return stacked().norm(); }
};

/// a * b: applies b first, then a.
Pose compose(const Pose& a, const Pose& b);

/// Rotation about +z by theta, zero translation.
Pose rot_z(double theta);

/// Nearest orthonormal matrix with det +1 (SVD projection).
Mat3 project_to_so3(const Mat3& m);

Mat3 skew(const Vec3& v);

/// SO(3) exponential/logarithm. so3_log throws NearPiRotation within 1e-6 of
/// the cut locus.
Mat3 so3_exp(const Vec3& omega);
Vec3 so3_log(const Mat3& rotation);

/// SE(3) exponential map (rotation via Rodrigues, translation via the V
/// matrix).
Pose exp(const Tangent& t);

/// SE(3) logarithm; requires rotation angle < pi - 1e-6.
Tangent log(const Pose& p);

struct RollPitch {
  double roll = 0.0;
  double pitch = 0.0;
};

/// ZYX Euler extraction of roll and pitch. Throws GimbalLock within 1e-6 of
/// |pitch| = pi/2.
RollPitch roll_pitch(const Pose& p);

/// Closed-form least-squares rigid alignment (fixed scale): returns the pose
/// minimizing sum ||dst_k - T(src_k)||^2, with the determinant-sign correction
/// so the result is a proper rotation. Throws DegenerateConfiguration when
/// the correspondences are collinear within relative tolerance 1e-9.
Pose umeyama(std::span<const Vec3> src, std::span<const Vec3> dst);

/// Cheap collinearity test used by sampling loops to skip degenerate triples
/// before calling umeyama. Relative tolerance on the triangle area.
bool collinear(const Vec3& a, const Vec3& b, const Vec3& c, double tol = 1e-9);

}  // namespace rigidtraj::geom
