// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
#include "rigidtraj/geometry.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace rigidtraj::geom {

namespace {
constexpr int kReorthonormalizeEvery = 100;
}

Pose compose(const Pose& a, const Pose& b) {
  Pose out(a.rotation_ * b.rotation_,
           a.rotation_ * b.translation_ + a.translation_);
  out.chain_ = a.chain_ + b.chain_ + 1;
  if (out.chain_ >= kReorthonormalizeEvery) {
    out.rotation_ = project_to_so3(out.rotation_);
    out.chain_ = 0;
  }
  return out;
}

Pose rot_z(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Mat3 r;
  r << c, -s, 0.0,
       s,  c, 0.0,
       0.0, 0.0, 1.0;
  return Pose(r, Vec3::Zero());
}

Mat3 project_to_so3(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1.0;
    r = svd.matrixU() * flip * svd.matrixV().transpose();
  }
  return r;
}

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return s;
}

Mat3 so3_exp(const Vec3& omega) {
  const double theta = omega.norm();
  const Mat3 w = skew(omega);
  if (theta < 1e-8) {
    // 2nd-order Taylor, exact to double precision at this angle.
    return Mat3::Identity() + w + 0.5 * (w * w);
  }
  const double a = std::sin(theta) / theta;
  const double b = (1.0 - std::cos(theta)) / (theta * theta);
  return Mat3::Identity() + a * w + b * (w * w);
}

Vec3 so3_log(const Mat3& rotation) {
  const double trace = rotation.trace();
  Vec3 axis(rotation(2, 1) - rotation(1, 2),
            rotation(0, 2) - rotation(2, 0),
            rotation(1, 0) - rotation(0, 1));
  const double sin_norm = 0.5 * axis.norm();
  const double cos_val = 0.5 * (trace - 1.0);
  const double theta = std::atan2(sin_norm, cos_val);
  if (theta > M_PI - 1e-6) {
    throw NearPiRotation("so3_log: rotation angle within 1e-6 of pi");
  }
  if (theta < 1e-8) {
    return 0.5 * axis;  // theta/(2 sin theta) -> 1/2
  }
  return (theta / (2.0 * std::sin(theta))) * axis;
}

namespace {

// V(omega) maps the translational tangent to the translation of exp().
Mat3 se3_v(const Vec3& omega) {
  const double theta = omega.norm();
  const Mat3 w = skew(omega);
  if (theta < 1e-6) {
    return Mat3::Identity() + 0.5 * w + (1.0 / 6.0) * (w * w);
  }
  const double t2 = theta * theta;
  const double a = (1.0 - std::cos(theta)) / t2;
  const double b = (theta - std::sin(theta)) / (t2 * theta);
  return Mat3::Identity() + a * w + b * (w * w);
}

Mat3 se3_v_inverse(const Vec3& omega) {
  const double theta = omega.norm();
  const Mat3 w = skew(omega);
  if (theta < 1e-6) {
    return Mat3::Identity() - 0.5 * w + (1.0 / 12.0) * (w * w);
  }
  const double half = 0.5 * theta;
  const double cot_half = std::cos(half) / std::sin(half);
  const double coeff = (1.0 - 0.5 * theta * cot_half) / (theta * theta);
  return Mat3::Identity() - 0.5 * w + coeff * (w * w);
}

}  // namespace

Pose exp(const Tangent& t) {
  return Pose(so3_exp(t.rot), se3_v(t.rot) * t.trans);
}

Tangent log(const Pose& p) {
  Tangent out;
  out.rot = so3_log(p.rotation());
  out.trans = se3_v_inverse(out.rot) * p.translation();
  return out;
}

RollPitch roll_pitch(const Pose& p) {
  const Mat3& r = p.rotation();
  // ZYX convention: R = Rz(yaw) Ry(pitch) Rx(roll), pitch = asin(-R(2,0)).
  const double sp = -r(2, 0);
  if (std::abs(sp) >= std::sin(M_PI / 2.0 - 1e-6)) {
    throw GimbalLock("roll_pitch: pitch within 1e-6 of +-pi/2");
  }
  RollPitch out;
  out.pitch = std::asin(sp);
  out.roll = std::atan2(r(2, 1), r(2, 2));
  return out;
}

bool collinear(const Vec3& a, const Vec3& b, const Vec3& c, double tol) {
  const Vec3 u = b - a;
  const Vec3 v = c - a;
  const double scale = u.norm() * v.norm();
  if (scale == 0.0) return true;
  return u.cross(v).norm() <= tol * scale;
}

Pose umeyama(std::span<const Vec3> src, std::span<const Vec3> dst) {
  if (src.size() != dst.size() || src.size() < 3) {
    throw DegenerateConfiguration("umeyama: need >= 3 paired correspondences");
  }
  const double n = static_cast<double>(src.size());
  Vec3 mean_src = Vec3::Zero();
  Vec3 mean_dst = Vec3::Zero();
  for (size_t i = 0; i < src.size(); ++i) {
    mean_src += src[i];
    mean_dst += dst[i];
  }
  mean_src /= n;
  mean_dst /= n;

  Mat3 cov = Mat3::Zero();
  for (size_t i = 0; i < src.size(); ++i) {
    cov += (dst[i] - mean_dst) * (src[i] - mean_src).transpose();
  }
  cov /= n;

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec3 sigma = svd.singularValues();
  // Rank >= 2 is needed for a unique rotation; rank 1 means both point sets
  // are collinear about their centroids.
  if (sigma(0) <= 0.0 || sigma(1) <= 1e-9 * sigma(0)) {
    throw DegenerateConfiguration("umeyama: collinear correspondence set");
  }

  Mat3 s = Mat3::Identity();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) {
    s(2, 2) = -1.0;
  }
  const Mat3 rotation = svd.matrixU() * s * svd.matrixV().transpose();
  return Pose(rotation, mean_dst - rotation * mean_src);
}

}  // namespace rigidtraj::geom
