// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "rigidtraj/geometry.hpp"
#include "rigidtraj/rng.hpp"

using namespace rigidtraj;
using geom::Pose;

namespace {
double rotation_distance(const Mat3& a, const Mat3& b) {
  return (a - b).norm();
}
}  // namespace

TEST_CASE("compose: identity and symmetry cases") {
  Rng rng(7);
  const Pose p = oracles::random_pose(rng);
  const Pose ip = geom::compose(Pose::identity(), p);
  CHECK(rotation_distance(ip.rotation(), p.rotation()) < 1e-15);
  CHECK((ip.translation() - p.translation()).norm() < 1e-15);

  const Pose quarter = geom::rot_z(M_PI / 2.0);
  const Pose half = geom::compose(quarter, quarter);
  CHECK(rotation_distance(half.rotation(), geom::rot_z(M_PI).rotation()) <
        1e-12);
}

TEST_CASE("compose: frozen arithmetic example") {
  // T1 = (R_z(0.3), (1,0,0)), T2 = (I, (0,1,0)):
  // translation = (1 - sin 0.3, cos 0.3, 0).
  const Pose t1(geom::rot_z(0.3).rotation(), Vec3(1, 0, 0));
  const Pose t2(Mat3::Identity(), Vec3(0, 1, 0));
  const Pose c = geom::compose(t1, t2);
  CHECK(c.translation().x() ==
        doctest::Approx(0.70447979333866042).epsilon(1e-14));
  CHECK(c.translation().y() ==
        doctest::Approx(0.95533648912560602).epsilon(1e-14));
  CHECK(std::abs(c.translation().z()) < 1e-15);
}

TEST_CASE("compose: associativity and long-chain orthonormality") {
  Rng rng(11);
  for (int k = 0; k < 50; ++k) {
    const Pose a = oracles::random_pose(rng);
    const Pose b = oracles::random_pose(rng);
    const Pose c = oracles::random_pose(rng);
    const Pose ab_c = geom::compose(geom::compose(a, b), c);
    const Pose a_bc = geom::compose(a, geom::compose(b, c));
    CHECK(rotation_distance(ab_c.rotation(), a_bc.rotation()) < 1e-9);
    CHECK((ab_c.translation() - a_bc.translation()).norm() < 1e-9);
  }

  // chain of 10^4 compositions stays orthonormal to 1e-9
  Pose chain;
  const Pose step = oracles::random_pose(rng, 0.1);
  for (int k = 0; k < 10000; ++k) chain = geom::compose(chain, step);
  const Mat3 gram = chain.rotation().transpose() * chain.rotation();
  CHECK((gram - Mat3::Identity()).norm() < 1e-9);
  CHECK(chain.rotation().determinant() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("inverse: round trips") {
  Rng rng(13);
  for (int k = 0; k < 50; ++k) {
    const Pose p = oracles::random_pose(rng);
    const Pose id = geom::compose(p, p.inverse());
    CHECK(rotation_distance(id.rotation(), Mat3::Identity()) < 1e-9);
    CHECK(id.translation().norm() < 1e-9);

    const Vec3 x(rng.normal(), rng.normal(), rng.normal());
    CHECK((p.inverse().apply(p.apply(x)) - x).norm() < 1e-9);
  }
}

TEST_CASE("rot_z: frozen values") {
  CHECK(rotation_distance(geom::rot_z(0.0).rotation(), Mat3::Identity()) ==
        0.0);

  const Mat3 pi_rot = geom::rot_z(M_PI).rotation();
  CHECK(pi_rot(0, 0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(pi_rot(1, 1) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(pi_rot(2, 2) == 1.0);

  const Mat3 r = geom::rot_z(0.1).rotation();
  CHECK(r(0, 0) == doctest::Approx(0.99500416527802577).epsilon(1e-14));
  CHECK(r(0, 1) == doctest::Approx(-0.099833416646828152).epsilon(1e-14));
  CHECK(r(1, 0) == doctest::Approx(0.099833416646828152).epsilon(1e-14));
  CHECK(r(1, 1) == doctest::Approx(0.99500416527802577).epsilon(1e-14));
  CHECK(r(2, 2) == 1.0);
}

TEST_CASE("umeyama: identity and exact recovery") {
  const std::vector<Vec3> tri = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0)};
  const Pose id = geom::umeyama(tri, tri);
  CHECK(rotation_distance(id.rotation(), Mat3::Identity()) < 1e-12);
  CHECK(id.translation().norm() < 1e-12);

  const Pose truth(geom::rot_z(M_PI / 2.0).rotation(), Vec3(1, 2, 3));
  std::vector<Vec3> dst;
  for (const auto& p : tri) dst.push_back(truth.apply(p));
  const Pose rec = geom::umeyama(tri, dst);
  CHECK(rotation_distance(rec.rotation(), truth.rotation()) < 1e-9);
  CHECK((rec.translation() - truth.translation()).norm() < 1e-9);
}

TEST_CASE("umeyama: noise robustness (Monte-Carlo, 95th percentile)") {
  Rng rng(101);
  std::vector<double> errors;
  for (int seed = 0; seed < 1000; ++seed) {
    const Pose truth = oracles::random_pose(rng, 5.0);
    std::vector<Vec3> src, dst;
    for (int i = 0; i < 100; ++i) {
      const Vec3 p(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
      src.push_back(p);
      dst.push_back(truth.apply(p) +
                    0.01 * Vec3(rng.normal(), rng.normal(), rng.normal()));
    }
    const Pose rec = geom::umeyama(src, dst);
    errors.push_back((rec.translation() - truth.translation()).norm());
  }
  std::sort(errors.begin(), errors.end());
  CHECK(errors[949] < 0.01);  // 95th percentile within the noise scale
}

TEST_CASE("umeyama: permutation invariance") {
  Rng rng(19);
  const Pose truth = oracles::random_pose(rng);
  std::vector<Vec3> src, dst;
  for (int i = 0; i < 20; ++i) {
    const Vec3 p(rng.normal(), rng.normal(), rng.normal());
    src.push_back(p);
    dst.push_back(truth.apply(p) + 0.05 * Vec3(rng.normal(), rng.normal(),
                                               rng.normal()));
  }
  const Pose a = geom::umeyama(src, dst);
  std::vector<int> perm(src.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::swap(perm[3], perm[11]);
  std::vector<Vec3> src2, dst2;
  for (int i : perm) {
    src2.push_back(src[i]);
    dst2.push_back(dst[i]);
  }
  const Pose b = geom::umeyama(src2, dst2);
  CHECK(rotation_distance(a.rotation(), b.rotation()) < 1e-12);
  CHECK((a.translation() - b.translation()).norm() < 1e-12);
}

TEST_CASE("umeyama: degenerate configurations") {
  const std::vector<Vec3> line = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)};
  CHECK_THROWS_AS(geom::umeyama(line, line), DegenerateConfiguration);
  const std::vector<Vec3> two = {Vec3(0, 0, 0), Vec3(1, 0, 0)};
  CHECK_THROWS_AS(geom::umeyama(two, two), DegenerateConfiguration);
}

TEST_CASE("exp/log: basic identities") {
  const geom::Tangent zero = geom::log(Pose::identity());
  CHECK(zero.norm() < 1e-15);

  geom::Tangent yaw;
  yaw.rot = Vec3(0, 0, 0.1);
  const Pose p = geom::exp(yaw);
  CHECK(rotation_distance(p.rotation(), geom::rot_z(0.1).rotation()) < 1e-12);
  CHECK(p.translation().norm() < 1e-15);

  Rng rng(23);
  for (int k = 0; k < 50; ++k) {
    geom::Tangent t;
    t.rot = Vec3(rng.normal(), rng.normal(), rng.normal()) * 0.2;
    t.trans = Vec3(rng.normal(), rng.normal(), rng.normal());
    geom::Tangent neg;
    neg.rot = -t.rot;
    neg.trans = -t.trans;
    const Pose round = geom::compose(geom::exp(t), geom::exp(neg));
    CHECK(rotation_distance(round.rotation(), Mat3::Identity()) < 1e-9);
    CHECK(round.translation().norm() < 1e-9);
  }
}

TEST_CASE("exp/log: round trip over random tangents") {
  Rng rng(29);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    geom::Tangent t;
    Vec3 axis(rng.normal(), rng.normal(), rng.normal());
    if (axis.norm() < 1e-12) axis = Vec3::UnitZ();
    t.rot = axis.normalized() * rng.uniform(0.0, 3.0);
    t.trans = Vec3(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
    const geom::Tangent back = geom::log(geom::exp(t));
    worst = std::max(worst, (back.stacked() - t.stacked()).norm());
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("log: near-pi cut locus") {
  CHECK_THROWS_AS(geom::log(geom::rot_z(M_PI - 1e-7)), NearPiRotation);
  CHECK_NOTHROW(geom::log(geom::rot_z(3.0)));
}

TEST_CASE("roll_pitch: extraction and gimbal lock") {
  const auto id = geom::roll_pitch(Pose::identity());
  CHECK(id.roll == 0.0);
  CHECK(id.pitch == 0.0);

  const auto yaw_only = geom::roll_pitch(geom::rot_z(0.7));
  CHECK(std::abs(yaw_only.roll) < 1e-15);
  CHECK(std::abs(yaw_only.pitch) < 1e-15);

  const Pose roll_x(geom::so3_exp(Vec3(0.2, 0, 0)), Vec3::Zero());
  const auto rp = geom::roll_pitch(roll_x);
  CHECK(rp.roll == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(std::abs(rp.pitch) < 1e-12);

  const Pose gimbal(geom::so3_exp(Vec3(0, M_PI / 2.0, 0)), Vec3::Zero());
  CHECK_THROWS_AS(geom::roll_pitch(gimbal), GimbalLock);
}
