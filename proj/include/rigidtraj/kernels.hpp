// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstddef>
#include <vector>

#include "rigidtraj/core.hpp"

namespace rigidtraj::kernels {

/// Structure-of-arrays point buffer used by the batch kernels.
struct PointsSoA {
  std::vector<double> x, y, z;

  PointsSoA() = default;
  explicit PointsSoA(const std::vector<Vec3>& pts) {
    x.reserve(pts.size());
    y.reserve(pts.size());
    z.reserve(pts.size());
    for (const auto& p : pts) {
      x.push_back(p.x());
      y.push_back(p.y());
      z.push_back(p.z());
    }
  }

  size_t size() const { return x.size(); }
  Vec3 point(size_t i) const { return Vec3(x[i], y[i], z[i]); }
  void push_back(const Vec3& p) {
    x.push_back(p.x());
    y.push_back(p.y());
    z.push_back(p.z());
  }
};

/// The dispatchable kernel set. Every variant implements the same arithmetic
/// contract (operation order, no FP contraction), so variants agree
/// bit-for-bit and runtime selection cannot change results.
///
/// transform_points: out_i = R * p_i + t, with the fixed association
///   ((R00*x + R01*y) + (R02*z + t0)) per component.
/// squared_distances: d_i = ((dx*dx) + (dy*dy)) + (dz*dz).
/// best_dot: for each of n queries (row-major n x dim), the maximum dot
///   product over m sources (row-major m x dim) and its index; dots are
///   accumulated in four interleaved partial sums (lane k % 4) reduced as
///   (s0 + s1) + (s2 + s3); ties keep the lowest source index.
struct Kernels {
  const char* name;
  void (*transform_points)(const double* rot, const double* trans,
                           const double* xs, const double* ys,
                           const double* zs, size_t n, double* ox, double* oy,
                           double* oz);
  void (*squared_distances)(double px, double py, double pz, const double* xs,
                            const double* ys, const double* zs, size_t n,
                            double* out);
  void (*best_dot)(const double* queries, size_t n, const double* sources,
                   size_t m, size_t dim, double* best_sim, int* best_idx);
};

const Kernels& scalar_kernels();

bool cpu_supports_avx2();

/// AVX2 variant; only valid to call when cpu_supports_avx2() and the build
/// has it compiled in. Returns nullptr otherwise.
const Kernels* avx2_kernels();

/// The active kernel set: AVX2 when available, otherwise scalar. The
/// RIGIDTRAJ_KERNELS environment variable ("scalar" or "avx2") overrides
/// autodetection; force_kernels() does the same programmatically.
const Kernels& active_kernels();
void force_kernels(const char* name);  // nullptr restores autodetection

// Convenience wrappers over the active set.

void transform_points(const Mat3& rotation, const Vec3& translation,
                      const PointsSoA& in, PointsSoA& out);

inline void squared_distances(const Vec3& p, const PointsSoA& pts,
                              double* out) {
  active_kernels().squared_distances(p.x(), p.y(), p.z(), pts.x.data(),
                                     pts.y.data(), pts.z.data(), pts.size(),
                                     out);
}

}  // namespace rigidtraj::kernels
