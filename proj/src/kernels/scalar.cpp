// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
// Reference kernels. These define the arithmetic contract the SIMD variants
// must reproduce exactly; keep the operation order in sync with avx2.cpp.
#include <cstddef>

#include "rigidtraj/kernels.hpp"

namespace rigidtraj::kernels {

namespace {

void transform_points_scalar(const double* rot, const double* trans,
                             const double* xs, const double* ys,
                             const double* zs, size_t n, double* ox,
                             double* oy, double* oz) {
  for (size_t i = 0; i < n; ++i) {
    const double x = xs[i], y = ys[i], z = zs[i];
    ox[i] = ((rot[0] * x + rot[1] * y) + (rot[2] * z + trans[0]));
    oy[i] = ((rot[3] * x + rot[4] * y) + (rot[5] * z + trans[1]));
    oz[i] = ((rot[6] * x + rot[7] * y) + (rot[8] * z + trans[2]));
  }
}

void squared_distances_scalar(double px, double py, double pz,
                              const double* xs, const double* ys,
                              const double* zs, size_t n, double* out) {
  for (size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - px;
    const double dy = ys[i] - py;
    const double dz = zs[i] - pz;
    out[i] = ((dx * dx) + (dy * dy)) + (dz * dz);
  }
}

void best_dot_scalar(const double* queries, size_t n, const double* sources,
                     size_t m, size_t dim, double* best_sim, int* best_idx) {
  for (size_t i = 0; i < n; ++i) {
    const double* q = queries + i * dim;
    double best = -2.0;  // cosine values live in [-1, 1]
    int best_j = -1;
    for (size_t j = 0; j < m; ++j) {
      const double* s = sources + j * dim;
      double acc[4] = {0.0, 0.0, 0.0, 0.0};
      for (size_t k = 0; k < dim; ++k) {
        acc[k % 4] += q[k] * s[k];
      }
      const double dot = (acc[0] + acc[1]) + (acc[2] + acc[3]);
      if (dot > best) {
        best = dot;
        best_j = static_cast<int>(j);
      }
    }
    best_sim[i] = best;
    best_idx[i] = best_j;
  }
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels k = {"scalar", transform_points_scalar,
                            squared_distances_scalar, best_dot_scalar};
  return k;
}

}  // namespace rigidtraj::kernels
