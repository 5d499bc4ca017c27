// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
// AVX2 variants of the reference kernels in scalar.cpp. Same arithmetic
// contract: plain mul/add (no FMA), same association, same lane-wise
// accumulation for reductions, so outputs are bit-identical to scalar.
#include "rigidtraj/kernels.hpp"

#if defined(RIGIDTRAJ_HAVE_AVX2)

#include <immintrin.h>

namespace rigidtraj::kernels {

namespace {

void transform_points_avx2(const double* rot, const double* trans,
                           const double* xs, const double* ys,
                           const double* zs, size_t n, double* ox, double* oy,
                           double* oz) {
  const __m256d r0 = _mm256_set1_pd(rot[0]), r1 = _mm256_set1_pd(rot[1]),
                r2 = _mm256_set1_pd(rot[2]), r3 = _mm256_set1_pd(rot[3]),
                r4 = _mm256_set1_pd(rot[4]), r5 = _mm256_set1_pd(rot[5]),
                r6 = _mm256_set1_pd(rot[6]), r7 = _mm256_set1_pd(rot[7]),
                r8 = _mm256_set1_pd(rot[8]);
  const __m256d t0 = _mm256_set1_pd(trans[0]), t1 = _mm256_set1_pd(trans[1]),
                t2 = _mm256_set1_pd(trans[2]);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_loadu_pd(xs + i);
    const __m256d y = _mm256_loadu_pd(ys + i);
    const __m256d z = _mm256_loadu_pd(zs + i);
    _mm256_storeu_pd(
        ox + i,
        _mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(r0, x), _mm256_mul_pd(r1, y)),
            _mm256_add_pd(_mm256_mul_pd(r2, z), t0)));
    _mm256_storeu_pd(
        oy + i,
        _mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(r3, x), _mm256_mul_pd(r4, y)),
            _mm256_add_pd(_mm256_mul_pd(r5, z), t1)));
    _mm256_storeu_pd(
        oz + i,
        _mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(r6, x), _mm256_mul_pd(r7, y)),
            _mm256_add_pd(_mm256_mul_pd(r8, z), t2)));
  }
  for (; i < n; ++i) {
    const double x = xs[i], y = ys[i], z = zs[i];
    ox[i] = ((rot[0] * x + rot[1] * y) + (rot[2] * z + trans[0]));
    oy[i] = ((rot[3] * x + rot[4] * y) + (rot[5] * z + trans[1]));
    oz[i] = ((rot[6] * x + rot[7] * y) + (rot[8] * z + trans[2]));
  }
}

void squared_distances_avx2(double px, double py, double pz, const double* xs,
                            const double* ys, const double* zs, size_t n,
                            double* out) {
  const __m256d vx = _mm256_set1_pd(px);
  const __m256d vy = _mm256_set1_pd(py);
  const __m256d vz = _mm256_set1_pd(pz);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), vx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), vy);
    const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(zs + i), vz);
    _mm256_storeu_pd(
        out + i,
        _mm256_add_pd(
            _mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)),
            _mm256_mul_pd(dz, dz)));
  }
  for (; i < n; ++i) {
    const double dx = xs[i] - px;
    const double dy = ys[i] - py;
    const double dz = zs[i] - pz;
    out[i] = ((dx * dx) + (dy * dy)) + (dz * dz);
  }
}

void best_dot_avx2(const double* queries, size_t n, const double* sources,
                   size_t m, size_t dim, double* best_sim, int* best_idx) {
  const size_t body = dim - dim % 4;
  for (size_t i = 0; i < n; ++i) {
    const double* q = queries + i * dim;
    double best = -2.0;
    int best_j = -1;
    for (size_t j = 0; j < m; ++j) {
      const double* s = sources + j * dim;
      __m256d vacc = _mm256_setzero_pd();
      for (size_t k = 0; k < body; k += 4) {
        vacc = _mm256_add_pd(
            vacc, _mm256_mul_pd(_mm256_loadu_pd(q + k), _mm256_loadu_pd(s + k)));
      }
      alignas(32) double acc[4];
      _mm256_store_pd(acc, vacc);
      for (size_t k = body; k < dim; ++k) {
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

const Kernels* avx2_kernels() {
  static const Kernels k = {"avx2", transform_points_avx2,
                            squared_distances_avx2, best_dot_avx2};
  return &k;
}

}  // namespace rigidtraj::kernels

#else

namespace rigidtraj::kernels {
const Kernels* avx2_kernels() { return nullptr; }
}  // namespace rigidtraj::kernels

#endif  // RIGIDTRAJ_HAVE_AVX2
