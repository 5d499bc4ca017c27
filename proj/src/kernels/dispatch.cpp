// Copyright (C) 2026 rigidtraj contributors
// SPDX-License-Identifier: Apache-2.0
//
#include <atomic>
#include <cstdlib>
#include <cstring>

#include "rigidtraj/kernels.hpp"

namespace rigidtraj::kernels {

bool cpu_supports_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

namespace {

std::atomic<const Kernels*> g_forced{nullptr};

const Kernels* autodetect() {
  if (const char* env = std::getenv("RIGIDTRAJ_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return &scalar_kernels();
    if (std::strcmp(env, "avx2") == 0 && cpu_supports_avx2() &&
        avx2_kernels() != nullptr) {
      return avx2_kernels();
    }
  }
  if (cpu_supports_avx2() && avx2_kernels() != nullptr) {
    return avx2_kernels();
  }
  return &scalar_kernels();
}

}  // namespace

const Kernels& active_kernels() {
  if (const Kernels* forced = g_forced.load(std::memory_order_relaxed)) {
    return *forced;
  }
  static const Kernels* detected = autodetect();
  return *detected;
}

void force_kernels(const char* name) {
  if (name == nullptr) {
    g_forced.store(nullptr, std::memory_order_relaxed);
    return;
  }
  if (std::strcmp(name, "avx2") == 0 && cpu_supports_avx2() &&
      avx2_kernels() != nullptr) {
    g_forced.store(avx2_kernels(), std::memory_order_relaxed);
  } else {
    g_forced.store(&scalar_kernels(), std::memory_order_relaxed);
  }
}

void transform_points(const Mat3& rotation, const Vec3& translation,
                      const PointsSoA& in, PointsSoA& out) {
  const size_t n = in.size();
  out.x.resize(n);
  out.y.resize(n);
  out.z.resize(n);
  double rot[9];
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      rot[r * 3 + c] = rotation(r, c);
    }
  }
  const double trans[3] = {translation.x(), translation.y(), translation.z()};
  active_kernels().transform_points(rot, trans, in.x.data(), in.y.data(),
                                    in.z.data(), n, out.x.data(),
                                    out.y.data(), out.z.data());
}

}  // namespace rigidtraj::kernels
