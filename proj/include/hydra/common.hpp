// Copyright (c) 2026 The hydrabench authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace hydra {

// ============================================================================
// Errors
// ============================================================================

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define HYDRA_DEFINE_ERROR(NAME)                \
  struct NAME : Error {                         \
    using Error::Error;                         \
  }

HYDRA_DEFINE_ERROR(CalibrationInvalid);
HYDRA_DEFINE_ERROR(NonPositiveDepth);
HYDRA_DEFINE_ERROR(SingularHomography);
HYDRA_DEFINE_ERROR(AnchorNotVisible);
HYDRA_DEFINE_ERROR(DegenerateRig);
HYDRA_DEFINE_ERROR(RectOutOfBounds);
HYDRA_DEFINE_ERROR(ConfigInvalid);
HYDRA_DEFINE_ERROR(IoError);
HYDRA_DEFINE_ERROR(SchemaMismatch);
HYDRA_DEFINE_ERROR(ShapeMismatch);
HYDRA_DEFINE_ERROR(Diverged);
HYDRA_DEFINE_ERROR(NonFiniteGradient);
HYDRA_DEFINE_ERROR(BadSize);
HYDRA_DEFINE_ERROR(EmptyPlacementList);
HYDRA_DEFINE_ERROR(DimensionMismatch);
HYDRA_DEFINE_ERROR(WrongVictim);
HYDRA_DEFINE_ERROR(NoGroundTruth);
HYDRA_DEFINE_ERROR(EmptyResults);

#undef HYDRA_DEFINE_ERROR

// ============================================================================
// Deterministic PRNG
//
// SplitMix64 (Steele, Lea, Flood 2014): state advances by the golden-ratio
// increment 0x9E3779B97F4A7C15, output is a finalizing mix of the state.
// Portable by construction; every random draw in this library goes through
// this generator so datasets and attacks reproduce bit-exactly per seed.
// ============================================================================

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit mantissa.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Lemire multiply-shift; bias is negligible for the bounds used here.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  // Irwin-Hall approximation: sum of 12 uniforms minus 6 is close enough to
  // N(0,1) for sensor noise, and needs no libm call.
  double normal() {
    double s = 0.0;
    for (int i = 0; i < 12; ++i) s += uniform();
    return s - 6.0;
  }

 private:
  std::uint64_t state_;
};

// Derives an independent stream from (seed, salt...) without correlation.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  Rng r(a ^ (b * 0xD1B54A32D192ED03ULL + 0x9E3779B97F4A7C15ULL));
  return r.next_u64();
}

// ============================================================================
// Content hashing (FNV-1a 64-bit), used for artifact provenance manifests.
// ============================================================================

inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xCBF29CE484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline std::string hash_hex(std::uint64_t h) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[static_cast<std::size_t>(i)] = digits[h & 0xF];
    h >>= 4;
  }
  return s;
}

// ============================================================================
// Bounded worker pool
// ============================================================================

inline int worker_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* cap = std::getenv("HYDRA_BENCH_THREADS")) {
    int c = std::atoi(cap);
    if (c >= 1 && c < hw) hw = c;
  }
  return hw;
}

// Runs fn(i) for i in [0, n). Results must be written to preallocated,
// index-addressed slots so the reduction order stays deterministic.
template <typename Fn>
void parallel_for(int n, Fn&& fn) {
  const int workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      for (int i = t; i < n; i += workers) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

inline double clamp01(double x) { return x < 0.0 ? 0.0 : (x > 1.0 ? 1.0 : x); }

}  // namespace hydra
