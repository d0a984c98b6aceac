// rng.hpp - counter-based splitmix64 stream; draw k is a pure function of (seed, k).
#pragma once

#include <cstdint>
#include <vector>
#include <algorithm>
#include <stdexcept>

namespace rrdlab {

inline uint64_t mix64(uint64_t x) {
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  x *= 0xc4ceb9fe1a85ec53ULL;
  x ^= x >> 33;
  return x;
}

// derive an independent stream seed from (master, a, b); used to give each
// (cell, trial) its own stream so aggregation is order- and thread-independent
inline uint64_t derive_stream(uint64_t master, uint64_t a, uint64_t b = 0) {
  return mix64(master ^ mix64(a ^ mix64(b ^ 0x9e3779b97f4a7c15ULL)));
}

struct SplitMix64 {
  uint64_t seed = 0;
  uint64_t ctr = 0;

  SplitMix64() = default;
  explicit SplitMix64(uint64_t s) : seed(s) {}

  uint64_t next() {
    uint64_t z = seed + (++ctr) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // exact uniform on [0, n): rejection below 2^64 mod n keeps it unbiased
  uint64_t below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("below(0)");
    uint64_t thresh = (0 - n) % n;
    for (;;) {
      uint64_t r = next();
      if (r >= thresh) return r % n;
    }
  }

  int range(int lo, int hi) {  // inclusive ends
    return lo + (int)below((uint64_t)(hi - lo + 1));
  }

  bool coin() { return (next() >> 63) != 0; }

  double u01() { return (double)(next() >> 11) * 0x1.0p-53; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

  // k distinct elements of pool, uniform, order random (partial Fisher-Yates)
  std::vector<int> subset(const std::vector<int>& pool, size_t k) {
    if (k > pool.size()) throw std::invalid_argument("subset: k > pool");
    std::vector<int> v = pool;
    for (size_t i = 0; i < k; ++i) std::swap(v[i], v[i + below(v.size() - i)]);
    v.resize(k);
    std::sort(v.begin(), v.end());
    return v;
  }
};

}  // namespace rrdlab
