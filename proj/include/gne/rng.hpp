#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace gne {

/// Seeded random stream with a fixed, portable algorithm.
///
/// The engine is std::mt19937_64, whose output sequence is fully specified by
/// the C++ standard. The standard distributions are not (their algorithms are
/// implementation-defined), so every real or integer draw is mapped from the
/// raw 64-bit output here:
///
///   uniform()   = (raw >> 11) * 2^-53            in [0, 1)
///   below(n)    = floor(uniform() * n)           in {0, ..., n-1}
///   pick(cum)   = first i with uniform() < cum[i]
///
/// Any implementation reproducing these three mappings on top of MT19937-64
/// reproduces every seeded trace of this library bit for bit.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t below(std::uint64_t n) {
    auto k = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    return k < n ? k : n - 1;
  }

  /// Index drawn from a cumulative distribution (last entry should be 1).
  std::size_t pick(std::span<const double> cumulative) {
    const double u = uniform();
    for (std::size_t i = 0; i < cumulative.size(); ++i) {
      if (u < cumulative[i]) return i;
    }
    return cumulative.size() - 1;
  }

  /// Fisher-Yates with below(); std::shuffle is implementation-defined.
  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 finalizer; derives independent sub-seeds from (seed, stream).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace gne
