#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace semlabels {

// Portable seeded stream. The standard distributions are implementation
// defined, so uniform/normal/shuffle are derived from the raw 64-bit engine
// output here to keep results identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t NextU64() { return engine_(); }

  // [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Box-Muller; the second variate is cached.
  double Normal();

  // Uniform integer in [0, n) by rejection.
  std::uint64_t Below(std::uint64_t n);

  template <typename T>
  void Shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(Below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace semlabels
