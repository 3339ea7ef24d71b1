#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace hddrul {

// Derives a child seed from a root seed and a label such as
// "train/bilstm-15/shuffle/epoch-7". Pure function of its inputs, so the
// seeding topology is reproducible across runs and implementations.
std::uint64_t derive_seed(std::uint64_t root, std::string_view label);

// mt19937_64 is bit-exact across standard libraries; the distributions in
// <random> are not, so the conversions below are spelled out.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (one value per call, no caching).
  double normal();

  // Uniform integer in [0, n). n must be > 0.
  std::size_t below(std::size_t n);

 private:
  std::mt19937_64 engine_;
};

template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = rng.below(i);
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace hddrul
