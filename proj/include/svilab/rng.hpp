#ifndef SVILAB_RNG_HPP
#define SVILAB_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace svilab {

/// One round of the splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Seed of an independent stream, a pure function of (base, index, tag).
/// Monte Carlo trial i always draws from derive_seed(base, i, tag), so results
/// never depend on which worker ran the trial.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index,
                                    std::uint64_t tag = 0) noexcept {
  return mix64(mix64(base ^ mix64(tag)) + mix64(index + 0xD1B54A32D192ED03ull));
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    0x5356494Cu};
  return Engine(seq);
}

/// Gaussian increments N(0, dt) drawn one coordinate at a time.
class IncrementSource {
 public:
  IncrementSource(std::uint64_t seed, double dt)
      : engine_(make_engine(seed)), normal_(0.0, 1.0), scale_(std::sqrt(dt)) {}

  double next() { return scale_ * normal_(engine_); }

 private:
  Engine engine_;
  std::normal_distribution<double> normal_;
  double scale_;
};

}  // namespace svilab

#endif  // SVILAB_RNG_HPP
