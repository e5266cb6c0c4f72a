#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace fdodmd {

// Counter-based generator: every draw is a pure function of
// (seed, stream, index, subindex), so samples can be produced in any order
// or in parallel and still come out bitwise identical.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t seed) noexcept : seed_(seed) {}

  constexpr std::uint64_t seed() const noexcept { return seed_; }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  constexpr std::uint64_t bits(std::uint64_t stream, std::uint64_t index,
                               std::uint64_t subindex = 0) const noexcept {
    std::uint64_t h = mix(seed_ ^ mix(stream));
    h = mix(h ^ index);
    return mix(h ^ mix(subindex + 0x632be59bd9b4e019ULL));
  }

  /// Uniform on the open interval (0, 1).
  constexpr double uniform(std::uint64_t stream, std::uint64_t index,
                           std::uint64_t subindex = 0) const noexcept {
    return (static_cast<double>(bits(stream, index, subindex) >> 11) + 0.5) *
           0x1.0p-53;
  }

  /// Standard normal via Box-Muller on two dedicated counter slots.
  double normal(std::uint64_t stream, std::uint64_t index) const noexcept {
    const double u1 = uniform(stream, index, 0);
    const double u2 = uniform(stream, index, 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Independent generator for a sub-experiment (e.g. one Monte-Carlo trial).
  constexpr CounterRng derive(std::uint64_t child) const noexcept {
    return CounterRng(mix(seed_ ^ mix(child ^ 0xd1b54a32d192ed03ULL)));
  }

 private:
  std::uint64_t seed_;
};

}  // namespace fdodmd
