#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace pspin {

/// Identifies the generator family recorded in tensor provenance.
inline constexpr std::string_view kGeneratorId = "philox4x32-10/box-muller";

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Uniform double in the open interval (0, 1) from 53 random bits.
inline double to_unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Stateless access: the i-th standard normal of the stream keyed by `seed`.
/// Used for tensor entries so any entry can be generated independently.
double normal_at(std::uint64_t seed, std::uint64_t index);

/// Child seed for replica `index` of experiment `tag`.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::uint64_t index = 0);

std::uint64_t splitmix64(std::uint64_t x);

/// Sequential counter-based stream. Satisfies UniformRandomBitGenerator.
class CounterStream {
 public:
  using result_type = std::uint64_t;

  explicit CounterStream(std::uint64_t seed) : seed_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();

  double uniform() { return to_unit_open((*this)()); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int used_ = 4;  // 64-bit words are taken two lanes at a time
};

}  // namespace pspin
