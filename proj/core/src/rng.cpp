#include "pspin/rng.hpp"

#include <cmath>
#include <numbers>

namespace pspin {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

std::array<std::uint32_t, 4> philox_round(std::array<std::uint32_t, 4> c,
                                          std::array<std::uint32_t, 2> k) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * c[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * c[2];
  const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const auto lo0 = static_cast<std::uint32_t>(p0);
  const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const auto lo1 = static_cast<std::uint32_t>(p1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

std::array<std::uint32_t, 2> key_of(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed),
          static_cast<std::uint32_t>(seed >> 32)};
}

std::array<std::uint32_t, 4> counter_of(std::uint64_t index) {
  return {static_cast<std::uint32_t>(index),
          static_cast<std::uint32_t>(index >> 32), 0u, 0u};
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Box-Muller, cosine branch only.
double box_muller(std::uint64_t a, std::uint64_t b) {
  const double u1 = to_unit_open(a);
  const double u2 = to_unit_open(b);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    counter = philox_round(counter, key);
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return counter;
}

double normal_at(std::uint64_t seed, std::uint64_t index) {
  const auto block = philox4x32(counter_of(index), key_of(seed));
  const std::uint64_t a = (static_cast<std::uint64_t>(block[0]) << 32) | block[1];
  const std::uint64_t b = (static_cast<std::uint64_t>(block[2]) << 32) | block[3];
  return box_muller(a, b);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                          std::uint64_t index) {
  return splitmix64(splitmix64(master ^ fnv1a(tag)) + splitmix64(index));
}

CounterStream::result_type CounterStream::operator()() {
  if (used_ >= 4) {
    block_ = philox4x32(counter_of(counter_++), key_of(seed_));
    used_ = 0;
  }
  const std::uint64_t hi = block_[used_];
  const std::uint64_t lo = block_[used_ + 1];
  used_ += 2;
  return (hi << 32) | lo;
}

double CounterStream::normal() {
  const std::uint64_t a = (*this)();
  const std::uint64_t b = (*this)();
  return box_muller(a, b);
}

}  // namespace pspin
