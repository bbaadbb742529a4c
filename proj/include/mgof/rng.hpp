#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include "mgof/errors.hpp"

namespace mgof {

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t mix64(std::uint64_t x) noexcept { return splitmix64(x); }

// xoshiro256** (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed) noexcept {
    for (auto& w : s_) w = splitmix64(seed);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform on {0, ..., range - 1}; Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t range) noexcept {
    __uint128_t m = static_cast<__uint128_t>((*this)()) * range;
    auto low = static_cast<std::uint64_t>(m);
    if (low < range) {
      const std::uint64_t threshold = (0 - range) % range;
      while (low < threshold) {
        m = static_cast<__uint128_t>((*this)()) * range;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> s_{};
};

// Master seed plus a stream id naming an experiment component. Replicate i of a stream gets
// its own generator derived from (master, stream, i), so results never depend on scheduling.
struct SeedSpec {
  std::uint64_t master = 20240601;
  std::uint64_t stream = 0;

  Xoshiro256 replicate(std::uint64_t i) const noexcept {
    std::uint64_t key = mix64(master);
    key = mix64(key ^ mix64(stream + 0x632be59bd9b4e019ULL));
    key = mix64(key ^ mix64(i + 0x85157af5ULL));
    return Xoshiro256(key);
  }

  // Child stream for a named role, stable across runs.
  SeedSpec substream(std::string_view role) const noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : role) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    return {master, mix64(stream ^ h)};
  }

  std::string to_string() const { return std::to_string(master) + ":" + std::to_string(stream); }

  static SeedSpec parse(std::string_view text) {
    const auto colon = text.find(':');
    auto parse_u64 = [&](std::string_view s) -> std::uint64_t {
      if (s.empty()) throw InvalidArgument("bad seed spec '" + std::string(text) + "'");
      std::uint64_t v = 0;
      for (char c : s) {
        if (c < '0' || c > '9') throw InvalidArgument("bad seed spec '" + std::string(text) + "'");
        const std::uint64_t next = v * 10 + static_cast<std::uint64_t>(c - '0');
        if (next / 10 != v) throw InvalidArgument("seed out of range in '" + std::string(text) + "'");
        v = next;
      }
      return v;
    };
    if (colon == std::string_view::npos) return {parse_u64(text), 0};
    return {parse_u64(text.substr(0, colon)), parse_u64(text.substr(colon + 1))};
  }

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

}  // namespace mgof
