#pragma once

#include <array>
#include <cstdint>

namespace flashcrowd {

// Identifies one reproducible draw sequence. Any (master_seed, stream_id)
// pair maps to the same bit-exact sequence on every platform.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;
};

// MurmurHash3 64-bit finalizer. Bijective avalanche mix; also used to fold
// grid coordinates into stream ids (see campaign).
constexpr std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 33;
  x *= 0xFF51AFD7ED558CCDULL;
  x ^= x >> 33;
  x *= 0xC4CEB9FE1A85EC53ULL;
  x ^= x >> 33;
  return x;
}

// Inverse-CDF exponential: -log(1 - u) / rate for u in (0,1).
// Exactly one uniform per variate, so draw counts are deterministic.
// Throws std::invalid_argument unless rate > 0 and finite.
double exp_from_uniform(double u, double rate);

// xoshiro256++ generator with splitmix64/mix64 seeding. Single-owner:
// copying is disabled so two call sites can never replay the same draws
// by accident; use derive_stream with distinct stream_ids instead.
//
// Seeding (documented so any implementation can reproduce it bit-exactly):
//   z  = mix64(master_seed ^ 0x9E3779B97F4A7C15)
//   z ^= mix64(stream_id  ^ 0xC2B2AE3D27D4EB4F)
//   state[i] = splitmix64_next(z)  for i = 0..3, where splitmix64_next
//   advances z by 0x9E3779B97F4A7C15 and finalizes with the constants
//   0xBF58476D1CE4E5B9 / 0x94D049BB133111EB (shifts 30, 27, 31).
//   An all-zero state (probability 2^-256) falls back to state[0] = 1.
//
// uniform01 maps the top 53 bits k of next_u64 to (k + 0.5) * 2^-53,
// which lies strictly inside (0, 1).
class Stream {
 public:
  explicit Stream(SeedSpec spec);

  Stream(const Stream&) = delete;
  Stream& operator=(const Stream&) = delete;
  Stream(Stream&&) = default;
  Stream& operator=(Stream&&) = default;

  std::uint64_t next_u64();
  double uniform01();
  double exp_sample(double rate);

  // Total draws so far; increases by exactly one per next_u64/uniform01/
  // exp_sample call.
  std::uint64_t draws() const { return draws_; }
  SeedSpec seed() const { return seed_; }

 private:
  std::array<std::uint64_t, 4> state_;
  std::uint64_t draws_ = 0;
  SeedSpec seed_;
};

inline Stream derive_stream(SeedSpec spec) { return Stream(spec); }

}  // namespace flashcrowd
