#include "flashcrowd/rng.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace flashcrowd {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kStreamSalt = 0xC2B2AE3D27D4EB4FULL;

std::uint64_t splitmix64_next(std::uint64_t& z) {
  z += kGolden;
  std::uint64_t x = z;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

Stream::Stream(SeedSpec spec) : seed_(spec) {
  std::uint64_t z = mix64(spec.master_seed ^ kGolden);
  z ^= mix64(spec.stream_id ^ kStreamSalt);
  for (auto& s : state_) s = splitmix64_next(z);
  if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
}

std::uint64_t Stream::next_u64() {
  const std::uint64_t result = std::rotl(state_[0] + state_[3], 23) + state_[0];
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = std::rotl(state_[3], 45);
  ++draws_;
  return result;
}

double Stream::uniform01() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double exp_from_uniform(double u, double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate))
    throw std::invalid_argument("exp_from_uniform: rate must be positive and finite");
  return -std::log(1.0 - u) / rate;
}

double Stream::exp_sample(double rate) { return exp_from_uniform(uniform01(), rate); }

}  // namespace flashcrowd
