#pragma once

#include <cstdint>

#include "flashcrowd/rng.hpp"

namespace flashcrowd {

// Binomial(n, p) variate. Sequential inversion (BINV) when n*min(p,1-p) < 10,
// Hormann's BTRS transformed rejection otherwise. Result is a pure function of
// the stream state; the number of uniforms consumed varies per call.
// Throws std::invalid_argument for n < 0 or p outside [0, 1].
std::int64_t binomial_sample(Stream& stream, std::int64_t n, double p);

// Poisson(lambda) variate. Sequential inversion for lambda < 10, Hormann-style
// PTRS transformed rejection otherwise.
// Throws std::invalid_argument for negative or non-finite lambda.
std::int64_t poisson_sample(Stream& stream, double lambda);

}  // namespace flashcrowd
