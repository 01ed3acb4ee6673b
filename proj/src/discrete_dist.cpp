#include "flashcrowd/discrete_dist.hpp"

#include <cmath>
#include <stdexcept>

namespace flashcrowd {

namespace {

// Inversion by sequential search; expected cost O(n*r + 1), used for n*r < 10.
std::int64_t binomial_inversion(Stream& stream, std::int64_t n, double r) {
  const double q = 1.0 - r;
  const double s = r / q;
  const double a = static_cast<double>(n + 1) * s;
  const double f0 = std::exp(static_cast<double>(n) * std::log1p(-r));
  for (;;) {
    double u = stream.uniform01();
    double f = f0;
    std::int64_t x = 0;
    while (u > f) {
      u -= f;
      ++x;
      if (x > n) break;  // f underflowed; retry with a fresh uniform
      f *= a / static_cast<double>(x) - s;
    }
    if (x <= n) return x;
  }
}

// Hormann's BTRS transformed rejection, valid for n*r >= 10 (r <= 1/2).
std::int64_t binomial_btrs(Stream& stream, std::int64_t n, double r) {
  const double nd = static_cast<double>(n);
  const double q = 1.0 - r;
  const double spq = std::sqrt(nd * r * q);
  const double b = 1.15 + 2.53 * spq;
  const double a = -0.0873 + 0.0248 * b + 0.01 * r;
  const double c = nd * r + 0.5;
  const double vr = 0.92 - 4.2 / b;
  const double alpha = (2.83 + 5.1 / b) * spq;
  const double lpq = std::log(r / q);
  const std::int64_t m = static_cast<std::int64_t>(std::floor((nd + 1.0) * r));
  const double h = std::lgamma(static_cast<double>(m) + 1.0) +
                   std::lgamma(nd - static_cast<double>(m) + 1.0);
  for (;;) {
    const double u = stream.uniform01() - 0.5;
    double v = stream.uniform01();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + c);
    if (kf < 0.0 || kf > nd) continue;
    const std::int64_t k = static_cast<std::int64_t>(kf);
    if (us >= 0.07 && v <= vr) return k;
    v = std::log(v * alpha / (a / (us * us) + b));
    const double kd = static_cast<double>(k);
    if (v <= h - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0) +
                 (kd - static_cast<double>(m)) * lpq)
      return k;
  }
}

// Hormann-style PTRS transformed rejection, valid for lambda >= 10.
std::int64_t poisson_ptrs(Stream& stream, double lambda) {
  const double b = 0.931 + 2.53 * std::sqrt(lambda);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  const double loglam = std::log(lambda);
  for (;;) {
    const double u = stream.uniform01() - 0.5;
    const double v = stream.uniform01();
    const double us = 0.5 - std::fabs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    const double kd = kf;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        kd * loglam - lambda - std::lgamma(kd + 1.0))
      return static_cast<std::int64_t>(kf);
  }
}

std::int64_t poisson_inversion(Stream& stream, double lambda) {
  const double p0 = std::exp(-lambda);
  for (;;) {
    double u = stream.uniform01();
    double f = p0;
    std::int64_t x = 0;
    while (u > f) {
      u -= f;
      ++x;
      if (x > 2000) break;  // unreachable for lambda < 10 short of FP anomaly
      f *= lambda / static_cast<double>(x);
    }
    if (x <= 2000) return x;
  }
}

}  // namespace

std::int64_t binomial_sample(Stream& stream, std::int64_t n, double p) {
  if (n < 0 || !(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("binomial_sample: need n >= 0 and p in [0, 1]");
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  const bool flipped = p > 0.5;
  const double r = flipped ? 1.0 - p : p;
  const std::int64_t k = (static_cast<double>(n) * r < 10.0)
                             ? binomial_inversion(stream, n, r)
                             : binomial_btrs(stream, n, r);
  return flipped ? n - k : k;
}

std::int64_t poisson_sample(Stream& stream, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("poisson_sample: need finite lambda >= 0");
  if (lambda == 0.0) return 0;
  return lambda < 10.0 ? poisson_inversion(stream, lambda)
                       : poisson_ptrs(stream, lambda);
}

}  // namespace flashcrowd
