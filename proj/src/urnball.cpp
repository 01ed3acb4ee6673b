#include "flashcrowd/urnball.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "flashcrowd/compensated.hpp"
#include "flashcrowd/discrete_dist.hpp"

namespace flashcrowd {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

std::optional<std::int64_t> first_low_urn(const Occupancy& occ, std::int64_t max_count) {
  for (std::int64_t i = 0; i < occ.k_max(); ++i) {
    if (occ.eta[static_cast<std::size_t>(i)] <= max_count) return i + 1;
  }
  return std::nullopt;
}

std::int64_t count_empty_upto(const Occupancy& occ, std::int64_t k) {
  if (k < 0 || k > occ.k_max()) throw std::out_of_range("count_empty_upto: k out of range");
  std::int64_t w = 0;
  for (std::int64_t i = 0; i < k; ++i) {
    if (occ.eta[static_cast<std::size_t>(i)] == 0) ++w;
  }
  return w;
}

std::int64_t nu3_index(const Occupancy& occ, double rho) {
  require(rho > 0.0 && std::isfinite(rho), "nu3_index: rho must be positive");
  std::int64_t behind = occ.n_balls;  // balls in urns > x, plus overflow
  for (std::int64_t x = 1; x <= occ.k_max(); ++x) {
    behind -= occ.eta[static_cast<std::size_t>(x - 1)];
    if (static_cast<double>(behind) * rho < static_cast<double>(x)) return x;
  }
  // Beyond the prefix only overflow remains and it no longer shrinks.
  std::int64_t x = occ.k_max() + 1;
  double need = static_cast<double>(occ.overflow) * rho;
  if (static_cast<double>(x) > need) return x;
  return static_cast<std::int64_t>(std::floor(need)) + 1;
}

RandomUrnRealization::RandomUrnRealization(double rho, Stream stream)
    : rho_(rho), stream_(std::move(stream)) {
  require(rho > 0.0 && std::isfinite(rho), "RandomUrnRealization: rho must be positive");
  t_.push_back(0.0);
}

void RandomUrnRealization::ensure(std::int64_t k) {
  while (k_max() < k) {
    std::int64_t n = k_max() + 1;
    double e = stream_.exp_sample(1.0);
    double t_prev = t_.back();
    e_.push_back(e);
    t_.push_back(t_prev + e / static_cast<double>(n));
    // P_n = e^{-rho T_{n-1}} (1 - e^{-rho E_n / n})
    p_.push_back(std::exp(-rho_ * t_prev) * (-std::expm1(-rho_ * e / static_cast<double>(n))));
  }
}

void RandomUrnRealization::check_index(std::int64_t n, std::int64_t lo) const {
  if (n < lo || n > k_max()) {
    throw std::out_of_range("RandomUrnRealization: index " + std::to_string(n) +
                            " outside realized prefix [" + std::to_string(lo) + ", " +
                            std::to_string(k_max()) + "]");
  }
}

double RandomUrnRealization::T(std::int64_t n) const {
  check_index(n, 0);
  return t_[static_cast<std::size_t>(n)];
}

double RandomUrnRealization::E(std::int64_t n) const {
  check_index(n, 1);
  return e_[static_cast<std::size_t>(n - 1)];
}

double RandomUrnRealization::P(std::int64_t n) const {
  check_index(n, 1);
  return p_[static_cast<std::size_t>(n - 1)];
}

double RandomUrnRealization::X(std::int64_t n) const {
  check_index(n, 0);
  double tn = t_[static_cast<std::size_t>(n)];
  return std::exp(rho_ * (std::log(static_cast<double>(n + 1)) - tn));
}

double RandomUrnRealization::Z(std::int64_t n) const {
  check_index(n, 1);
  double e = e_[static_cast<std::size_t>(n - 1)];
  return (static_cast<double>(n) / rho_) * (-std::expm1(-rho_ * e / static_cast<double>(n)));
}

double RandomUrnRealization::truncated_mass(std::int64_t k) const {
  check_index(k, 0);
  return -std::expm1(-rho_ * t_[static_cast<std::size_t>(k)]);
}

RandomUrnRealization realize_random_urns(double rho, std::int64_t k_max, Stream stream) {
  RandomUrnRealization r(rho, std::move(stream));
  r.ensure(k_max);
  return r;
}

double time_of_index(const RandomUrnRealization& r, std::int64_t n) { return r.T(n); }

namespace {

// Walks sorted positions through the interval sequence, extending lazily.
// Position x lands in urn n iff T_{n-1} < x <= T_n.
Occupancy place_sorted_positions(const std::vector<double>& sorted_pos,
                                 RandomUrnRealization& r) {
  Occupancy occ;
  occ.n_balls = static_cast<std::int64_t>(sorted_pos.size());
  std::int64_t n = 1;
  for (double x : sorted_pos) {
    r.ensure(n);
    while (r.T(n) < x) {
      ++n;
      r.ensure(n);
    }
    if (static_cast<std::int64_t>(occ.eta.size()) < n) occ.eta.resize(static_cast<std::size_t>(n), 0);
    ++occ.eta[static_cast<std::size_t>(n - 1)];
  }
  occ.eta.resize(static_cast<std::size_t>(r.k_max()), 0);
  return occ;
}

}  // namespace

Occupancy place_balls(std::int64_t n_balls, RandomUrnRealization& r, Stream& ball_stream) {
  require(n_balls >= 0, "place_balls: n_balls must be nonnegative");
  std::vector<double> pos(static_cast<std::size_t>(n_balls));
  for (auto& x : pos) x = ball_stream.exp_sample(r.rho());
  std::sort(pos.begin(), pos.end());
  return place_sorted_positions(pos, r);
}

RandomThrow throw_balls_random(std::int64_t n_balls, double rho, Stream stream,
                               bool poissonized) {
  require(n_balls >= 0, "throw_balls_random: n_balls must be nonnegative");
  require(rho > 0.0 && std::isfinite(rho), "throw_balls_random: rho must be positive");
  if (poissonized) n_balls = poisson_sample(stream, static_cast<double>(n_balls));
  // Ball positions first, then the same stream drives the interval race.
  std::vector<double> pos(static_cast<std::size_t>(n_balls));
  for (auto& x : pos) x = stream.exp_sample(rho);
  std::sort(pos.begin(), pos.end());
  RandomUrnRealization r(rho, std::move(stream));
  Occupancy occ = place_sorted_positions(pos, r);
  return RandomThrow{std::move(occ), std::move(r)};
}

namespace {

// zeta(delta, 1 + s) = sum_{n>=1} (n+s)^{-delta} by partial sum plus
// Euler-Maclaurin tail; accurate to ~1e-15 for delta > 1.
double shifted_zeta(double delta, double s) {
  constexpr std::int64_t kCut = 2000;
  CompensatedSum acc;
  for (std::int64_t n = 1; n <= kCut; ++n) {
    acc.add(std::pow(static_cast<double>(n) + s, -delta));
  }
  double m = static_cast<double>(kCut) + s;
  double tail = std::pow(m, 1.0 - delta) / (delta - 1.0) + 0.5 * std::pow(m, -delta) +
                delta * std::pow(m, -delta - 1.0) / 12.0 -
                delta * (delta + 1.0) * (delta + 2.0) * std::pow(m, -delta - 3.0) / 720.0;
  return acc.value() + tail;
}

}  // namespace

DetUrnProfile::DetUrnProfile(double alpha, double delta) : alpha_(alpha), delta_(delta) {
  require(alpha > 0.0 && std::isfinite(alpha), "DetUrnProfile: alpha must be positive");
  require(delta > 1.0 && std::isfinite(delta), "DetUrnProfile: delta must exceed 1");
  double total = alpha * shifted_zeta(delta, 0.0);
  if (total <= 1.0) {
    shift_ = 0.0;
    tail_mass_ = 1.0 - total;
  } else {
    // alpha * zeta(delta, 1+s) is continuous and decreasing in s; bisect.
    double lo = 0.0, hi = 1.0;
    while (alpha * shifted_zeta(delta, hi) > 1.0) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-16 * (1.0 + hi); ++it) {
      double mid = 0.5 * (lo + hi);
      (alpha * shifted_zeta(delta, mid) > 1.0 ? lo : hi) = mid;
    }
    shift_ = 0.5 * (lo + hi);
    tail_mass_ = 0.0;
  }
  prefix_.push_back(0.0);
}

double DetUrnProfile::q(std::int64_t n) const {
  if (n < 1) throw std::out_of_range("DetUrnProfile::q: n must be >= 1");
  return alpha_ * std::pow(static_cast<double>(n) + shift_, -delta_);
}

double DetUrnProfile::prefix_mass(std::int64_t k) const {
  if (k < 0) throw std::out_of_range("DetUrnProfile::prefix_mass: k must be >= 0");
  while (static_cast<std::int64_t>(prefix_.size()) <= k) {
    std::int64_t n = static_cast<std::int64_t>(prefix_.size());
    double x = q(n);
    double sum = prefix_.back();
    double t = sum + x;
    prefix_comp_ += (std::abs(sum) >= std::abs(x)) ? (sum - t) + x : (x - t) + sum;
    prefix_.push_back(t);
  }
  return std::min(prefix_[static_cast<std::size_t>(k)] + prefix_comp_, 1.0);
}

namespace {

// Core of the sequential conditioning: occ.eta already covers urns
// 1..occ.k_max(); appends urns occ.k_max()+1 .. new_k_max, drawing
// Binomial(remaining, q_i / mass_not_yet_placed) per urn. No randomness is
// consumed once the remaining count hits zero.
template <typename QFn, typename PrefixFn>
void extend_det_core(Occupancy& occ, QFn q_of, PrefixFn prefix_of, Stream& stream,
                     std::int64_t new_k_max) {
  std::int64_t remaining = occ.overflow;
  for (std::int64_t i = occ.k_max() + 1; i <= new_k_max; ++i) {
    std::int64_t c = 0;
    if (remaining > 0) {
      double denom = 1.0 - prefix_of(i - 1);
      double p = denom > 0.0 ? std::min(1.0, q_of(i) / denom) : 1.0;
      c = binomial_sample(stream, remaining, p);
    }
    occ.eta.push_back(c);
    remaining -= c;
  }
  occ.overflow = remaining;
}

}  // namespace

Occupancy throw_balls_det(std::int64_t n_balls, const DetUrnProfile& profile, Stream& stream,
                          std::int64_t k_max, bool poissonized) {
  require(n_balls >= 0, "throw_balls_det: n_balls must be nonnegative");
  require(k_max >= 0, "throw_balls_det: k_max must be nonnegative");
  if (poissonized) n_balls = poisson_sample(stream, static_cast<double>(n_balls));
  Occupancy occ;
  occ.n_balls = n_balls;
  occ.overflow = n_balls;
  occ.eta.reserve(static_cast<std::size_t>(k_max));
  extend_det_core(
      occ, [&](std::int64_t i) { return profile.q(i); },
      [&](std::int64_t k) { return profile.prefix_mass(k); }, stream, k_max);
  return occ;
}

Occupancy throw_balls_det(std::int64_t n_balls, const std::vector<double>& q, Stream& stream,
                          bool poissonized) {
  require(n_balls >= 0, "throw_balls_det: n_balls must be nonnegative");
  if (poissonized) n_balls = poisson_sample(stream, static_cast<double>(n_balls));
  std::vector<double> prefix(q.size() + 1, 0.0);
  CompensatedSum acc;
  for (std::size_t i = 0; i < q.size(); ++i) {
    require(q[i] >= 0.0 && q[i] <= 1.0, "throw_balls_det: probabilities must lie in [0, 1]");
    acc.add(q[i]);
    prefix[i + 1] = std::min(acc.value(), 1.0);
  }
  Occupancy occ;
  occ.n_balls = n_balls;
  occ.overflow = n_balls;
  occ.eta.reserve(q.size());
  extend_det_core(
      occ, [&](std::int64_t i) { return q[static_cast<std::size_t>(i - 1)]; },
      [&](std::int64_t k) { return prefix[static_cast<std::size_t>(k)]; }, stream,
      static_cast<std::int64_t>(q.size()));
  return occ;
}

void extend_occupancy_det(Occupancy& occ, const DetUrnProfile& profile, Stream& stream,
                          std::int64_t new_k_max) {
  require(new_k_max >= occ.k_max(), "extend_occupancy_det: new_k_max below current prefix");
  extend_det_core(
      occ, [&](std::int64_t i) { return profile.q(i); },
      [&](std::int64_t k) { return profile.prefix_mass(k); }, stream, new_k_max);
}

double expected_W_exact(std::int64_t n_balls, const DetUrnProfile& profile, std::int64_t k) {
  require(n_balls >= 0, "expected_W_exact: n_balls must be nonnegative");
  require(k >= 0, "expected_W_exact: k must be nonnegative");
  CompensatedSum acc;
  for (std::int64_t i = 1; i <= k; ++i) {
    double qi = profile.q(i);
    if (qi >= 1.0) continue;
    acc.add(std::exp(static_cast<double>(n_balls) * std::log1p(-qi)));
  }
  return acc.value();
}

double expected_W_exact(std::int64_t n_balls, const std::vector<double>& q, std::int64_t k) {
  require(n_balls >= 0, "expected_W_exact: n_balls must be nonnegative");
  require(k >= 0 && k <= static_cast<std::int64_t>(q.size()),
          "expected_W_exact: k out of range");
  CompensatedSum acc;
  for (std::int64_t i = 0; i < k; ++i) {
    double qi = q[static_cast<std::size_t>(i)];
    if (qi >= 1.0) continue;
    acc.add(std::exp(static_cast<double>(n_balls) * std::log1p(-qi)));
  }
  return acc.value();
}

}  // namespace flashcrowd
