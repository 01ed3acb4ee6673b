#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "flashcrowd/rng.hpp"

namespace flashcrowd {

// Ball counts over the urn prefix 1..k_max. overflow counts balls that landed
// beyond the prefix; n_balls = sum(eta) + overflow always holds.
struct Occupancy {
  std::vector<std::int64_t> eta;  // eta[i-1] = balls in urn i
  std::int64_t n_balls = 0;
  std::int64_t overflow = 0;

  std::int64_t k_max() const { return static_cast<std::int64_t>(eta.size()); }
};

// Smallest urn index i with eta_i <= max_count, or nullopt when the prefix is
// exhausted (the caller extends the occupancy and retries).
std::optional<std::int64_t> first_low_urn(const Occupancy& occ, std::int64_t max_count);

// W_N^k: number of empty urns among 1..k. Requires 0 <= k <= k_max.
std::int64_t count_empty_upto(const Occupancy& occ, std::int64_t k);

// Smallest x >= 1 with n_balls - sum_{i<=x} eta_i < x / rho. Balls beyond the
// prefix count toward the residual, so the answer can exceed k_max.
std::int64_t nu3_index(const Occupancy& occ, double rho);

// One realization of the exponential-race urns: T_n = sum_{k<=n} E_k / k with
// E_k iid Exp(1); urn n is the interval (T_{n-1}, T_n] and P_n its Exp(rho)
// probability mass. The prefix extends lazily; the owned stream makes the
// extension deterministic.
class RandomUrnRealization {
 public:
  RandomUrnRealization(double rho, Stream stream);

  void ensure(std::int64_t k);
  std::int64_t k_max() const { return static_cast<std::int64_t>(e_.size()); }
  double rho() const { return rho_; }

  double T(std::int64_t n) const;  // n in [0, k_max]; T(0) = 0
  double E(std::int64_t n) const;  // n in [1, k_max]
  double P(std::int64_t n) const;  // n in [1, k_max]
  // X_n = (n+1)^rho * e^{-rho T_n}, n in [0, k_max].
  double X(std::int64_t n) const;
  // Z_n = (n/rho) * (1 - e^{-rho E_n / n}), n in [1, k_max].
  double Z(std::int64_t n) const;
  // sum_{n<=k} P_n, computed in closed form as 1 - e^{-rho T_k}.
  double truncated_mass(std::int64_t k) const;

 private:
  void check_index(std::int64_t n, std::int64_t lo) const;

  double rho_;
  Stream stream_;
  std::vector<double> e_, t_, p_;
};

// Same as the class constructor but eagerly realizes urns 1..k_max.
RandomUrnRealization realize_random_urns(double rho, std::int64_t k_max, Stream stream);

// T_n for a realized index; throws std::out_of_range beyond the prefix.
double time_of_index(const RandomUrnRealization& r, std::int64_t n);

// Throws n_balls iid Exp(rho) positions onto the realization's intervals:
// positions are drawn first (n_balls uniforms), sorted, then the T prefix is
// extended as the walk requires. Every ball lands in the prefix (overflow 0).
Occupancy place_balls(std::int64_t n_balls, RandomUrnRealization& r, Stream& ball_stream);

struct RandomThrow {
  Occupancy occ;
  RandomUrnRealization realization;
};

// Single-stream variant: the ball positions are drawn from `stream` first,
// then the stream is moved into the realization for lazy T extension. With
// poissonized set, the actual ball count is Poisson(n_balls), drawn before
// the positions.
RandomThrow throw_balls_random(std::int64_t n_balls, double rho, Stream stream,
                               bool poissonized = false);

// Power-law urn profile q_n -> alpha * n^-delta with total mass <= 1.
// When alpha * zeta(delta) > 1 a shift s > 0 is solved so that
// q_n = alpha * (n+s)^-delta sums to exactly 1; otherwise s = 0 and the
// residual 1 - alpha * zeta(delta) sits in an absorbing tail pseudo-urn that
// is beyond every counted index. Either way q is non-increasing and
// n^delta * q_n -> alpha.
class DetUrnProfile {
 public:
  DetUrnProfile(double alpha, double delta);  // requires alpha > 0, delta > 1

  double q(std::int64_t n) const;            // n >= 1
  double prefix_mass(std::int64_t k) const;  // sum_{i<=k} q_i, cached
  double alpha() const { return alpha_; }
  double delta() const { return delta_; }
  double shift() const { return shift_; }
  double tail_mass() const { return tail_mass_; }

 private:
  double alpha_, delta_, shift_, tail_mass_;
  mutable std::vector<double> prefix_;       // prefix_[k] = sum_{i<=k} q_i
  mutable double prefix_comp_ = 0.0;         // Neumaier carry for prefix_
};

// Exact multinomial occupancy over urns 1..k_max via sequential binomial
// conditioning; remaining mass comes from the profile's prefix sums. With
// poissonized set, the ball count is Poisson(n_balls), drawn first.
Occupancy throw_balls_det(std::int64_t n_balls, const DetUrnProfile& profile,
                          Stream& stream, std::int64_t k_max, bool poissonized = false);
Occupancy throw_balls_det(std::int64_t n_balls, const std::vector<double>& q,
                          Stream& stream, bool poissonized = false);

// Conditionally extends a det occupancy to a larger prefix: the overflow balls
// are multinomial over the unseen urns, so the sequential conditioning simply
// continues where it stopped.
void extend_occupancy_det(Occupancy& occ, const DetUrnProfile& profile,
                          Stream& stream, std::int64_t new_k_max);

// E W_N^k = sum_{i<=k} (1 - q_i)^N, the closed-form oracle.
double expected_W_exact(std::int64_t n_balls, const DetUrnProfile& profile, std::int64_t k);
double expected_W_exact(std::int64_t n_balls, const std::vector<double>& q, std::int64_t k);

}  // namespace flashcrowd
