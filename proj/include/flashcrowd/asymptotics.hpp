#pragma once

#include <cstdint>

#include "flashcrowd/rng.hpp"

namespace flashcrowd {

// Parameter bundle for the limit-law evaluators. quadrature is the node count
// for the numerical integrals; 4096 keeps the truncation + discretization
// error far below every tolerance used in the tests.
struct LimitLawParams {
  double rho = 2.0;
  double alpha = 1.0;
  double delta = 3.0;
  int quadrature = 4096;

  void validate() const;  // throws std::invalid_argument on a bad field
};

enum class CutoffRegime { kVanishes, kCritical, kDiverges };
const char* to_string(CutoffRegime regime);

// P(G <= x) = exp(-exp(-x)), the standard Gumbel law.
double gumbel_cdf(double x);

// P(X >= x) = exp(-x^{1/rho}); x >= 0.
double weibull_tail(double x, double rho);

// One draw with tail exp(-x^{1/rho}): E^rho for E ~ Exp(1).
double sample_X_infinity(Stream& stream, double rho);

// floor of (alpha*delta*N / log N)^{1/delta} *
//   [1 + ((1+delta)/delta) * log log N / log N + log x / log N],
// natural logs throughout. Requires N >= 3 (so log log N is defined), x > 0.
std::int64_t kappa_x(double n_balls, double alpha, double delta, double x);

// (alpha*delta)^{1/delta} * x, the limiting expected empty count at kappa_x.
double limit_mean_W(double alpha, double delta, double x);

// Recentred first-empty-urn index:
//   (log N)^{(1+delta)/delta} / (alpha*delta*N)^{1/delta} * nu
//     - log N - ((1+delta)/delta) * log log N.
// Recentring kappa_x(N) gives back log x up to the floor slack.
double det_nu_recenter(double nu, double n_balls, double alpha, double delta);

// Tail of the limit of the recentred index: P(Y > x) = exp(-(alpha*delta)^{1/delta} e^x).
double det_nu_limit_tail(double x, double alpha, double delta);

// Recentred first-empty-urn time: delta*T - log N + log log N - log(alpha*delta).
// The limit law is gumbel_cdf.
double det_T_recenter(double t, double n_balls, double alpha, double delta);

// Compares beta to the critical constant (alpha*delta)^{1/delta}. Inputs within
// 1e-9 relative of the constant classify as critical.
CutoffRegime cutoff_classify(double beta, double alpha, double delta);

// P(Y >= x) = int_0^infty e^{-u} exp(-x^{rho+2} u^{-rho} / (rho(rho+2))) du.
// Composite Simpson on (0, U] with U = 28 (truncated tail below 1e-12, the
// analytic remainder e^{-U} exp(-c U^{-rho}) is added back). quadrature >= 64.
double rand_nu_limit_tail(double x, double rho, int quadrature = 4096);

// P(W = j) for W Poisson with random mean x^{rho+2} u^{-rho} / (rho(rho+2)),
// u ~ Exp(1); same quadrature contract as rand_nu_limit_tail, and
// mixed_poisson_pmf(0, x, rho) == rand_nu_limit_tail(x, rho) identically.
double mixed_poisson_pmf(std::int64_t j, double x, double rho, int quadrature = 4096);

// E[X_n^q] = (n+1)^{q rho} * prod_{i=1}^n (1 + q rho / i)^{-1}, in log space.
double moment_X_n(std::int64_t n, double q, double rho);

// E[P_n] = prod_{k=1}^{n-1} k/(k+rho) * rho/(n+rho), in log space.
double mean_P_n_exact(std::int64_t n, double rho);

// max over an (grid+1)-point uniform grid on [0,1] of |e^{-Nx} - (1-x)^N|;
// throws std::logic_error if the max ever exceeds 2/N.
double poisson_bound_check(std::int64_t n, std::int64_t grid);

// Plain Poisson pmf e^{-lambda} lambda^j / j!, evaluated in log space.
double poisson_pmf(std::int64_t j, double lambda);

// Power-law coefficient matching the two urn models: rho * Gamma(rho + 1),
// the exact n^{-(rho+1)} coefficient of mean_P_n_exact. The candidate
// rho * Gamma(rho) coincides at rho = 1 but disagrees with that oracle for
// every other rho (rho = 2 gives 4, not 2), so it is not used.
double calibration_alpha(double rho);

}  // namespace flashcrowd
