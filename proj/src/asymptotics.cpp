#include "flashcrowd/asymptotics.hpp"

#include <cmath>
#include <stdexcept>

namespace flashcrowd {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

constexpr double kQuadratureCut = 28.0;  // e^{-28} < 1e-12

// Composite Simpson over [0, kQuadratureCut] of f plus the analytic remainder
// estimate rem. quadrature is rounded up to an even panel count.
template <typename F>
double simpson_with_tail(F f, double rem, int quadrature) {
  require(quadrature >= 64, "quadrature node count must be at least 64");
  int panels = quadrature + (quadrature & 1);
  double h = kQuadratureCut / static_cast<double>(panels);
  double acc = f(0.0) + f(kQuadratureCut);
  for (int i = 1; i < panels; ++i) {
    acc += f(h * static_cast<double>(i)) * (i & 1 ? 4.0 : 2.0);
  }
  return acc * h / 3.0 + rem;
}

}  // namespace

void LimitLawParams::validate() const {
  require(positive_finite(rho), "rho must be positive");
  require(positive_finite(alpha), "alpha must be positive");
  require(delta > 1.0 && std::isfinite(delta), "delta must exceed 1");
  require(quadrature >= 64, "quadrature node count must be at least 64");
}

const char* to_string(CutoffRegime regime) {
  switch (regime) {
    case CutoffRegime::kVanishes: return "vanishes";
    case CutoffRegime::kCritical: return "critical";
    case CutoffRegime::kDiverges: return "diverges";
  }
  return "?";
}

double gumbel_cdf(double x) { return std::exp(-std::exp(-x)); }

double weibull_tail(double x, double rho) {
  require(x >= 0.0, "weibull_tail: x must be nonnegative");
  require(positive_finite(rho), "weibull_tail: rho must be positive");
  return std::exp(-std::pow(x, 1.0 / rho));
}

double sample_X_infinity(Stream& stream, double rho) {
  require(positive_finite(rho), "sample_X_infinity: rho must be positive");
  return std::pow(stream.exp_sample(1.0), rho);
}

std::int64_t kappa_x(double n_balls, double alpha, double delta, double x) {
  require(n_balls >= 3.0, "kappa_x: N must be at least 3");
  require(positive_finite(alpha), "kappa_x: alpha must be positive");
  require(delta > 1.0 && std::isfinite(delta), "kappa_x: delta must exceed 1");
  require(positive_finite(x), "kappa_x: x must be positive");
  double log_n = std::log(n_balls);
  double base = std::pow(alpha * delta * n_balls / log_n, 1.0 / delta);
  double bracket = 1.0 + (1.0 + delta) / delta * std::log(log_n) / log_n + std::log(x) / log_n;
  return static_cast<std::int64_t>(std::floor(base * bracket));
}

double limit_mean_W(double alpha, double delta, double x) {
  require(positive_finite(alpha), "limit_mean_W: alpha must be positive");
  require(delta > 1.0 && std::isfinite(delta), "limit_mean_W: delta must exceed 1");
  require(x >= 0.0, "limit_mean_W: x must be nonnegative");
  return std::pow(alpha * delta, 1.0 / delta) * x;
}

double det_nu_recenter(double nu, double n_balls, double alpha, double delta) {
  require(nu >= 1.0, "det_nu_recenter: nu must be at least 1");
  require(n_balls >= 3.0, "det_nu_recenter: N must be at least 3");
  double log_n = std::log(n_balls);
  double scale = std::pow(log_n, (1.0 + delta) / delta) / std::pow(alpha * delta * n_balls, 1.0 / delta);
  return scale * nu - log_n - (1.0 + delta) / delta * std::log(log_n);
}

double det_nu_limit_tail(double x, double alpha, double delta) {
  return std::exp(-std::pow(alpha * delta, 1.0 / delta) * std::exp(x));
}

double det_T_recenter(double t, double n_balls, double alpha, double delta) {
  require(n_balls >= 3.0, "det_T_recenter: N must be at least 3");
  double log_n = std::log(n_balls);
  return delta * t - log_n + std::log(log_n) - std::log(alpha * delta);
}

CutoffRegime cutoff_classify(double beta, double alpha, double delta) {
  require(positive_finite(beta), "cutoff_classify: beta must be positive");
  double critical = std::pow(alpha * delta, 1.0 / delta);
  if (std::abs(beta - critical) <= 1e-9 * critical) return CutoffRegime::kCritical;
  return beta > critical ? CutoffRegime::kDiverges : CutoffRegime::kVanishes;
}

namespace {

// Random mean of the limiting empty count at the scaled index x: lambda(u)
// with u the Exp(1) mixing variable.
double mixing_mean(double u, double x, double rho) {
  return std::pow(x, rho + 2.0) * std::pow(u, -rho) / (rho * (rho + 2.0));
}

}  // namespace

double rand_nu_limit_tail(double x, double rho, int quadrature) {
  require(x >= 0.0, "rand_nu_limit_tail: x must be nonnegative");
  require(positive_finite(rho), "rand_nu_limit_tail: rho must be positive");
  if (x == 0.0) return 1.0;
  auto f = [&](double u) {
    if (u <= 0.0) return 0.0;  // integrand vanishes at the origin for x > 0
    return std::exp(-u - mixing_mean(u, x, rho));
  };
  double rem = std::exp(-kQuadratureCut - mixing_mean(kQuadratureCut, x, rho));
  return simpson_with_tail(f, rem, quadrature);
}

double mixed_poisson_pmf(std::int64_t j, double x, double rho, int quadrature) {
  require(j >= 0, "mixed_poisson_pmf: j must be nonnegative");
  require(x >= 0.0, "mixed_poisson_pmf: x must be nonnegative");
  require(positive_finite(rho), "mixed_poisson_pmf: rho must be positive");
  if (x == 0.0) return j == 0 ? 1.0 : 0.0;
  if (j == 0) return rand_nu_limit_tail(x, rho, quadrature);
  double lgamma_j1 = std::lgamma(static_cast<double>(j) + 1.0);
  auto f = [&](double u) {
    if (u <= 0.0) return 0.0;
    double lam = mixing_mean(u, x, rho);
    return std::exp(-u - lam + static_cast<double>(j) * std::log(lam) - lgamma_j1);
  };
  double lam_end = mixing_mean(kQuadratureCut, x, rho);
  double rem = std::exp(-kQuadratureCut - lam_end +
                        static_cast<double>(j) * std::log(lam_end) - lgamma_j1);
  return simpson_with_tail(f, rem, quadrature);
}

double moment_X_n(std::int64_t n, double q, double rho) {
  require(n >= 1, "moment_X_n: n must be at least 1");
  require(q >= 0.0 && std::isfinite(q), "moment_X_n: q must be nonnegative");
  require(positive_finite(rho), "moment_X_n: rho must be positive");
  double qr = q * rho;
  double log_val = qr * std::log(static_cast<double>(n) + 1.0);
  for (std::int64_t i = 1; i <= n; ++i) {
    log_val -= std::log1p(qr / static_cast<double>(i));
  }
  return std::exp(log_val);
}

double mean_P_n_exact(std::int64_t n, double rho) {
  require(n >= 1, "mean_P_n_exact: n must be at least 1");
  require(positive_finite(rho), "mean_P_n_exact: rho must be positive");
  double log_prod = 0.0;
  for (std::int64_t k = 1; k < n; ++k) {
    log_prod -= std::log1p(rho / static_cast<double>(k));
  }
  // 1 - (1 + rho/n)^{-1} = rho / (n + rho)
  return std::exp(log_prod) * rho / (static_cast<double>(n) + rho);
}

double poisson_bound_check(std::int64_t n, std::int64_t grid) {
  require(n >= 1, "poisson_bound_check: N must be at least 1");
  require(grid >= 1, "poisson_bound_check: grid must be at least 1");
  double worst = 0.0;
  for (std::int64_t i = 0; i <= grid; ++i) {
    double x = static_cast<double>(i) / static_cast<double>(grid);
    double dev = std::abs(std::exp(-static_cast<double>(n) * x) -
                          std::pow(1.0 - x, static_cast<double>(n)));
    if (dev > worst) worst = dev;
  }
  if (worst > 2.0 / static_cast<double>(n)) {
    throw std::logic_error("poisson_bound_check: deviation exceeded 2/N");
  }
  return worst;
}

double poisson_pmf(std::int64_t j, double lambda) {
  require(j >= 0, "poisson_pmf: j must be nonnegative");
  require(lambda >= 0.0 && std::isfinite(lambda), "poisson_pmf: lambda must be nonnegative");
  if (lambda == 0.0) return j == 0 ? 1.0 : 0.0;
  return std::exp(static_cast<double>(j) * std::log(lambda) - lambda -
                  std::lgamma(static_cast<double>(j) + 1.0));
}

double calibration_alpha(double rho) {
  require(positive_finite(rho), "calibration_alpha: rho must be positive");
  return rho * std::tgamma(rho + 1.0);
}

}  // namespace flashcrowd
