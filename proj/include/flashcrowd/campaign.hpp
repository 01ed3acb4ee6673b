#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "flashcrowd/peersim.hpp"

namespace flashcrowd {

enum class ModelKind { kPeersimMin, kPeersimRandom, kUrnRandom, kUrnDet };
const char* to_string(ModelKind model);
std::optional<ModelKind> parse_model(const std::string& name);

enum class Statistic {
  kNu1, kT1, kNu2, kT2, kNu3, kT3, kNu4, kT4,  // simulation milestones
  kNuD, kTD,                                   // deterministic urn model
  kNuR, kTR,                                   // random urn model
  kWAtKappa,                                   // empty count at the critical index
};
const char* to_string(Statistic statistic);
std::optional<Statistic> parse_statistic(const std::string& name);

// Statistics that grow polynomially in N fit on log-log axes; the times grow
// logarithmically and fit on semilog axes.
enum class FitMode { kLogLog, kSemiLog };
const char* to_string(FitMode mode);
FitMode default_fit_mode(Statistic statistic);

struct Plan {
  ModelKind model = ModelKind::kPeersimMin;
  double rho = 2.0;
  double alpha = 1.0;          // urn-det profile
  double delta = 3.0;          // urn-det profile
  double kappa_scale_x = 1.0;  // x in the critical-index formulas
  std::vector<std::int64_t> n_grid;
  std::int64_t reps = 1;
  std::uint64_t master_seed = 0;
  std::vector<Statistic> statistics;

  void validate() const;  // throws std::invalid_argument, incl. model/statistic mismatch
};

struct Estimate {
  std::int64_t n = 0;
  Statistic statistic = Statistic::kNu1;
  double mean = 0.0;
  double stderr_of_mean = 0.0;
  std::int64_t reps = 0;  // replications in which the statistic resolved
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  FitMode mode = FitMode::kLogLog;
};

struct CampaignDiagnostics {
  std::int64_t prop1_violations = 0;  // summed over Min-policy replications
  std::int64_t runs = 0;              // replications executed
};

// Runs reps replications per grid point. Replication r of grid point N uses
// stream id r XOR mix64(N), so enlarging the grid or the rep count never
// perturbs existing cells. Workers split the replication index range; the
// per-replication values land in preassigned slots and are reduced in
// replication order with compensated sums, so the output is identical for
// every worker count. Rows come out grouped by grid point, statistics in
// plan order.
std::vector<Estimate> run_campaign(const Plan& plan, int n_workers = 1,
                                   CampaignDiagnostics* diagnostics = nullptr);

// Ordinary least squares of (log N, log mean) [kLogLog] or (log N, mean)
// [kSemiLog] over the estimates, which must hold one statistic at >= 3
// distinct grid points.
SlopeFit fit_slope(const std::vector<Estimate>& estimates, FitMode mode);

// Reference growth coefficients (rho = 2) for the six reported milestone
// statistics per policy; nullopt for statistics outside the reference set.
std::optional<double> reference_slope(Policy policy, Statistic statistic);

struct SlopeComparisonRow {
  Policy policy = Policy::kMin;
  Statistic statistic = Statistic::kNu1;
  double reference = 0.0;
  std::optional<double> fitted;    // absent = gap in the supplied fits
  std::optional<double> deviation; // |fitted - reference|
  bool flagged = false;            // deviation exceeds the tolerance
};

struct SlopeComparison {
  std::vector<SlopeComparisonRow> rows;  // all 12 reference cells, fixed order
  double tolerance = 0.0;
};

struct PolicySlopes {
  Policy policy = Policy::kMin;
  Statistic statistic = Statistic::kNu1;
  double slope = 0.0;
};

// Side-by-side comparison of fitted slopes against the reference
// coefficients; cells without a supplied fit are reported as gaps.
SlopeComparison compare_table1(const std::vector<PolicySlopes>& fits, double tolerance);

// Kolmogorov-Smirnov sup distance between the empirical CDF of the samples
// and the supplied CDF. Requires >= 100 samples.
double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf);

// Unbiased sample variance over sample mean; nullopt when the mean is zero.
// Requires >= 2 samples.
std::optional<double> var_over_mean(const std::vector<double>& samples);

// Total variation distance between the empirical law of integer samples and
// the pmf callable: half the l1 gap on 0..max(sample), plus half the law's
// mass beyond that range.
double total_variation_vs_pmf(const std::vector<std::int64_t>& samples,
                              const std::function<double(std::int64_t)>& pmf);

}  // namespace flashcrowd
