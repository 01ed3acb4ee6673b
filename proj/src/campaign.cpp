#include "flashcrowd/campaign.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include "flashcrowd/asymptotics.hpp"
#include "flashcrowd/compensated.hpp"
#include "flashcrowd/urnball.hpp"

namespace flashcrowd {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

const char* to_string(ModelKind model) {
  switch (model) {
    case ModelKind::kPeersimMin: return "peersim-min";
    case ModelKind::kPeersimRandom: return "peersim-random";
    case ModelKind::kUrnRandom: return "urn-random";
    case ModelKind::kUrnDet: return "urn-det";
  }
  return "?";
}

std::optional<ModelKind> parse_model(const std::string& name) {
  if (name == "peersim-min") return ModelKind::kPeersimMin;
  if (name == "peersim-random") return ModelKind::kPeersimRandom;
  if (name == "urn-random") return ModelKind::kUrnRandom;
  if (name == "urn-det") return ModelKind::kUrnDet;
  return std::nullopt;
}

const char* to_string(Statistic statistic) {
  switch (statistic) {
    case Statistic::kNu1: return "nu1";
    case Statistic::kT1: return "t1";
    case Statistic::kNu2: return "nu2";
    case Statistic::kT2: return "t2";
    case Statistic::kNu3: return "nu3";
    case Statistic::kT3: return "t3";
    case Statistic::kNu4: return "nu4";
    case Statistic::kT4: return "t4";
    case Statistic::kNuD: return "nuD";
    case Statistic::kTD: return "TD";
    case Statistic::kNuR: return "nuR";
    case Statistic::kTR: return "TR";
    case Statistic::kWAtKappa: return "W_at_kappa";
  }
  return "?";
}

std::optional<Statistic> parse_statistic(const std::string& name) {
  static constexpr Statistic kAll[] = {
      Statistic::kNu1, Statistic::kT1, Statistic::kNu2, Statistic::kT2,
      Statistic::kNu3, Statistic::kT3, Statistic::kNu4, Statistic::kT4,
      Statistic::kNuD, Statistic::kTD, Statistic::kNuR, Statistic::kTR,
      Statistic::kWAtKappa};
  for (Statistic s : kAll) {
    if (name == to_string(s)) return s;
  }
  return std::nullopt;
}

const char* to_string(FitMode mode) { return mode == FitMode::kLogLog ? "loglog" : "semilog"; }

FitMode default_fit_mode(Statistic statistic) {
  switch (statistic) {
    case Statistic::kT1:
    case Statistic::kT2:
    case Statistic::kT3:
    case Statistic::kT4:
    case Statistic::kTD:
    case Statistic::kTR:
      return FitMode::kSemiLog;
    default:
      return FitMode::kLogLog;
  }
}

namespace {

bool statistic_fits_model(ModelKind model, Statistic s) {
  switch (model) {
    case ModelKind::kPeersimMin:
    case ModelKind::kPeersimRandom:
      return s == Statistic::kNu1 || s == Statistic::kT1 || s == Statistic::kNu2 ||
             s == Statistic::kT2 || s == Statistic::kNu3 || s == Statistic::kT3 ||
             s == Statistic::kNu4 || s == Statistic::kT4;
    case ModelKind::kUrnRandom:
      return s == Statistic::kNuR || s == Statistic::kTR || s == Statistic::kWAtKappa;
    case ModelKind::kUrnDet:
      return s == Statistic::kNuD || s == Statistic::kTD || s == Statistic::kWAtKappa;
  }
  return false;
}

}  // namespace

void Plan::validate() const {
  require(!n_grid.empty(), "Plan: n_grid must be nonempty");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    require(n_grid[i] >= 1, "Plan: grid points must be at least 1");
    if (i > 0) require(n_grid[i] > n_grid[i - 1], "Plan: n_grid must be strictly increasing");
  }
  require(reps >= 1, "Plan: reps must be at least 1");
  require(rho > 0.0 && std::isfinite(rho), "Plan: rho must be positive");
  require(kappa_scale_x > 0.0 && std::isfinite(kappa_scale_x), "Plan: kappa_scale_x must be positive");
  require(!statistics.empty(), "Plan: statistics must be nonempty");
  for (Statistic s : statistics) {
    if (!statistic_fits_model(model, s)) {
      throw std::invalid_argument(std::string("Plan: statistic ") + to_string(s) +
                                  " is not produced by model " + to_string(model));
    }
  }
  if (model == ModelKind::kUrnDet) {
    require(alpha > 0.0 && std::isfinite(alpha), "Plan: alpha must be positive");
    require(delta > 1.0 && std::isfinite(delta), "Plan: delta must exceed 1");
    bool wants_kappa = false;
    for (Statistic s : statistics) wants_kappa |= s == Statistic::kWAtKappa;
    if (wants_kappa) {
      require(n_grid.front() >= 3, "Plan: W_at_kappa under urn-det needs grid points >= 3");
    }
  }
}

namespace {

using RepValues = std::vector<std::optional<double>>;

SeedSpec rep_seed(const Plan& plan, std::int64_t n, std::int64_t rep) {
  return SeedSpec{plan.master_seed,
                  static_cast<std::uint64_t>(rep) ^ mix64(static_cast<std::uint64_t>(n))};
}

RepValues eval_peersim(const Plan& plan, std::int64_t n, std::int64_t rep,
                       std::int64_t* prop1_out) {
  SimConfig cfg;
  cfg.n_peers = n;
  cfg.rho = plan.rho;
  cfg.policy = plan.model == ModelKind::kPeersimMin ? Policy::kMin : Policy::kRandom;
  cfg.seed = rep_seed(plan, n, rep);
  cfg.run_to_completion = true;
  SimResult res = run_sim(cfg);
  *prop1_out = res.milestones.prop1_violations;

  auto as_double = [](const std::optional<std::int64_t>& v) -> std::optional<double> {
    if (!v) return std::nullopt;
    return static_cast<double>(*v);
  };
  RepValues out;
  out.reserve(plan.statistics.size());
  for (Statistic s : plan.statistics) {
    switch (s) {
      case Statistic::kNu1: out.push_back(as_double(res.milestones.nu1)); break;
      case Statistic::kT1: out.push_back(res.milestones.t1); break;
      case Statistic::kNu2: out.push_back(as_double(res.milestones.nu2)); break;
      case Statistic::kT2: out.push_back(res.milestones.t2); break;
      case Statistic::kNu3: out.push_back(as_double(res.milestones.nu3)); break;
      case Statistic::kT3: out.push_back(res.milestones.t3); break;
      case Statistic::kNu4: out.push_back(as_double(res.milestones.nu4)); break;
      case Statistic::kT4: out.push_back(res.milestones.t4); break;
      default: out.push_back(std::nullopt); break;
    }
  }
  return out;
}

// Empty count among urns 1..kappa; urns beyond the realized prefix hold no
// balls, so they count as empty wholesale.
std::int64_t empty_upto_with_virtual_tail(const Occupancy& occ, std::int64_t kappa) {
  if (kappa <= occ.k_max()) return count_empty_upto(occ, kappa);
  return count_empty_upto(occ, occ.k_max()) + (kappa - occ.k_max());
}

RepValues eval_urn_random(const Plan& plan, std::int64_t n, std::int64_t rep) {
  RandomThrow rt = throw_balls_random(n, plan.rho, Stream(rep_seed(plan, n, rep)));
  std::int64_t nu_r = first_low_urn(rt.occ, 0).value_or(rt.occ.k_max() + 1);

  RepValues out;
  out.reserve(plan.statistics.size());
  for (Statistic s : plan.statistics) {
    switch (s) {
      case Statistic::kNuR:
        out.push_back(static_cast<double>(nu_r));
        break;
      case Statistic::kTR:
        rt.realization.ensure(nu_r);
        out.push_back(time_of_index(rt.realization, nu_r));
        break;
      case Statistic::kWAtKappa: {
        std::int64_t kappa = static_cast<std::int64_t>(
            std::floor(plan.kappa_scale_x *
                       std::pow(static_cast<double>(n), 1.0 / (plan.rho + 2.0))));
        out.push_back(static_cast<double>(empty_upto_with_virtual_tail(rt.occ, kappa)));
        break;
      }
      default:
        out.push_back(std::nullopt);
        break;
    }
  }
  return out;
}

RepValues eval_urn_det(const Plan& plan, const DetUrnProfile& profile, std::int64_t n,
                       std::int64_t rep) {
  Stream stream(rep_seed(plan, n, rep));
  bool wants_nu = false, wants_t = false, wants_w = false;
  for (Statistic s : plan.statistics) {
    wants_nu |= s == Statistic::kNuD;
    wants_t |= s == Statistic::kTD;
    wants_w |= s == Statistic::kWAtKappa;
  }
  std::int64_t kappa = 0;
  std::int64_t k0 = 16;
  if (wants_w) {
    kappa = std::max<std::int64_t>(
        kappa_x(static_cast<double>(n), profile.alpha(), profile.delta(), plan.kappa_scale_x),
        0);
    k0 = std::max<std::int64_t>(k0, std::max<std::int64_t>(kappa, 1));
  }
  Occupancy occ = throw_balls_det(n, profile, stream, k0);

  std::optional<std::int64_t> nu_d;
  if (wants_nu || wants_t) {
    for (;;) {
      nu_d = first_low_urn(occ, 0);
      if (nu_d) break;
      extend_occupancy_det(occ, profile, stream, occ.k_max() * 2);
    }
  }
  std::optional<double> t_d;
  if (wants_t) {
    // Fresh interval race, independent of the throw: T_nu = sum E_k / k.
    double acc = 0.0;
    for (std::int64_t k = 1; k <= *nu_d; ++k) {
      acc += stream.exp_sample(1.0) / static_cast<double>(k);
    }
    t_d = acc;
  }

  RepValues out;
  out.reserve(plan.statistics.size());
  for (Statistic s : plan.statistics) {
    switch (s) {
      case Statistic::kNuD:
        out.push_back(static_cast<double>(*nu_d));
        break;
      case Statistic::kTD:
        out.push_back(t_d);
        break;
      case Statistic::kWAtKappa:
        out.push_back(static_cast<double>(empty_upto_with_virtual_tail(occ, kappa)));
        break;
      default:
        out.push_back(std::nullopt);
        break;
    }
  }
  return out;
}

}  // namespace

std::vector<Estimate> run_campaign(const Plan& plan, int n_workers,
                                   CampaignDiagnostics* diagnostics) {
  plan.validate();
  require(n_workers >= 1, "run_campaign: n_workers must be at least 1");

  const std::size_t n_stats = plan.statistics.size();
  const bool is_peersim =
      plan.model == ModelKind::kPeersimMin || plan.model == ModelKind::kPeersimRandom;
  const bool is_min = plan.model == ModelKind::kPeersimMin;

  std::vector<Estimate> table;
  table.reserve(plan.n_grid.size() * n_stats);
  std::int64_t prop1_total = 0;
  std::int64_t runs_total = 0;

  for (std::int64_t n : plan.n_grid) {
    std::vector<RepValues> slots(static_cast<std::size_t>(plan.reps));
    std::vector<std::int64_t> prop1(static_cast<std::size_t>(plan.reps), 0);

    auto work = [&](int worker) {
      // urn-det keeps a per-worker profile: its prefix cache grows lazily and
      // must not be shared across threads.
      std::optional<DetUrnProfile> profile;
      if (plan.model == ModelKind::kUrnDet) profile.emplace(plan.alpha, plan.delta);
      for (std::int64_t r = worker; r < plan.reps; r += n_workers) {
        auto& slot = slots[static_cast<std::size_t>(r)];
        switch (plan.model) {
          case ModelKind::kPeersimMin:
          case ModelKind::kPeersimRandom:
            slot = eval_peersim(plan, n, r, &prop1[static_cast<std::size_t>(r)]);
            break;
          case ModelKind::kUrnRandom:
            slot = eval_urn_random(plan, n, r);
            break;
          case ModelKind::kUrnDet:
            slot = eval_urn_det(plan, *profile, n, r);
            break;
        }
      }
    };

    if (n_workers == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_workers));
      for (int w = 0; w < n_workers; ++w) {
        pool.emplace_back([&, w] {
          try {
            work(w);
          } catch (...) {
            errors[static_cast<std::size_t>(w)] = std::current_exception();
          }
        });
      }
      for (auto& t : pool) t.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }

    runs_total += plan.reps;
    if (is_peersim && is_min) {
      for (std::int64_t v : prop1) prop1_total += v;
    }

    // Replication-order two-pass reduction: identical for every worker count.
    for (std::size_t si = 0; si < n_stats; ++si) {
      CompensatedSum sum;
      std::int64_t count = 0;
      for (const auto& slot : slots) {
        if (slot[si]) {
          sum.add(*slot[si]);
          ++count;
        }
      }
      Estimate est;
      est.n = n;
      est.statistic = plan.statistics[si];
      est.reps = count;
      est.mean = count > 0 ? sum.value() / static_cast<double>(count) : 0.0;
      if (count > 1) {
        CompensatedSum sq;
        for (const auto& slot : slots) {
          if (slot[si]) {
            double d = *slot[si] - est.mean;
            sq.add(d * d);
          }
        }
        double var = sq.value() / static_cast<double>(count - 1);
        est.stderr_of_mean = std::sqrt(var / static_cast<double>(count));
      }
      table.push_back(est);
    }
  }

  if (diagnostics) {
    diagnostics->prop1_violations = prop1_total;
    diagnostics->runs = runs_total;
  }
  return table;
}

SlopeFit fit_slope(const std::vector<Estimate>& estimates, FitMode mode) {
  require(estimates.size() >= 3, "fit_slope: need at least 3 points");
  for (std::size_t i = 1; i < estimates.size(); ++i) {
    require(estimates[i].statistic == estimates[i - 1].statistic,
            "fit_slope: estimates must hold a single statistic");
  }
  std::vector<double> xs, ys;
  xs.reserve(estimates.size());
  ys.reserve(estimates.size());
  for (const auto& e : estimates) {
    require(e.n >= 1, "fit_slope: grid points must be at least 1");
    double y = e.mean;
    if (mode == FitMode::kLogLog) {
      require(y > 0.0, "fit_slope: log-log fit needs positive means");
      y = std::log(y);
    }
    xs.push_back(std::log(static_cast<double>(e.n)));
    ys.push_back(y);
  }
  double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  require(sxx > 0.0, "fit_slope: grid points must be distinct");
  SlopeFit fit;
  fit.mode = mode;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

std::optional<double> reference_slope(Policy policy, Statistic statistic) {
  if (policy == Policy::kMin) {
    switch (statistic) {
      case Statistic::kNu1: return 0.2478;
      case Statistic::kT1: return 0.2565;
      case Statistic::kNu2: return 0.3765;
      case Statistic::kT2: return 0.5146;
      case Statistic::kNu4: return 0.3149;
      case Statistic::kT4: return 0.3287;
      default: return std::nullopt;
    }
  }
  switch (statistic) {
    case Statistic::kNu1: return 0.2470;
    case Statistic::kT1: return 0.2575;
    case Statistic::kNu2: return 0.3711;
    case Statistic::kT2: return 0.5078;
    case Statistic::kNu4: return 0.2383;
    case Statistic::kT4: return 0.2530;
    default: return std::nullopt;
  }
}

SlopeComparison compare_table1(const std::vector<PolicySlopes>& fits, double tolerance) {
  require(tolerance >= 0.0, "compare_table1: tolerance must be nonnegative");
  static constexpr Statistic kColumns[] = {Statistic::kNu1, Statistic::kT1, Statistic::kNu2,
                                           Statistic::kT2, Statistic::kNu4, Statistic::kT4};
  SlopeComparison cmp;
  cmp.tolerance = tolerance;
  for (Policy policy : {Policy::kMin, Policy::kRandom}) {
    for (Statistic s : kColumns) {
      SlopeComparisonRow row;
      row.policy = policy;
      row.statistic = s;
      row.reference = *reference_slope(policy, s);
      for (const auto& f : fits) {
        if (f.policy == policy && f.statistic == s) {
          row.fitted = f.slope;
          row.deviation = std::abs(f.slope - row.reference);
          row.flagged = *row.deviation > tolerance;
          break;
        }
      }
      cmp.rows.push_back(row);
    }
  }
  return cmp;
}

double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  require(samples.size() >= 100, "ks_statistic: need at least 100 samples");
  std::sort(samples.begin(), samples.end());
  double n = static_cast<double>(samples.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double f = cdf(samples[i]);
    double lo = f - static_cast<double>(i) / n;
    double hi = static_cast<double>(i + 1) / n - f;
    worst = std::max({worst, lo, hi});
  }
  return worst;
}

std::optional<double> var_over_mean(const std::vector<double>& samples) {
  require(samples.size() >= 2, "var_over_mean: need at least 2 samples");
  CompensatedSum sum;
  for (double v : samples) sum.add(v);
  double mean = sum.value() / static_cast<double>(samples.size());
  if (mean == 0.0) return std::nullopt;
  CompensatedSum sq;
  for (double v : samples) {
    double d = v - mean;
    sq.add(d * d);
  }
  double var = sq.value() / static_cast<double>(samples.size() - 1);
  return var / mean;
}

double total_variation_vs_pmf(const std::vector<std::int64_t>& samples,
                              const std::function<double(std::int64_t)>& pmf) {
  require(!samples.empty(), "total_variation_vs_pmf: need samples");
  std::int64_t max_j = 0;
  for (std::int64_t v : samples) {
    require(v >= 0, "total_variation_vs_pmf: samples must be nonnegative");
    max_j = std::max(max_j, v);
  }
  std::vector<double> counts(static_cast<std::size_t>(max_j) + 1, 0.0);
  for (std::int64_t v : samples) counts[static_cast<std::size_t>(v)] += 1.0;
  double n = static_cast<double>(samples.size());
  double l1 = 0.0, law_mass = 0.0;
  for (std::int64_t j = 0; j <= max_j; ++j) {
    double p = pmf(j);
    law_mass += p;
    l1 += std::abs(counts[static_cast<std::size_t>(j)] / n - p);
  }
  return 0.5 * (l1 + std::max(0.0, 1.0 - law_mass));
}

}  // namespace flashcrowd
