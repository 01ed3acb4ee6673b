#include "flashcrowd/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>

#include "CLI11.hpp"
#include "json.hpp"

#include "flashcrowd/asymptotics.hpp"
#include "flashcrowd/campaign.hpp"
#include "flashcrowd/csv.hpp"
#include "flashcrowd/peersim.hpp"
#include "flashcrowd/urnball.hpp"

namespace flashcrowd {

namespace {

using nlohmann::json;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t pos = text.find(',', start);
    if (pos == std::string::npos) pos = text.size();
    std::string item = text.substr(start, pos - start);
    if (!item.empty()) items.push_back(std::move(item));
    start = pos + 1;
  }
  return items;
}

std::vector<std::int64_t> parse_grid(const std::string& text) {
  std::vector<std::int64_t> grid;
  for (const auto& item : split_list(text)) {
    try {
      std::size_t used = 0;
      grid.push_back(std::stoll(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("malformed grid entry '" + item + "'");
    }
  }
  if (grid.empty()) throw UsageError("empty N grid");
  return grid;
}

std::vector<Statistic> parse_stats(const std::string& text, ModelKind model) {
  if (text.empty()) {
    switch (model) {
      case ModelKind::kPeersimMin:
      case ModelKind::kPeersimRandom:
        return {Statistic::kNu1, Statistic::kT1, Statistic::kNu2, Statistic::kT2,
                Statistic::kNu3, Statistic::kT3, Statistic::kNu4, Statistic::kT4};
      case ModelKind::kUrnRandom:
        return {Statistic::kNuR, Statistic::kTR, Statistic::kWAtKappa};
      case ModelKind::kUrnDet:
        return {Statistic::kNuD, Statistic::kTD, Statistic::kWAtKappa};
    }
  }
  std::vector<Statistic> stats;
  for (const auto& item : split_list(text)) {
    auto s = parse_statistic(item);
    if (!s) throw UsageError("unknown statistic '" + item + "'");
    stats.push_back(*s);
  }
  return stats;
}

// --- config file -----------------------------------------------------------

double number_field(const json& v, const std::string& key) {
  if (!v.is_number()) throw UsageError("config key '" + key + "' must be a number");
  return v.get<double>();
}

std::int64_t int_field(const json& v, const std::string& key) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) {
    throw UsageError("config key '" + key + "' must be an integer");
  }
  return v.get<std::int64_t>();
}

std::string string_or_join(const json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string joined;
    for (const auto& item : v) {
      if (!joined.empty()) joined += ',';
      if (item.is_string()) {
        joined += item.get<std::string>();
      } else if (item.is_number_integer() || item.is_number_unsigned()) {
        joined += std::to_string(item.get<std::int64_t>());
      } else {
        throw UsageError("config key '" + key + "' has a non-string, non-integer element");
      }
    }
    return joined;
  }
  throw UsageError("config key '" + key + "' must be a string or an array");
}

void apply_config(const json& cfg, CliOptions& opt) {
  if (!cfg.is_object()) throw UsageError("config must be a flat JSON object");
  for (const auto& [key, v] : cfg.items()) {
    if (key == "subcommand") continue;  // emitted by serialize_spec; harmless
    if (key == "n") opt.n = int_field(v, key);
    else if (key == "rho") opt.rho = number_field(v, key);
    else if (key == "policy") opt.policy = string_or_join(v, key);
    else if (key == "reps") opt.reps = int_field(v, key);
    else if (key == "seed") {
      if (!v.is_number_integer() && !v.is_number_unsigned()) {
        throw UsageError("config key 'seed' must be an integer");
      }
      opt.seed = v.get<std::uint64_t>();
    }
    else if (key == "alpha") opt.alpha = number_field(v, key);
    else if (key == "delta") opt.delta = number_field(v, key);
    else if (key == "model") opt.model = string_or_join(v, key);
    else if (key == "out") opt.out = string_or_join(v, key);
    else if (key == "trace_step") opt.trace_step = number_field(v, key);
    else if (key == "trace_t_max") opt.trace_t_max = number_field(v, key);
    else if (key == "run_to_completion") {
      if (!v.is_boolean()) throw UsageError("config key 'run_to_completion' must be a boolean");
      opt.run_to_completion = v.get<bool>();
    }
    else if (key == "poissonized") {
      if (!v.is_boolean()) throw UsageError("config key 'poissonized' must be a boolean");
      opt.poissonized = v.get<bool>();
    }
    else if (key == "n_grid") opt.n_grid = string_or_join(v, key);
    else if (key == "stats") opt.stats = string_or_join(v, key);
    else if (key == "workers") opt.workers = static_cast<int>(int_field(v, key));
    else if (key == "x") opt.x = number_field(v, key);
    else if (key == "kmax") opt.kmax = int_field(v, key);
    else if (key == "quadrature") opt.quadrature = static_cast<int>(int_field(v, key));
    else if (key == "tabulate") opt.tabulate = string_or_join(v, key);
    else if (key == "x_min") opt.x_min = number_field(v, key);
    else if (key == "x_max") opt.x_max = number_field(v, key);
    else if (key == "steps") opt.steps = int_field(v, key);
    else if (key == "input") opt.input = string_or_join(v, key);
    else if (key == "min_fits") opt.min_fits = string_or_join(v, key);
    else if (key == "random_fits") opt.random_fits = string_or_join(v, key);
    else if (key == "tolerance") opt.tolerance = number_field(v, key);
    else throw UsageError("unknown config key '" + key + "'");
  }
}

std::optional<std::string> config_path_from_args(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a == "--config" && i + 1 < args.size()) return args[i + 1];
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return std::nullopt;
}

// --- validation ------------------------------------------------------------

Policy require_policy(const std::string& name) {
  auto p = parse_policy(name);
  if (!p) throw UsageError("unknown policy '" + name + "' (want min or random)");
  return *p;
}

ModelKind require_model(const std::string& name) {
  auto m = parse_model(name);
  if (!m) throw UsageError("unknown model '" + name + "'");
  return *m;
}

SimConfig sim_config_from(const CliOptions& opt) {
  SimConfig cfg;
  cfg.n_peers = opt.n;
  cfg.rho = opt.rho;
  cfg.policy = require_policy(opt.policy);
  cfg.seed = SeedSpec{opt.seed, 0};
  cfg.trace_step = opt.trace_step;
  if (opt.trace_t_max > 0.0) cfg.trace_t_max = opt.trace_t_max;
  cfg.run_to_completion = opt.run_to_completion;
  return cfg;
}

Plan plan_from(const CliOptions& opt) {
  Plan plan;
  plan.model = require_model(opt.model);
  plan.rho = opt.rho;
  plan.alpha = opt.alpha;
  plan.delta = opt.delta;
  plan.kappa_scale_x = opt.x;
  plan.n_grid = parse_grid(opt.n_grid);
  plan.reps = opt.reps;
  plan.master_seed = opt.seed;
  plan.statistics = parse_stats(opt.stats, plan.model);
  return plan;
}

void validate_spec(const CommandSpec& spec) {
  const CliOptions& opt = spec.options;
  try {
    if (spec.subcommand == "simulate") {
      sim_config_from(opt).validate();
    } else if (spec.subcommand == "urns") {
      ModelKind model = require_model(opt.model);
      if (model != ModelKind::kUrnRandom && model != ModelKind::kUrnDet) {
        throw UsageError("urns needs --model urn-random or urn-det");
      }
      if (opt.n < 0) throw UsageError("--n must be nonnegative");
      if (opt.kmax < 1) throw UsageError("--kmax must be at least 1");
      if (model == ModelKind::kUrnRandom && !(opt.rho > 0.0 && std::isfinite(opt.rho))) {
        throw UsageError("--rho must be positive");
      }
      if (model == ModelKind::kUrnDet) {
        if (!(opt.alpha > 0.0)) throw UsageError("--alpha must be positive");
        if (!(opt.delta > 1.0)) throw UsageError("--delta must exceed 1");
      }
    } else if (spec.subcommand == "limits") {
      if (opt.tabulate != "nuR" && opt.tabulate != "gumbel" && opt.tabulate != "weibull" &&
          opt.tabulate != "detY") {
        throw UsageError("--tabulate must be one of nuR, gumbel, weibull, detY");
      }
      if (opt.steps < 2) throw UsageError("--steps must be at least 2");
      if (!(opt.x_max > opt.x_min)) throw UsageError("--x-max must exceed --x-min");
      if ((opt.tabulate == "nuR" || opt.tabulate == "weibull") && opt.x_min < 0.0) {
        throw UsageError("--x-min must be nonnegative for tail laws");
      }
      LimitLawParams params{opt.rho, opt.alpha, opt.delta, opt.quadrature};
      params.validate();
    } else if (spec.subcommand == "campaign") {
      plan_from(opt).validate();
      if (opt.workers < 1) throw UsageError("--workers must be at least 1");
    } else if (spec.subcommand == "fit") {
      if (opt.input.empty()) throw UsageError("fit needs --in <estimates csv>");
    } else if (spec.subcommand == "report") {
      if (opt.min_fits.empty() || opt.random_fits.empty()) {
        throw UsageError("report needs --min-fits and --random-fits");
      }
      if (!(opt.tolerance >= 0.0)) throw UsageError("--tolerance must be nonnegative");
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

// --- execution -------------------------------------------------------------

std::filesystem::path prepare_out_dir(const std::string& out) {
  std::filesystem::path dir = out.empty() ? "." : out;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

void emit(const std::filesystem::path& path, const std::string& content) {
  write_file_atomic(path.string(), content);
  std::printf("wrote %s\n", path.string().c_str());
}

void cmd_simulate(const CliOptions& opt) {
  SimConfig cfg = sim_config_from(opt);
  SimResult res = run_sim(cfg);
  auto dir = prepare_out_dir(opt.out);
  emit(dir / "milestones.csv", milestones_csv(res.milestones));
  if (cfg.trace_step > 0.0) emit(dir / "trace.csv", trace_csv(res.trace));
}

void cmd_urns(const CliOptions& opt) {
  ModelKind model = require_model(opt.model);
  auto dir = prepare_out_dir(opt.out);
  Stream stream(SeedSpec{opt.seed, 0});
  if (model == ModelKind::kUrnRandom) {
    RandomThrow rt = throw_balls_random(opt.n, opt.rho, std::move(stream), opt.poissonized);
    emit(dir / "occupancy.csv", occupancy_csv(rt.occ));
    std::int64_t k = std::min<std::int64_t>(opt.kmax, rt.realization.k_max());
    emit(dir / "realization.csv", realization_csv(rt.realization, k));
  } else {
    DetUrnProfile profile(opt.alpha, opt.delta);
    Occupancy occ = throw_balls_det(opt.n, profile, stream, opt.kmax, opt.poissonized);
    emit(dir / "occupancy.csv", occupancy_csv(occ));
  }
}

void cmd_limits(const CliOptions& opt) {
  std::function<double(double)> law;
  if (opt.tabulate == "nuR") {
    law = [&](double x) { return rand_nu_limit_tail(x, opt.rho, opt.quadrature); };
  } else if (opt.tabulate == "gumbel") {
    law = [](double x) { return gumbel_cdf(x); };
  } else if (opt.tabulate == "weibull") {
    law = [&](double x) { return weibull_tail(x, opt.rho); };
  } else {
    law = [&](double x) { return det_nu_limit_tail(x, opt.alpha, opt.delta); };
  }
  std::string out = "x,value\n";
  for (std::int64_t i = 0; i < opt.steps; ++i) {
    double x = opt.x_min + (opt.x_max - opt.x_min) * static_cast<double>(i) /
                               static_cast<double>(opt.steps - 1);
    out += format_double(x);
    out += ',';
    out += format_double(law(x));
    out += '\n';
  }
  auto dir = prepare_out_dir(opt.out);
  emit(dir / ("law_" + opt.tabulate + ".csv"), out);
}

void cmd_campaign(const CliOptions& opt) {
  Plan plan = plan_from(opt);
  CampaignDiagnostics diag;
  std::vector<Estimate> table = run_campaign(plan, opt.workers, &diag);
  auto dir = prepare_out_dir(opt.out);
  emit(dir / "estimates.csv", estimates_csv(plan.model, plan.rho, table));
  if (plan.model == ModelKind::kPeersimMin) {
    std::printf("prop1_violations %lld over %lld runs\n",
                static_cast<long long>(diag.prop1_violations),
                static_cast<long long>(diag.runs));
  }
}

void cmd_fit(const CliOptions& opt) {
  auto rows = parse_estimates_csv(read_file(opt.input));
  if (rows.empty()) throw std::runtime_error("no estimate rows in " + opt.input);
  std::vector<std::string> order;
  std::map<std::string, std::vector<Estimate>> groups;
  for (const auto& r : rows) {
    auto s = parse_statistic(r.statistic);
    if (!s) throw std::runtime_error("unknown statistic '" + r.statistic + "' in " + opt.input);
    if (groups.find(r.statistic) == groups.end()) order.push_back(r.statistic);
    Estimate e;
    e.n = r.n;
    e.statistic = *s;
    e.mean = r.mean;
    e.stderr_of_mean = r.stderr_of_mean;
    e.reps = r.reps;
    groups[r.statistic].push_back(e);
  }
  std::vector<SlopeRow> out;
  for (const auto& name : order) {
    const auto& group = groups[name];
    FitMode mode = default_fit_mode(group.front().statistic);
    SlopeFit fit = fit_slope(group, mode);
    out.push_back({name, to_string(mode), fit.slope, fit.intercept, fit.r_squared});
  }
  auto dir = prepare_out_dir(opt.out);
  emit(dir / "slopes.csv", slopes_csv(out));
}

void cmd_report(const CliOptions& opt) {
  auto load = [&](const std::string& path, Policy policy, std::vector<PolicySlopes>& fits) {
    for (const auto& row : parse_slopes_csv(read_file(path))) {
      auto s = parse_statistic(row.statistic);
      if (s && reference_slope(policy, *s)) fits.push_back({policy, *s, row.slope});
    }
  };
  std::vector<PolicySlopes> fits;
  load(opt.min_fits, Policy::kMin, fits);
  load(opt.random_fits, Policy::kRandom, fits);
  if (fits.empty()) {
    throw std::runtime_error("no usable slope rows in " + opt.min_fits + " or " +
                             opt.random_fits);
  }
  SlopeComparison cmp = compare_table1(fits, opt.tolerance);
  std::string text = table1_text(cmp);
  std::fputs(text.c_str(), stdout);
  auto dir = prepare_out_dir(opt.out);
  emit(dir / "report.csv", table1_csv(cmp));
  emit(dir / "report.txt", text);
}

void add_common_options(CLI::App* cmd, CliOptions& opt, std::string& config_path) {
  cmd->add_option("--config", config_path, "flat JSON config file; flags override its values");
  cmd->add_option("--n", opt.n, "peer / ball count N");
  cmd->add_option("--rho", opt.rho, "wake-up rate");
  cmd->add_option("--policy", opt.policy, "routing policy (min|random)");
  cmd->add_option("--reps", opt.reps, "replications per grid point");
  cmd->add_option("--seed", opt.seed, "master seed");
  cmd->add_option("--alpha", opt.alpha, "power-law coefficient");
  cmd->add_option("--delta", opt.delta, "power-law exponent");
  cmd->add_option("--model", opt.model,
                  "peersim-min | peersim-random | urn-random | urn-det");
  cmd->add_option("--out", opt.out, "output directory");
}

}  // namespace

std::optional<CommandSpec> parse_cli(const std::vector<std::string>& args) {
  CommandSpec spec;
  CliOptions& opt = spec.options;

  if (auto cfg_path = config_path_from_args(args)) {
    json cfg;
    try {
      cfg = json::parse(read_file(*cfg_path));
    } catch (const json::parse_error& e) {
      throw UsageError(std::string("config is not valid JSON: ") + e.what());
    }
    apply_config(cfg, opt);
  }

  CLI::App app{"flash-crowd service capacity: simulation, urn models, and limit laws"};
  app.require_subcommand(1);
  std::string config_path;
  bool no_completion = false;

  auto* sim = app.add_subcommand("simulate", "run one event-driven simulation");
  add_common_options(sim, opt, config_path);
  sim->add_option("--trace-step", opt.trace_step, "idle-trace sampling step (0 = off)");
  sim->add_option("--trace-tmax", opt.trace_t_max, "idle-trace horizon (0 = unbounded)");
  sim->add_flag("--no-completion", no_completion,
                "stop once mid-run milestones resolve instead of simulating to completion");

  auto* urns = app.add_subcommand("urns", "throw balls into one urn realization");
  add_common_options(urns, opt, config_path);
  urns->add_option("--kmax", opt.kmax, "urn prefix length to realize/dump");
  urns->add_flag("--poissonized", opt.poissonized, "draw the ball count as Poisson(N)");

  auto* limits = app.add_subcommand("limits", "tabulate a limit law as x,value CSV");
  add_common_options(limits, opt, config_path);
  limits->add_option("--tabulate", opt.tabulate, "nuR | gumbel | weibull | detY");
  limits->add_option("--x-min", opt.x_min, "grid start");
  limits->add_option("--x-max", opt.x_max, "grid end");
  limits->add_option("--steps", opt.steps, "grid points");
  limits->add_option("--quadrature", opt.quadrature, "integration node count");

  auto* campaign = app.add_subcommand("campaign", "Monte Carlo estimates over an N grid");
  add_common_options(campaign, opt, config_path);
  campaign->add_option("--n-grid", opt.n_grid, "comma-separated grid, strictly increasing");
  campaign->add_option("--stats", opt.stats, "comma-separated statistics (default: all)");
  campaign->add_option("--workers", opt.workers, "worker threads");
  campaign->add_option("--x", opt.x, "critical-index scale x");

  auto* fit = app.add_subcommand("fit", "least-squares growth rates from estimates CSV");
  add_common_options(fit, opt, config_path);
  fit->add_option("--in", opt.input, "estimates CSV path");

  auto* report = app.add_subcommand("report", "compare fitted slopes against the references");
  add_common_options(report, opt, config_path);
  report->add_option("--min-fits", opt.min_fits, "slopes CSV for the Min policy");
  report->add_option("--random-fits", opt.random_fits, "slopes CSV for the Random policy");
  report->add_option("--tolerance", opt.tolerance, "deviation threshold for flagging");

  std::vector<std::string> argv_strings;
  argv_strings.reserve(args.size() + 1);
  argv_strings.push_back("flashcrowd");
  for (const auto& a : args) argv_strings.push_back(a);
  std::vector<const char*> argv;
  argv.reserve(argv_strings.size());
  for (const auto& s : argv_strings) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return std::nullopt;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e);
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (no_completion) opt.run_to_completion = false;
  spec.subcommand = app.get_subcommands().front()->get_name();
  validate_spec(spec);
  return spec;
}

std::string serialize_spec(const CommandSpec& spec) {
  const CliOptions& o = spec.options;
  json j;
  j["subcommand"] = spec.subcommand;
  j["n"] = o.n;
  j["rho"] = o.rho;
  j["policy"] = o.policy;
  j["reps"] = o.reps;
  j["seed"] = o.seed;
  j["alpha"] = o.alpha;
  j["delta"] = o.delta;
  j["model"] = o.model;
  j["out"] = o.out;
  j["trace_step"] = o.trace_step;
  j["trace_t_max"] = o.trace_t_max;
  j["run_to_completion"] = o.run_to_completion;
  j["poissonized"] = o.poissonized;
  j["n_grid"] = o.n_grid;
  j["stats"] = o.stats;
  j["workers"] = o.workers;
  j["x"] = o.x;
  j["kmax"] = o.kmax;
  j["quadrature"] = o.quadrature;
  j["tabulate"] = o.tabulate;
  j["x_min"] = o.x_min;
  j["x_max"] = o.x_max;
  j["steps"] = o.steps;
  j["input"] = o.input;
  j["min_fits"] = o.min_fits;
  j["random_fits"] = o.random_fits;
  j["tolerance"] = o.tolerance;
  return j.dump(2) + "\n";
}

void execute(const CommandSpec& spec) {
  const CliOptions& opt = spec.options;
  if (spec.subcommand == "simulate") cmd_simulate(opt);
  else if (spec.subcommand == "urns") cmd_urns(opt);
  else if (spec.subcommand == "limits") cmd_limits(opt);
  else if (spec.subcommand == "campaign") cmd_campaign(opt);
  else if (spec.subcommand == "fit") cmd_fit(opt);
  else if (spec.subcommand == "report") cmd_report(opt);
  else throw UsageError("unknown subcommand '" + spec.subcommand + "'");
}

int run_cli(const std::vector<std::string>& args) {
  try {
    auto spec = parse_cli(args);
    if (!spec) return kExitOk;
    execute(*spec);
    return kExitOk;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  args.reserve(argc > 0 ? static_cast<std::size_t>(argc - 1) : 0);
  for (int i = 1; i < argc; ++i) args.push_back(argv[i]);
  return run_cli(args);
}

}  // namespace flashcrowd
