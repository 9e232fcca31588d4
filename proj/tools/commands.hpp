#pragma once

// The five pacauction subcommands. Each is a pure function of the
// validated config: same config and seed, same bytes out.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "experiment_config.hpp"
#include "result_table.hpp"
#include "verification.hpp"

namespace pacauction::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kSuccess = 0, kDomainFailure = 1, kUsageError = 2 };

struct CommandResult {
  ResultTable table;
  int exit_code = kSuccess;
  std::string message;  // for stderr
};

namespace detail {

inline CommandResult with_columns(std::vector<std::string> columns) {
  CommandResult res;
  res.table = ResultTable(std::move(columns));
  return res;
}

inline Cell count_cell(std::uint64_t v) { return static_cast<std::int64_t>(v); }

inline std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string plan_string(const AnnotationPlan& plan) {
  std::string s;
  for (std::size_t i = 0; i < plan.size(); ++i) s += (i ? ";" : "") + std::to_string(plan[i]);
  return s;
}

inline MechanismConfig mechanism_config(const ExperimentConfig& cfg) {
  return {cfg.pac, cfg.cost, cfg.priors, cfg.interval};
}

inline CommandResult cmd_feasibility(const ExperimentConfig& cfg) {
  CommandResult res = with_columns({"row", "annotator", "eta", "psi", "min_samples", "plan",
                                    "information", "log_budget", "feasible"});
  const double eps = cfg.pac.epsilon();
  const double budget = log_budget(cfg.pac).value;
  for (std::size_t i = 0; i < cfg.etas.size(); ++i) {
    const double rate = psi(cfg.etas[i], eps);
    std::vector<Cell> row{std::string("annotator"), count_cell(i), cfg.etas[i], rate,
                          count_cell(min_samples_single(cfg.etas[i], cfg.pac))};
    if (cfg.plan) {
      row.push_back(count_cell((*cfg.plan)[i]));
      row.push_back(static_cast<double>((*cfg.plan)[i]) * rate);
    }
    res.table.add_row(std::move(row));
  }
  std::vector<Cell> total{std::string("total"), {}, {}, {}, {}, {}, {}, budget};
  if (cfg.plan) {
    const bool ok = is_feasible(*cfg.plan, cfg.etas, cfg.pac);
    total[5] = plan_string(*cfg.plan);
    total[6] = plan_information(*cfg.plan, cfg.etas, eps);
    total.push_back(ok);
    if (!ok) {
      res.exit_code = kDomainFailure;
      res.message = "plan is infeasible";
    }
  }
  res.table.add_row(std::move(total));
  return res;
}

inline CommandResult cmd_plan(const ExperimentConfig& cfg) {
  CommandResult res = with_columns({"row", "annotator", "eta", "weight", "rate", "count",
                                    "information", "objective", "log_budget", "feasible",
                                    "method"});
  const std::size_t n = cfg.etas.size();
  std::vector<double> weights(n), rates(n);
  for (std::size_t i = 0; i < n; ++i) {
    weights[i] = cfg.weights ? (*cfg.weights)[i] : cfg.cost.value(cfg.etas[i]);
    rates[i] = psi(cfg.etas[i], cfg.pac.epsilon());
  }
  const PlanProblem problem(weights, rates, log_budget(cfg.pac));
  const PlanSolution sol =
      cfg.plan_method == SolveMethod::exact ? solve_exact(problem) : solve_lp_round(problem);
  for (std::size_t i = 0; i < n; ++i) {
    res.table.add_row({std::string("annotator"), count_cell(i), cfg.etas[i], weights[i], rates[i],
                       count_cell(sol.plan[i]), static_cast<double>(sol.plan[i]) * rates[i]});
  }
  res.table.add_row({std::string("total"), {}, {}, {}, {}, plan_string(sol.plan),
                     problem.information(sol.plan), sol.objective, problem.budget().value,
                     problem.feasible(sol.plan), std::string(to_string(sol.method))});
  return res;
}

// Smallest equal per-annotator count that satisfies the feasibility test.
inline AnnotationPlan equal_split_plan(const ExperimentConfig& cfg) {
  for (std::size_t i = 0; i < cfg.etas.size(); ++i) {
    if (cfg.etas[i] > kOneThird) {
      throw ConfigError("plan", "required when a noise rate exceeds 1/3");
    }
  }
  const double per_round = plan_information(AnnotationPlan(cfg.etas.size(), 1), cfg.etas,
                                            cfg.pac.epsilon());
  auto m = static_cast<std::uint64_t>(std::ceil(log_budget(cfg.pac).value / per_round));
  AnnotationPlan plan(cfg.etas.size(), m);
  while (!is_feasible(plan, cfg.etas, cfg.pac)) {
    for (auto& x : plan) ++x;
  }
  return plan;
}

inline CommandResult cmd_simulate_mda(const ExperimentConfig& cfg) {
  CommandResult res = with_columns({"plan", "plan_feasible", "target", "trials", "failures",
                                    "failure_rate", "std_error", "upper_99", "delta",
                                    "below_delta", "below_delta_99"});
  const AnnotationPlan plan = cfg.plan ? *cfg.plan : equal_split_plan(cfg);
  bool feasible = true;
  for (double eta : cfg.etas) feasible = feasible && eta <= kOneThird;
  feasible = feasible && is_feasible(plan, cfg.etas, cfg.pac);
  const auto dist = SamplingDistribution::uniform(cfg.simulation.domain_size);
  const auto est = estimate_failure_rate(plan, cfg.etas, cfg.pac, cfg.simulation.target, dist,
                                         cfg.simulation.trials, cfg.seed);
  const auto failures = static_cast<std::uint64_t>(
      std::llround(est.value * static_cast<double>(cfg.simulation.trials)));
  const double upper = clopper_pearson_upper(failures, cfg.simulation.trials, 0.99);
  res.table.add_row({plan_string(plan), feasible, count_cell(cfg.simulation.target),
                     count_cell(cfg.simulation.trials), count_cell(failures), est.value,
                     est.std_error, upper, cfg.pac.delta(), est.value < cfg.pac.delta(),
                     upper < cfg.pac.delta()});
  return res;
}

inline std::optional<RegularMechanism> build_mechanism(const ExperimentConfig& cfg,
                                                       bool allow_irregular,
                                                       CommandResult& res) {
  try {
    return RegularMechanism::certify(mechanism_config(cfg), cfg.verify.regularity_grid);
  } catch (const RegularityError& e) {
    if (!allow_irregular) {
      res.exit_code = kDomainFailure;
      res.message = std::string(e.what()) + "; pass --allow-irregular to run anyway";
      return std::nullopt;
    }
    res.message = std::string("warning: ") + e.what();
    return RegularMechanism::assume_regular(mechanism_config(cfg));
  }
}

inline CommandResult cmd_auction(const ExperimentConfig& cfg, bool allow_irregular) {
  CommandResult res = with_columns(
      {"annotator", "bid", "score", "winner", "allocation", "critical_bid", "payment"});
  const auto mech = build_mechanism(cfg, allow_irregular, res);
  if (!mech) return res;
  res.table.metadata["regularity_certified"] = mech->certified();
  const auto out = run_auction(*mech, cfg.bids, cfg.payment);
  for (std::size_t i = 0; i < cfg.bids.size(); ++i) {
    const bool wins = out.winner == i;
    res.table.add_row({count_cell(i), cfg.bids[i], mech->score_of(i, cfg.bids[i]), wins,
                       count_cell(out.allocation[i]),
                       wins ? Cell(*out.critical_bid) : Cell(), out.payments[i]});
  }
  return res;
}

inline CommandResult cmd_verify(const ExperimentConfig& cfg, bool allow_irregular) {
  CommandResult res = with_columns({"property", "kind", "passed", "value", "tolerance", "detail"});
  auto& t = res.table;
  bool hard_ok = true;
  auto hard = [&](const std::string& name, bool ok, Cell value, Cell tol, std::string detail) {
    hard_ok = hard_ok && ok;
    t.add_row({name, std::string("hard"), ok, value, tol, std::move(detail)});
  };
  const auto& ver = cfg.verify;

  const auto reg = check_regularity(cfg.cost, cfg.priors.front(), cfg.pac.epsilon(),
                                    cfg.interval, ver.regularity_grid);
  hard("regularity", reg.is_regular, reg.max_violation, 1e-9,
       reg.violating_eta ? "violation ends at eta = " + format_double(*reg.violating_eta)
                         : std::to_string(ver.regularity_grid) + "-point grid");

  if (reg.is_regular || allow_irregular) {
    const auto mech = reg.is_regular ? RegularMechanism::certify(mechanism_config(cfg),
                                                                 ver.regularity_grid)
                                     : RegularMechanism::assume_regular(mechanism_config(cfg));
    const auto profiles = strategic_profiles(mech, ver.profiles, ver.annotators,
                                             Rng::stream(cfg.seed, 1)());
    const std::string across = std::to_string(ver.profiles) + " profiles x " +
                               std::to_string(ver.sweep_points) + " reports";
    const auto integral =
        run_strategic_matrix(mech, profiles, ver.sweep_points, PaymentVariant::integral);
    hard("dsic_integral", integral.max_regret <= 1e-6, integral.max_regret, 1e-6, across);
    hard("ir_integral", integral.ir_ok, {}, 1e-12, "truthful ex-post utility");
    hard("pac_compatibility", integral.pac_ok, {}, {}, "winner allocation meets the budget");
    hard("elicitation_premium", integral.premium_ok, {}, {}, "c(critical bid) >= c(winner bid)");

    const auto critical =
        run_strategic_matrix(mech, profiles, ver.sweep_points, PaymentVariant::critical_price);
    t.add_row({std::string("dsic_critical_price"), std::string("measured"),
               critical.max_regret <= 1e-6, critical.max_regret, 1e-6, across});

    const auto interim = check_interim_rules(mech, ver.annotators, ver.rule_points, ver.samples,
                                             Rng::stream(cfg.seed, 2)());
    const std::string mc = std::to_string(ver.rule_points) + " reports x " +
                           std::to_string(ver.samples) + " samples";
    t.add_row({std::string("wme_interim_allocation"), std::string("statistical"),
               interim.wme_ok, interim.worst_monotonicity_z, 4.0, "worst drop in SE; " + mc});
    t.add_row({std::string("payment_identity"), std::string("statistical"), interim.identity_ok,
               interim.worst_identity_z, 4.0, "worst gap in SE; " + mc});
  }

  Rng rng = Rng::stream(cfg.seed, 3);
  std::uint64_t additive = 0, premise = 0, multiplicative = 0;
  for (std::uint64_t k = 0; k < ver.instances; ++k) {
    const auto inst = random_rounding_instance(rng);
    const auto r = verify_rounding_bounds(inst.problem, inst.m0);
    additive += r.additive_ok ? 1 : 0;
    if (r.multiplicative_premise) {
      ++premise;
      multiplicative += r.multiplicative_ok ? 1 : 0;
    }
  }
  hard("rounding_additive", additive == ver.instances, count_cell(additive), {},
       std::to_string(ver.instances) + " instances");
  hard("rounding_multiplicative", multiplicative == premise, count_cell(multiplicative), {},
       std::to_string(premise) + " instances satisfy the premise");

  if (!hard_ok) {
    res.exit_code = kDomainFailure;
    res.message = "a hard property failed";
  }
  return res;
}

}  // namespace detail

/// Runs a validated config. Domain errors inside the computation surface as
/// exceptions; the caller maps them to exit codes.
inline CommandResult run_command(const ExperimentConfig& cfg, bool allow_irregular) {
  CommandResult res;
  if (cfg.command == "feasibility") {
    res = detail::cmd_feasibility(cfg);
  } else if (cfg.command == "plan") {
    res = detail::cmd_plan(cfg);
  } else if (cfg.command == "simulate-mda") {
    res = detail::cmd_simulate_mda(cfg);
  } else if (cfg.command == "auction") {
    res = detail::cmd_auction(cfg, allow_irregular);
  } else {
    res = detail::cmd_verify(cfg, allow_irregular);
  }
  ordered_json config = cfg.normalized;
  config["allow_irregular"] = allow_irregular;
  const std::string canonical = config.dump();
  auto& meta = res.table.metadata;
  ordered_json head = ordered_json::object();
  head["version"] = kVersion;
  head["command"] = cfg.command;
  head["seed"] = cfg.seed;
  head["config_hash"] = detail::hex64(fnv1a(canonical));
  for (const auto& [key, value] : meta.items()) head[key] = value;
  head["config"] = config;
  meta = head;
  return res;
}

/// Full command-line entry point; returns the process exit code.
inline int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"PAC learning from strategic noisy annotators: experiments and checks",
               "pacauction"};
  app.set_version_flag("--version", kVersion);
  std::string config_path, output_path, format = "csv";
  std::optional<std::uint64_t> seed;
  bool allow_irregular = false;
  app.add_option("-c,--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("-s,--seed", seed, "override the config seed");
  app.add_option("-o,--output", output_path, "write the result table here instead of stdout");
  app.add_option("-f,--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_flag("--allow-irregular", allow_irregular,
               "run the auction even if the score is not monotone");
  app.require_subcommand(1, 1);
  for (const auto& name : command_names()) app.add_subcommand(name)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  json doc = json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      err << "error: " << config_path << ": " << e.what() << '\n';
      return kUsageError;
    }
  }

  try {
    const ExperimentConfig cfg = parse_config(doc, command, seed);
    const CommandResult res = run_command(cfg, allow_irregular);
    if (!res.message.empty()) err << res.message << '\n';
    if (!res.table.columns.empty() && (res.exit_code == kSuccess || !res.table.rows.empty())) {
      const std::string text = render(res.table, format);
      if (output_path.empty()) {
        out << text;
      } else {
        std::ofstream file(output_path, std::ios::binary);
        file << text;
        if (!file) {
          err << "error: cannot write " << output_path << '\n';
          return kUsageError;
        }
      }
    }
    return res.exit_code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDomainFailure;
  }
}

}  // namespace pacauction::cli
