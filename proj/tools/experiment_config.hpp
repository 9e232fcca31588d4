#pragma once

// Experiment configuration: one JSON document per run, validated against
// every domain invariant up front. Defaults are written back into a
// normalized copy so the emitted metadata alone reproduces the run.

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pacauction/pacauction.hpp"

namespace pacauction::cli {

using nlohmann::json;
using nlohmann::ordered_json;

// Bad or missing configuration value; `path` locates it (e.g. "pac.delta").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

struct SimulationSettings {
  std::uint64_t trials = 2000;
  std::uint64_t domain_size = 0;
  std::uint64_t target = 0;
};

struct VerifySettings {
  std::uint64_t annotators = 3;
  std::uint64_t profiles = 10;
  std::uint64_t sweep_points = 200;
  std::uint64_t rule_points = 10;
  std::uint64_t samples = 2000;
  std::uint64_t instances = 200;
  std::uint64_t regularity_grid = 1000;
};

struct ExperimentConfig {
  std::string command;
  PacParams pac;
  std::vector<double> etas;
  std::optional<AnnotationPlan> plan;
  std::optional<std::vector<double>> weights;
  CostModel cost;
  std::vector<PriorModel> priors;
  BidInterval interval;
  std::vector<double> bids;
  PaymentVariant payment;
  SolveMethod plan_method;
  SimulationSettings simulation;
  VerifySettings verify;
  std::uint64_t seed;
  ordered_json normalized;
};

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"feasibility", "plan", "simulate-mda", "auction",
                                              "verify"};
  return names;
}

namespace detail {

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline void reject_unknown(const json& node, const std::string& path,
                           const std::set<std::string>& allowed) {
  for (const auto& [key, value] : node.items()) {
    if (!allowed.count(key)) throw ConfigError(join(path, key), "unknown field");
  }
}

inline const json* member(const json& node, const std::string& key) {
  auto it = node.find(key);
  return it == node.end() ? nullptr : &*it;
}

inline double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(path, "expected a finite number");
  return x;
}

inline std::uint64_t as_count(const json& v, const std::string& path) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::uint64_t>();
  throw ConfigError(path, "expected a non-negative integer");
}

inline std::vector<double> as_numbers(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t j = 0; j < v.size(); ++j) {
    out.push_back(as_number(v[j], path + "[" + std::to_string(j) + "]"));
  }
  return out;
}

inline std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

inline const json& as_object(const json& v, const std::string& path) {
  if (!v.is_object()) throw ConfigError(path, "expected an object");
  return v;
}

inline double number_or(const json& node, const std::string& key, const std::string& path,
                        double fallback) {
  const json* v = member(node, key);
  return v ? as_number(*v, join(path, key)) : fallback;
}

inline std::uint64_t count_or(const json& node, const std::string& key, const std::string& path,
                              std::uint64_t fallback) {
  const json* v = member(node, key);
  return v ? as_count(*v, join(path, key)) : fallback;
}

// Runs a domain-type constructor, relabelling its error with the field path.
template <class F>
auto at_path(const std::string& path, F&& make) -> decltype(make()) {
  try {
    return make();
  } catch (const std::logic_error& e) {
    throw ConfigError(path, e.what());
  }
}

inline CostModel parse_cost(const json* node, ordered_json& out) {
  static const json empty = json::object();
  const json& n = node ? as_object(*node, "cost") : empty;
  const std::string kind = member(n, "kind") ? as_string(n["kind"], "cost.kind") : "exponential";
  out["kind"] = kind;
  if (kind == "exponential") {
    reject_unknown(n, "cost", {"kind", "scale", "rate"});
    const double scale = number_or(n, "scale", "cost", 1.0);
    const double rate = number_or(n, "rate", "cost", 30.0);
    out["scale"] = scale;
    out["rate"] = rate;
    return at_path("cost", [&] { return CostModel::exponential(scale, rate); });
  }
  if (kind == "linear") {
    reject_unknown(n, "cost", {"kind", "intercept", "slope"});
    const double intercept = number_or(n, "intercept", "cost", 1.0);
    const double slope = number_or(n, "slope", "cost", 1.0);
    out["intercept"] = intercept;
    out["slope"] = slope;
    return at_path("cost", [&] { return CostModel::linear(intercept, slope); });
  }
  if (kind == "table") {
    reject_unknown(n, "cost", {"kind", "eta", "cost"});
    if (!member(n, "eta") || !member(n, "cost")) {
      throw ConfigError("cost", "table cost needs \"eta\" and \"cost\" arrays");
    }
    const auto eta = as_numbers(n["eta"], "cost.eta");
    const auto value = as_numbers(n["cost"], "cost.cost");
    out["eta"] = eta;
    out["cost"] = value;
    return at_path("cost", [&] { return CostModel::table(eta, value); });
  }
  throw ConfigError("cost.kind", "unknown cost kind \"" + kind + "\"");
}

inline PriorModel parse_prior(const json& n, const std::string& path, ordered_json& out) {
  as_object(n, path);
  const std::string kind =
      member(n, "kind") ? as_string(n["kind"], join(path, "kind")) : "uniform";
  out["kind"] = kind;
  if (kind == "uniform") {
    reject_unknown(n, path, {"kind"});
    return PriorModel::uniform();
  }
  if (kind == "truncated_beta") {
    reject_unknown(n, path, {"kind", "alpha", "beta"});
    const double a = number_or(n, "alpha", path, 1.0);
    const double b = number_or(n, "beta", path, 1.0);
    out["alpha"] = a;
    out["beta"] = b;
    return at_path(path, [&] { return PriorModel::truncated_beta(a, b); });
  }
  if (kind == "table") {
    reject_unknown(n, path, {"kind", "eta", "density"});
    if (!member(n, "eta") || !member(n, "density")) {
      throw ConfigError(path, "table prior needs \"eta\" and \"density\" arrays");
    }
    const auto eta = as_numbers(n["eta"], join(path, "eta"));
    const auto density = as_numbers(n["density"], join(path, "density"));
    out["eta"] = eta;
    out["density"] = density;
    return at_path(path, [&] { return PriorModel::table(eta, density); });
  }
  throw ConfigError(join(path, "kind"), "unknown prior kind \"" + kind + "\"");
}

}  // namespace detail

/// Validates `doc` for `command`. `seed_override` (from the command line)
/// replaces the document's seed.
inline ExperimentConfig parse_config(const json& doc, const std::string& command,
                                     std::optional<std::uint64_t> seed_override = std::nullopt) {
  using namespace detail;
  bool known = false;
  for (const auto& name : command_names()) known = known || name == command;
  if (!known) throw ConfigError("command", "unknown command \"" + command + "\"");
  as_object(doc, "<root>");
  reject_unknown(doc, "", {"pac", "etas", "plan", "weights", "cost", "prior", "bid_interval",
                           "bids", "payment", "plan_method", "simulation", "verify", "seed"});

  ordered_json norm = ordered_json::object();
  norm["command"] = command;

  // pac
  static const json empty = json::object();
  const json& pac_node = member(doc, "pac") ? as_object(doc["pac"], "pac") : empty;
  reject_unknown(pac_node, "pac", {"epsilon", "delta", "concept_count"});
  const double epsilon = number_or(pac_node, "epsilon", "pac", 0.1);
  const double delta = number_or(pac_node, "delta", "pac", 0.05);
  const std::uint64_t concepts = count_or(pac_node, "concept_count", "pac", 100);
  PacParams pac = at_path("pac", [&] { return PacParams(epsilon, delta, concepts); });
  norm["pac"] = {{"epsilon", epsilon}, {"delta", delta}, {"concept_count", concepts}};

  // annotators
  const bool needs_etas =
      command == "feasibility" || command == "plan" || command == "simulate-mda";
  std::vector<double> etas;
  if (member(doc, "etas")) {
    etas = as_numbers(doc["etas"], "etas");
  } else if (needs_etas) {
    throw ConfigError("etas", "required for " + command);
  }
  if (needs_etas && etas.empty()) throw ConfigError("etas", "at least one annotator is required");
  const double eta_cap = command == "simulate-mda" ? 0.5 : kOneThird;
  for (std::size_t i = 0; i < etas.size(); ++i) {
    const bool ok = command == "simulate-mda" ? (etas[i] >= 0.0 && etas[i] < 0.5)
                                              : (etas[i] >= 0.0 && etas[i] <= eta_cap);
    if (!ok) {
      throw ConfigError("etas[" + std::to_string(i) + "]",
                        command == "simulate-mda" ? "noise rate must lie in [0, 1/2)"
                                                  : "noise rate must lie in [0, 1/3]");
    }
  }
  norm["etas"] = etas;

  std::optional<AnnotationPlan> plan;
  if (member(doc, "plan")) {
    const json& p = doc["plan"];
    if (!p.is_array()) throw ConfigError("plan", "expected an array of counts");
    AnnotationPlan counts;
    for (std::size_t j = 0; j < p.size(); ++j) {
      counts.push_back(as_count(p[j], "plan[" + std::to_string(j) + "]"));
    }
    // an empty plan buys nothing from anyone
    if (counts.empty()) counts.assign(etas.size(), 0);
    if (counts.size() != etas.size()) {
      throw ConfigError("plan", "has " + std::to_string(counts.size()) + " entries but " +
                                    std::to_string(etas.size()) + " annotators are configured");
    }
    plan = counts;
  }

  std::optional<std::vector<double>> weights;
  if (member(doc, "weights")) {
    weights = as_numbers(doc["weights"], "weights");
    if (weights->size() != etas.size()) {
      throw ConfigError("weights", "must have one entry per annotator");
    }
    for (std::size_t i = 0; i < weights->size(); ++i) {
      if (!((*weights)[i] > 0.0)) {
        throw ConfigError("weights[" + std::to_string(i) + "]", "weight must be positive");
      }
    }
  }

  // cost / prior / interval
  ordered_json cost_norm = ordered_json::object();
  CostModel cost = parse_cost(member(doc, "cost"), cost_norm);
  norm["cost"] = cost_norm;

  std::vector<PriorModel> priors;
  if (const json* p = member(doc, "prior"); p && p->is_array()) {
    if (p->empty()) throw ConfigError("prior", "per-annotator prior list is empty");
    ordered_json list = ordered_json::array();
    for (std::size_t j = 0; j < p->size(); ++j) {
      ordered_json one = ordered_json::object();
      priors.push_back(parse_prior((*p)[j], "prior[" + std::to_string(j) + "]", one));
      list.push_back(one);
    }
    norm["prior"] = list;
  } else {
    ordered_json one = ordered_json::object();
    priors.push_back(parse_prior(p ? *p : empty, "prior", one));
    norm["prior"] = one;
  }

  const json& iv_node =
      member(doc, "bid_interval") ? as_object(doc["bid_interval"], "bid_interval") : empty;
  reject_unknown(iv_node, "bid_interval", {"lo", "hi"});
  const double lo = number_or(iv_node, "lo", "bid_interval", 0.05);
  const double hi = number_or(iv_node, "hi", "bid_interval", 0.30);
  BidInterval interval = at_path("bid_interval", [&] { return BidInterval(lo, hi); });
  norm["bid_interval"] = {{"lo", lo}, {"hi", hi}};
  for (std::size_t j = 0; j < priors.size(); ++j) {
    for (double eta : interval.grid(64)) {
      if (!(priors[j].density(eta) > 0.0)) {
        throw ConfigError(priors.size() == 1 ? "prior" : "prior[" + std::to_string(j) + "]",
                          "density must be positive on the bid interval");
      }
    }
  }

  std::vector<double> bids;
  if (member(doc, "bids")) {
    bids = as_numbers(doc["bids"], "bids");
    for (std::size_t j = 0; j < bids.size(); ++j) {
      if (!interval.contains(bids[j])) {
        throw ConfigError("bids[" + std::to_string(j) + "]", "bid outside the bid interval");
      }
    }
  }
  if (command == "auction" && bids.empty()) throw ConfigError("bids", "required for auction");
  if (!bids.empty() && priors.size() != 1 && priors.size() != bids.size()) {
    throw ConfigError("prior", "per-annotator priors must match the number of bids");
  }
  if (command == "verify" && priors.size() != 1) {
    throw ConfigError("prior", "verify uses one shared prior");
  }
  norm["bids"] = bids;

  // variants
  const std::string payment_name =
      member(doc, "payment") ? as_string(doc["payment"], "payment") : "integral";
  PaymentVariant payment;
  if (payment_name == "integral") {
    payment = PaymentVariant::integral;
  } else if (payment_name == "critical_price") {
    payment = PaymentVariant::critical_price;
  } else {
    throw ConfigError("payment", "expected \"integral\" or \"critical_price\"");
  }
  norm["payment"] = payment_name;

  const std::string method_name =
      member(doc, "plan_method") ? as_string(doc["plan_method"], "plan_method") : "exact";
  SolveMethod method;
  if (method_name == "exact") {
    method = SolveMethod::exact;
  } else if (method_name == "lp_round") {
    method = SolveMethod::lp_round;
  } else {
    throw ConfigError("plan_method", "expected \"exact\" or \"lp_round\"");
  }
  norm["plan_method"] = method_name;
  if (weights) norm["weights"] = *weights;

  // simulation
  const json& sim_node =
      member(doc, "simulation") ? as_object(doc["simulation"], "simulation") : empty;
  reject_unknown(sim_node, "simulation", {"trials", "domain_size", "target"});
  SimulationSettings sim;
  sim.trials = count_or(sim_node, "trials", "simulation", sim.trials);
  if (sim.trials == 0) throw ConfigError("simulation.trials", "must be >= 1");
  sim.domain_size = count_or(sim_node, "domain_size", "simulation", pac.concept_count() - 1);
  if (sim.domain_size + 1 != pac.concept_count()) {
    throw ConfigError("simulation.domain_size",
                      "threshold class over K points has K + 1 concepts; expected " +
                          std::to_string(pac.concept_count() - 1));
  }
  sim.target = count_or(sim_node, "target", "simulation", sim.domain_size / 2);
  if (sim.target > sim.domain_size) {
    throw ConfigError("simulation.target", "threshold index must be <= domain_size");
  }
  norm["simulation"] = {
      {"trials", sim.trials}, {"domain_size", sim.domain_size}, {"target", sim.target}};

  // verification sizes
  const json& ver_node = member(doc, "verify") ? as_object(doc["verify"], "verify") : empty;
  reject_unknown(ver_node, "verify",
                 {"annotators", "profiles", "sweep_points", "rule_points", "samples",
                  "instances", "regularity_grid"});
  VerifySettings ver;
  auto positive = [&](const char* key, std::uint64_t fallback) {
    const std::uint64_t v = count_or(ver_node, key, "verify", fallback);
    if (v == 0) throw ConfigError(join("verify", key), "must be >= 1");
    return v;
  };
  ver.annotators = positive("annotators", ver.annotators);
  ver.profiles = positive("profiles", ver.profiles);
  ver.sweep_points = positive("sweep_points", ver.sweep_points);
  ver.rule_points = positive("rule_points", ver.rule_points);
  ver.samples = positive("samples", ver.samples);
  ver.instances = positive("instances", ver.instances);
  ver.regularity_grid = positive("regularity_grid", ver.regularity_grid);
  norm["verify"] = {{"annotators", ver.annotators},   {"profiles", ver.profiles},
                    {"sweep_points", ver.sweep_points}, {"rule_points", ver.rule_points},
                    {"samples", ver.samples},         {"instances", ver.instances},
                    {"regularity_grid", ver.regularity_grid}};

  std::uint64_t seed = member(doc, "seed") ? as_count(doc["seed"], "seed") : 1;
  if (seed_override) seed = *seed_override;
  norm["seed"] = seed;
  if (plan) norm["plan"] = *plan;

  return {command, pac,    std::move(etas), std::move(plan), std::move(weights),
          cost,    std::move(priors), interval, std::move(bids), payment,
          method,  sim,    ver,  seed,  std::move(norm)};
}

}  // namespace pacauction::cli
