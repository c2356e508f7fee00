#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cannings/errors.hpp"
#include "cannings/parallel.hpp"
#include "cannings/profile.hpp"
#include "cannings/serialize.hpp"
#include "cannings/verify.hpp"

namespace cannings {

// Validated experiment description. The offspring law binds its population
// size at run time (the counterexample descriptor carries only alpha), so
// the law is exposed as a factory over n.
struct ExperimentConfig {
  ProfilePair pair{constant_profile(1.0, 1.0), constant_profile(1.0, 1.0)};
  json law_json = json{{"law", "wright_fisher"}};
  std::vector<std::int64_t> n_grid{256};
  std::int64_t k = 2;
  std::int64_t reps = 1000;
  std::int64_t h_star = 0;  // 0: command-specific default
  std::uint64_t seed = 0;
  Thresholds thresholds;
  std::string out_dir = "out";
  int workers = 0;  // 0: all available cores

  std::int64_t n() const { return n_grid.front(); }
  int effective_workers() const { return workers > 0 ? workers : default_workers(); }
  OffspringLaw law_for(std::int64_t population) const {
    return law_from_json(law_json, population);
  }
  bool law_is_counterexample() const {
    return law_json.at("law").get<std::string>() == "counterexample";
  }

  // Canonical semantic serialization: everything that affects results.
  // Execution parameters (workers, output directory) stay out, so runs with
  // different worker counts hash identically.
  json canonical() const {
    json thr{{"p_min", thresholds.p_min},
             {"ks_max", thresholds.ks_max},
             {"se_mult", thresholds.se_mult},
             {"chi2_p_min", thresholds.chi2_p_min},
             {"cdfi_quantile", thresholds.cdfi_quantile},
             {"cdfi_bound", thresholds.cdfi_bound}};
    return json{{"profile",
                 {{"ell", profile_to_json(pair.ell())},
                  {"sigma", profile_to_json(pair.sigma())},
                  {"ratio_at_zero", pair.ratio_at_zero()}}},
                {"law", law_json},
                {"n_grid", n_grid},
                {"k", k},
                {"reps", reps},
                {"h_star", h_star},
                {"seed", seed},
                {"thresholds", thr}};
  }
};

namespace detail {

inline void reject_unknown_keys(const json& j, const std::string& where,
                                const std::set<std::string>& allowed) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key))
      throw ValidationError(where.empty() ? key : where + "." + key,
                            "unknown key");
  }
}

inline std::int64_t require_positive_int(const json& j, const std::string& field) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 1)
    throw ValidationError(field, "must be a positive integer");
  return j.get<std::int64_t>();
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ParseError("config must be a JSON object");
  detail::reject_unknown_keys(
      j, "",
      {"profile", "law", "n", "n_grid", "k", "reps", "h_star", "seed",
       "thresholds", "out", "workers"});
  ExperimentConfig cfg;

  if (j.contains("profile")) {
    const json& p = j.at("profile");
    detail::reject_unknown_keys(p, "profile", {"ell", "sigma", "ratio_at_zero"});
    ContinuousProfile ell = constant_profile(1.0, 1.0);
    ContinuousProfile sigma = constant_profile(1.0, 1.0);
    try {
      if (p.contains("ell")) ell = profile_from_json(p.at("ell"));
    } catch (const Error& e) {
      throw ValidationError("profile.ell", e.what());
    }
    try {
      if (p.contains("sigma")) sigma = profile_from_json(p.at("sigma"));
    } catch (const Error& e) {
      throw ValidationError("profile.sigma", e.what());
    }
    std::optional<double> ratio;
    if (p.contains("ratio_at_zero")) {
      if (!p.at("ratio_at_zero").is_number())
        throw ValidationError("profile.ratio_at_zero", "must be a number");
      ratio = p.at("ratio_at_zero").get<double>();
    }
    try {
      cfg.pair = ProfilePair(std::move(ell), std::move(sigma), ratio);
    } catch (const Error& e) {
      throw ValidationError("profile", e.what());
    }
  }

  if (j.contains("n") && j.contains("n_grid"))
    throw ValidationError("n", "give either n or n_grid, not both");
  if (j.contains("n")) cfg.n_grid = {detail::require_positive_int(j.at("n"), "n")};
  if (j.contains("n_grid")) {
    if (!j.at("n_grid").is_array() || j.at("n_grid").empty())
      throw ValidationError("n_grid", "must be a non-empty array");
    cfg.n_grid.clear();
    for (const auto& v : j.at("n_grid"))
      cfg.n_grid.push_back(detail::require_positive_int(v, "n_grid"));
    for (std::size_t i = 1; i < cfg.n_grid.size(); ++i)
      if (cfg.n_grid[i] <= cfg.n_grid[i - 1])
        throw ValidationError("n_grid", "must be strictly increasing");
  }
  for (std::int64_t n : cfg.n_grid)
    if (n < 2) throw ValidationError("n", "must be at least 2");

  if (j.contains("law")) {
    const json& l = j.at("law");
    if (!l.is_object() || !l.contains("law") || !l.at("law").is_string())
      throw ValidationError("law", "must be an object with a \"law\" tag");
    const std::string name = l.at("law").get<std::string>();
    if (name == "wright_fisher")
      detail::reject_unknown_keys(l, "law", {"law"});
    else if (name == "dirichlet_multinomial")
      detail::reject_unknown_keys(l, "law", {"law", "theta"});
    else if (name == "counterexample")
      detail::reject_unknown_keys(l, "law", {"law", "alpha"});
    cfg.law_json = l;
    try {
      (void)law_from_json(l, cfg.n_grid.front());  // check at the run size
    } catch (const Error& e) {
      throw ValidationError("law", e.what());
    }
  }

  if (j.contains("k")) cfg.k = detail::require_positive_int(j.at("k"), "k");
  if (j.contains("reps")) cfg.reps = detail::require_positive_int(j.at("reps"), "reps");
  if (j.contains("h_star"))
    cfg.h_star = detail::require_positive_int(j.at("h_star"), "h_star");
  if (j.contains("seed")) {
    const json& s = j.at("seed");
    if (!s.is_number_integer() || s.is_number_float() ||
        (s.is_number_integer() && !s.is_number_unsigned() && s.get<std::int64_t>() < 0))
      throw ValidationError("seed", "must be a nonnegative integer");
    cfg.seed = s.get<std::uint64_t>();
  }
  if (j.contains("workers")) {
    const auto w = detail::require_positive_int(j.at("workers"), "workers");
    if (w > 4096) throw ValidationError("workers", "implausibly large");
    cfg.workers = static_cast<int>(w);
  }
  if (j.contains("out")) {
    if (!j.at("out").is_string()) throw ValidationError("out", "must be a string");
    cfg.out_dir = j.at("out").get<std::string>();
  }
  if (j.contains("thresholds")) {
    const json& t = j.at("thresholds");
    detail::reject_unknown_keys(t, "thresholds",
                                {"p_min", "ks_max", "se_mult", "chi2_p_min",
                                 "cdfi_quantile", "cdfi_bound"});
    auto get = [&](const char* key, double fallback) {
      if (!t.contains(key)) return fallback;
      if (!t.at(key).is_number())
        throw ValidationError(std::string("thresholds.") + key, "must be a number");
      const double v = t.at(key).get<double>();
      if (!(v > 0.0))
        throw ValidationError(std::string("thresholds.") + key, "must be positive");
      return v;
    };
    cfg.thresholds.p_min = get("p_min", cfg.thresholds.p_min);
    cfg.thresholds.ks_max = get("ks_max", cfg.thresholds.ks_max);
    cfg.thresholds.se_mult = get("se_mult", cfg.thresholds.se_mult);
    cfg.thresholds.chi2_p_min = get("chi2_p_min", cfg.thresholds.chi2_p_min);
    cfg.thresholds.cdfi_quantile = get("cdfi_quantile", cfg.thresholds.cdfi_quantile);
    cfg.thresholds.cdfi_bound = get("cdfi_bound", cfg.thresholds.cdfi_bound);
  }

  // cross-field rules
  if (cfg.law_is_counterexample()) {
    const auto& knots = cfg.pair.ell().knots();
    for (const Knot& kn : knots)
      if (kn.v != knots.front().v)
        throw ValidationError("law", "counterexample requires a constant profile");
    // the law binds its population size to the run's n, so q must equal n
    if (knots.front().v != 1.0)
      throw ValidationError("law",
                            "counterexample requires the constant unit profile (q = n)");
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("config parse error: ") + e.what());
  }
  return parse_config(j);
}

}  // namespace cannings
