#pragma once

#include <filesystem>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "cannings/config.hpp"
#include "cannings/serialize.hpp"
#include "cannings/verify.hpp"

namespace cannings {

inline constexpr const char* kSchemaVersion = "1";
inline constexpr const char* kLibraryVersion = "cannings-lab 0.1.0";

inline json report_to_json(const ComparisonReport& r) {
  json marginals = json::array();
  for (const auto& m : r.marginals)
    marginals.push_back({{"name", m.name},
                         {"statistic", m.statistic},
                         {"p_value", m.p_value},
                         {"p_adjusted", m.p_adjusted},
                         {"is_ks", m.is_ks}});
  return json{{"test", r.test},         {"seed", r.seed},
              {"reps_a", r.reps_a},     {"reps_b", r.reps_b},
              {"pass", r.pass},         {"marginals", marginals}};
}

inline std::string report_to_text(const ComparisonReport& r) {
  std::ostringstream out;
  out << r.test << "  (reps " << r.reps_a << " vs " << r.reps_b << ", seed "
      << r.seed << ")\n";
  out << std::left << std::setw(26) << "marginal" << std::right << std::setw(12)
      << "statistic" << std::setw(12) << "p" << std::setw(12) << "p_adj" << '\n';
  out << std::fixed << std::setprecision(6);
  for (const auto& m : r.marginals)
    out << std::left << std::setw(26) << m.name << std::right << std::setw(12)
        << m.statistic << std::setw(12) << m.p_value << std::setw(12)
        << m.p_adjusted << '\n';
  out << (r.pass ? "PASS" : "FAIL") << '\n';
  return out.str();
}

inline json curve_to_json(const QuantileCurve& c) {
  json points = json::array();
  for (const auto& p : c.points)
    points.push_back({{"n", p.n},
                      {"point", p.estimate.point},
                      {"ci_low", p.estimate.ci_low},
                      {"ci_high", p.estimate.ci_high}});
  return json{{"probe", c.probe},
              {"quantile", c.quantile},
              {"seed", c.seed},
              {"points", points}};
}

inline std::string curve_to_csv(const QuantileCurve& c) {
  std::ostringstream out;
  out << "n,point,ci_low,ci_high\n";
  out << std::setprecision(17);
  for (const auto& p : c.points)
    out << p.n << ',' << p.estimate.point << ',' << p.estimate.ci_low << ','
        << p.estimate.ci_high << '\n';
  return out.str();
}

inline std::string moments_to_csv(const MomentAsymptoticsReport& r) {
  std::ostringstream out;
  out << "n,s,sigma2,n_collision,distinct3,distinct3_se,limit22_residual,"
         "third_over_n,h2i_ratio,l2_tail\n";
  out << std::setprecision(17);
  for (const auto& row : r.rows)
    out << row.n << ',' << row.s << ',' << row.sigma2 << ',' << row.n_collision
        << ',' << row.distinct3 << ',' << row.distinct3_se << ','
        << row.limit22_residual << ',' << row.third_over_n << ','
        << row.h2i_ratio << ',' << row.l2_tail << '\n';
  return out.str();
}

// Collects artifacts, then writes them together with a manifest carrying a
// content hash per file. Artifact bytes depend only on (config, seed), never
// on worker count or wall time.
class ArtifactWriter {
 public:
  ArtifactWriter(std::string dir, json config_canonical, std::string command)
      : dir_(std::move(dir)),
        config_hash_(hex64(fnv1a64(config_canonical.dump()))),
        command_(std::move(command)) {}

  void add(const std::string& name, const std::string& content) {
    artifacts_.emplace_back(name, content);
  }

  void finalize(std::uint64_t seed, bool pass) {
    std::filesystem::create_directories(dir_);
    json listed = json::array();
    for (const auto& [name, content] : artifacts_) {
      write_file(dir_ + "/" + name, content);
      listed.push_back({{"name", name},
                        {"bytes", content.size()},
                        {"fnv1a64", hex64(fnv1a64(content))}});
    }
    const json manifest{{"schema_version", kSchemaVersion},
                        {"library", kLibraryVersion},
                        {"command", command_},
                        {"config_hash", config_hash_},
                        {"seed", seed},
                        {"pass", pass},
                        {"artifacts", listed}};
    write_file(dir_ + "/manifest.json", manifest.dump(2) + "\n");
  }

 private:
  std::string dir_;
  std::string config_hash_;
  std::string command_;
  std::vector<std::pair<std::string, std::string>> artifacts_;
};

// Exit codes: 0 ok / checks pass, 1 config error (thrown before this point),
// 2 runtime error, 3 check failed.
inline int run_experiment(const ExperimentConfig& cfg, const std::string& command,
                          bool check, std::ostream& log) {
  ArtifactWriter writer(cfg.out_dir, cfg.canonical(), command);
  const int workers = cfg.effective_workers();
  bool pass = true;

  if (command == "simulate-tree") {
    const auto profile = discretize(cfg.pair.ell(), cfg.n());
    Rng rng(StreamKey{cfg.seed, 90, 0});
    const auto tree = build_tree(profile, cfg.law_for(cfg.n()), rng);
    writer.add("tree.csv", tree_to_csv(tree));
    writer.add("height.csv", lattice_path_to_csv(height_function(tree)));
    writer.add("contour.csv", lattice_path_to_csv(contour_function(tree)));
    log << "tree with " << tree.num_vertices() << " vertices written\n";
  } else if (command == "trace") {
    const auto profile = discretize(cfg.pair.ell(), cfg.n());
    const std::int64_t h_star = cfg.h_star > 0 ? cfg.h_star : cfg.n() / 2;
    const auto law = cfg.law_for(profile.size(h_star));
    std::ostringstream csv;
    csv << "rep,j,x_j\n";
    std::vector<CoalescentTrace> traces(static_cast<std::size_t>(cfg.reps));
    replicate_map(cfg.reps, workers, [&](std::int64_t r) {
      Rng rng(StreamKey{cfg.seed, 91, static_cast<std::uint64_t>(r)});
      traces[static_cast<std::size_t>(r)] =
          simulate_trace(profile, law, h_star,
                         std::min(cfg.k, profile.size(h_star)), rng);
    });
    for (std::int64_t r = 0; r < cfg.reps; ++r)
      for (std::int64_t j = traces[static_cast<std::size_t>(r)].base_height; j >= 0; --j)
        csv << r << ',' << j << ',' << traces[static_cast<std::size_t>(r)].at(j) << '\n';
    writer.add("traces.csv", csv.str());
  } else if (command == "sample-limit") {
    const LimitSampler sampler(cfg.pair);
    std::vector<KPointTree> samples(static_cast<std::size_t>(cfg.reps));
    replicate_map(cfg.reps, workers, [&](std::int64_t r) {
      Rng rng(StreamKey{cfg.seed, 92, static_cast<std::uint64_t>(r)});
      samples[static_cast<std::size_t>(r)] = sampler.sample(cfg.k, rng);
    });
    std::ostringstream lines;
    for (const auto& s : samples) lines << k_point_tree_to_json(s).dump() << '\n';
    writer.add("samples.jsonl", lines.str());
  } else if (command == "compare-fdd") {
    const auto rep = compare_fdd(cfg.pair, cfg.law_for(cfg.n()), cfg.n(), cfg.k,
                                 cfg.reps, cfg.seed, cfg.thresholds, workers);
    writer.add("report.json", report_to_json(rep).dump(2) + "\n");
    writer.add("report.txt", report_to_text(rep));
    log << report_to_text(rep) << "runtime: " << rep.runtime_seconds << " s\n";
    pass = rep.pass;
  } else if (command == "transition-check") {
    const std::int64_t h_star = cfg.h_star > 0 ? cfg.h_star : 5;
    const auto rep =
        check_transition_law(cfg.law_for(cfg.n()), cfg.n(), h_star, cfg.k,
                             cfg.reps, cfg.seed, cfg.thresholds, workers);
    writer.add("report.json", report_to_json(rep).dump(2) + "\n");
    writer.add("report.txt", report_to_text(rep));
    log << report_to_text(rep) << "runtime: " << rep.runtime_seconds << " s\n";
    pass = rep.pass;
  } else if (command == "moments") {
    const auto law_for = [&](std::int64_t n) { return cfg.law_for(n); };
    const auto rep = check_moment_asymptotics(law_for, cfg.pair.ell(), cfg.n_grid,
                                              cfg.reps, cfg.seed, cfg.thresholds,
                                              workers);
    writer.add("moments.csv", moments_to_csv(rep));
    json j{{"pass", rep.pass}, {"seed", rep.seed}};
    writer.add("report.json", j.dump(2) + "\n");
    log << moments_to_csv(rep) << (rep.pass ? "PASS" : "FAIL") << "\n";
    pass = rep.pass;
  } else if (command == "cdfi") {
    const auto law_for = [&](std::int64_t n) { return cfg.law_for(n); };
    const auto curve = lineage_quantiles(law_for, cfg.pair.ell(),
                                         LineageProbe::Cdfi, cfg.n_grid,
                                         cfg.thresholds.cdfi_quantile, cfg.reps,
                                         cfg.seed, workers);
    writer.add("curve.csv", curve_to_csv(curve));
    writer.add("curve.json", curve_to_json(curve).dump(2) + "\n");
    for (const auto& p : curve.points)
      if (p.estimate.point > cfg.thresholds.cdfi_bound) pass = false;
    log << curve_to_csv(curve) << (pass ? "PASS" : "FAIL") << "\n";
  } else if (command == "counterexample") {
    if (!cfg.law_is_counterexample())
      throw ValidationError("law", "the counterexample command needs the counterexample law");
    const auto law_for = [&](std::int64_t n) { return cfg.law_for(n); };
    const auto curve =
        lineage_quantiles(law_for, cfg.pair.ell(), LineageProbe::X1, cfg.n_grid,
                          0.5, cfg.reps, cfg.seed, workers);
    writer.add("curve.csv", curve_to_csv(curve));
    writer.add("curve.json", curve_to_json(curve).dump(2) + "\n");
    for (std::size_t i = 1; i < curve.points.size(); ++i)
      if (curve.points[i].estimate.point <= curve.points[i - 1].estimate.point)
        pass = false;
    log << curve_to_csv(curve) << (pass ? "PASS" : "FAIL") << "\n";
  } else if (command == "appendix-a") {
    const auto rep = appendix_a_check(cfg.pair, cfg.law_for(cfg.n()), cfg.n(),
                                      cfg.k, cfg.reps, cfg.seed, cfg.thresholds,
                                      workers);
    writer.add("report.json", report_to_json(rep).dump(2) + "\n");
    writer.add("report.txt", report_to_text(rep));
    log << report_to_text(rep) << "runtime: " << rep.runtime_seconds << " s\n";
    pass = rep.pass;
  } else if (command == "discrepancy") {
    std::ostringstream csv;
    csv << "n,median_discrepancy\n" << std::setprecision(17);
    std::vector<double> medians;
    for (const std::int64_t n : cfg.n_grid) {
      const auto profile = discretize(cfg.pair.ell(), n);
      const auto law = cfg.law_for(profile.size(std::max<std::int64_t>(n / 2, 1)));
      std::vector<double> vals(static_cast<std::size_t>(cfg.reps));
      replicate_map(cfg.reps, workers, [&](std::int64_t r) {
        Rng rng(StreamKey{cfg.seed ^ static_cast<std::uint64_t>(n), 93,
                          static_cast<std::uint64_t>(r)});
        vals[static_cast<std::size_t>(r)] =
            contour_height_discrepancy(build_tree(profile, law, rng), n);
      });
      medians.push_back(empirical_quantile(vals, 0.5));
      csv << n << ',' << medians.back() << '\n';
    }
    for (std::size_t i = 1; i < medians.size(); ++i)
      if (medians[i] >= medians[i - 1]) pass = false;
    writer.add("discrepancy.csv", csv.str());
    log << csv.str() << (pass ? "PASS" : "FAIL") << "\n";
  } else {
    throw ValidationError("command", "unknown command \"" + command + "\"");
  }

  writer.finalize(cfg.seed, pass);
  if (check && !pass) return 3;
  return 0;
}

}  // namespace cannings
