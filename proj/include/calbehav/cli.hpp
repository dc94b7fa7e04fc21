#pragma once

// The calbehav command line: mine, evaluate, compare, synth, expand.
// Kept in a header so tests can drive it in-process.

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "calbehav/evaluation.hpp"
#include "calbehav/pipeline.hpp"
#include "calbehav/report.hpp"
#include "calbehav/synth.hpp"

namespace calbehav {

namespace fs = std::filesystem;

enum ExitCode : int { kExitOk = 0, kExitInput = 1, kExitNoEvidence = 2, kExitInternal = 3 };

struct RunConfig {
  std::string calendar;
  std::string calls;
  std::string relationships;
  std::string keywords;
  double min_confidence = 0.80;
  std::uint64_t min_support = 3;
  PrecedenceMode precedence = PrecedenceMode::Global;
  std::size_t folds = 5;
  std::uint64_t seed = 42;
  std::string out = ".";

  void validate() const {
    if (!(min_confidence > 0.0 && min_confidence <= 1.0))
      throw InputError("--min-confidence must lie in (0, 1]");
    if (min_support < 1) throw InputError("--min-support must be >= 1");
    if (folds < 2) throw InputError("--folds must be >= 2");
  }

  [[nodiscard]] MiningConfig mining() const { return {min_confidence, min_support, precedence}; }
};

namespace cli_detail {

inline std::string read_file(const std::string& path, const char* what) {
  if (path.empty()) throw InputError(std::string("missing --") + what);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(std::string("cannot read ") + what + " file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << content;
}

inline fs::path ensure_dir(const std::string& dir) {
  fs::path p(dir.empty() ? "." : dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) throw InputError("cannot create output directory '" + p.string() + "': " + ec.message());
  return p;
}

inline std::string pretty(const json& j) { return j.dump(2) + "\n"; }

inline BundleText load_bundle(const RunConfig& cfg) {
  BundleText b;
  b.calendar_ics = read_file(cfg.calendar, "calendar");
  b.call_log_csv = read_file(cfg.calls, "calls");
  if (!cfg.relationships.empty()) b.relationships_csv = read_file(cfg.relationships, "relationships");
  return b;
}

inline BundleText load_bundle_dir(const fs::path& dir) {
  BundleText b;
  b.calendar_ics = read_file((dir / "calendar.ics").string(), "calendar");
  b.call_log_csv = read_file((dir / "calls.csv").string(), "calls");
  if (fs::exists(dir / "relationships.csv"))
    b.relationships_csv = read_file((dir / "relationships.csv").string(), "relationships");
  return b;
}

inline KeywordRuleTable load_keywords(const RunConfig& cfg) {
  if (cfg.keywords.empty()) return default_keyword_table();
  try {
    return keyword_table_from_json(json::parse(read_file(cfg.keywords, "keywords")));
  } catch (const json::parse_error& e) {
    throw InputError(std::string("keyword table: ") + e.what());
  }
}

/// Prints diagnostics; true if any of them is an error.
inline bool report_diagnostics(const Dataset& ds, std::ostream& err) {
  for (const auto& d : ds.diagnostics) err << to_string(d) << '\n';
  return ds.has_errors();
}

inline DateRange parse_span(const std::string& from, const std::string& to) {
  auto a = parse_date(from);
  auto b = parse_date(to);
  if (!a || !b) throw InputError("dates must be YYYY-MM-DD");
  if (*b < *a) throw InputError("--to precedes --from");
  return {*a, *b};
}

inline json config_json(const RunConfig& c) {
  return {{"min_confidence", c.min_confidence},
          {"min_support", c.min_support},
          {"precedence", c.precedence == PrecedenceMode::Global ? "global" : "per-node"},
          {"folds", c.folds},
          {"seed", c.seed}};
}

inline const std::vector<double>& sweep_thresholds() {
  static const std::vector<double> t{0.6, 0.7, 0.8, 0.9, 1.0};
  return t;
}

}  // namespace cli_detail

/// Ingest, map and mine one user. Writes rules, tree, summary and the
/// mapped instances.
inline int cmd_mine(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  const auto ds = build_dataset(load_bundle(cfg));
  if (report_diagnostics(ds, err)) {
    err << "error: input contains invalid records\n";
    return kExitInput;
  }
  if (ds.instances.empty()) {
    err << "no evidence: no incoming call falls inside a calendar event; no rules produced\n";
    return kExitNoEvidence;
  }
  const auto mined = mine_rules(ds.instances, cfg.mining());
  const auto dir = ensure_dir(cfg.out);

  std::string rules_txt;
  for (std::size_t i = 0; i < mined.rules.size(); ++i)
    rules_txt += "R" + std::to_string(i + 1) + ": " + to_string(mined.rules[i]) + '\n';

  json summary = config_json(cfg);
  summary["events"] = ds.events.size();
  summary["occurrences"] = ds.occurrences.size();
  summary["calls"] = ds.calls.size();
  summary["classified_calls"] = ds.classified.size();
  summary["instances"] = ds.instances.size();
  summary["rules"] = mined.rules.size();
  summary["warnings"] = ds.diagnostics.size();
  if (ds.window) summary["window"] = {{"first", format_date(ds.window->first)}, {"last", format_date(ds.window->last)}};
  std::string summary_txt;
  for (const char* k : {"events", "occurrences", "calls", "classified_calls", "instances", "rules"})
    summary_txt += std::string(k) + ": " + summary[k].dump() + '\n';

  write_file(dir / "rules.json", pretty(rules_to_json(mined.rules)));
  write_file(dir / "rules.txt", rules_txt);
  write_file(dir / "tree.txt", tree_to_text(mined.root));
  write_file(dir / "tree.json", pretty(to_json(mined)));
  write_file(dir / "summary.json", pretty(summary));
  write_file(dir / "summary.txt", summary_txt);
  write_file(dir / "instances.csv", export_instances_csv(ds.instances));
  out << summary_txt << rules_txt;
  return kExitOk;
}

/// k-fold cross-validated error of the mined rules, plus the threshold sweep.
inline int cmd_evaluate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  const auto ds = build_dataset(load_bundle(cfg));
  if (report_diagnostics(ds, err)) return kExitInput;
  if (ds.instances.empty()) {
    err << "no evidence: nothing to evaluate\n";
    return kExitNoEvidence;
  }
  if (ds.instances.size() < cfg.folds) {
    err << "error: " << ds.instances.size() << " instances cannot fill " << cfg.folds << " folds\n";
    return kExitInput;
  }
  const auto report = k_fold_cv(ds.instances, cfg.folds, cfg.mining(), cfg.seed);
  const auto sweep = tradeoff_sweep(ds.instances, sweep_thresholds(), cfg.mining());
  const auto dir = ensure_dir(cfg.out);

  json j = to_json(report);
  j["config"] = config_json(cfg);
  json tj = json::array();
  for (const auto& p : sweep) tj.push_back(to_json(p));
  write_file(dir / "metrics.json", pretty(j));
  write_file(dir / "metrics.csv", metrics_csv({report}));
  write_file(dir / "metrics.txt", metrics_table({report}));
  write_file(dir / "tradeoff.json", pretty(tj));
  write_file(dir / "tradeoff.dat", tradeoff_dat(sweep));
  out << metrics_table({report});
  return kExitOk;
}

struct UserComparison {
  std::string user;
  std::vector<MetricsReport> reports;
  std::string error;  // set when the user could not be evaluated
  int status = kExitOk;
};

inline UserComparison compare_user(std::string user, const BundleText& text, const CompareConfig& cc) {
  UserComparison uc{std::move(user), {}, {}, kExitOk};
  const auto ds = build_dataset(text);
  if (ds.has_errors()) {
    uc.status = kExitInput;
    for (const auto& d : ds.diagnostics) uc.error += to_string(d) + "\n";
    return uc;
  }
  if (ds.instances.empty()) {
    uc.status = kExitNoEvidence;
    uc.error = "no evidence\n";
    return uc;
  }
  if (ds.instances.size() < cc.folds) {
    uc.status = kExitInput;
    uc.error = "too few instances for " + std::to_string(cc.folds) + " folds\n";
    return uc;
  }
  uc.reports = compare_methods(ds.instances, cc);
  return uc;
}

struct CompareOptions {
  std::vector<std::string> bundles;
  std::size_t synthetic_users = 0;
};

/// The span used for generated users: one year of weekly schedule.
inline DateRange synthetic_span() {
  using namespace std::chrono;
  return {sys_days{2016y / January / 4}, sys_days{2017y / January / 1}};
}

/// CalBehav vs BM1 vs BM2 on shared folds, for one or many users. Users run
/// concurrently; results are written in input order.
inline int cmd_compare(const RunConfig& cfg, const CompareOptions& opt, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  CompareConfig cc{cfg.mining(), cfg.folds, cfg.seed, load_keywords(cfg)};

  std::vector<std::pair<std::string, std::function<BundleText()>>> jobs;
  if (opt.synthetic_users > 0) {
    for (std::size_t i = 0; i < opt.synthetic_users; ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "user%02zu", i + 1);
      const std::uint64_t seed = cfg.seed + i;
      jobs.emplace_back(name, [seed] { return generate_bundle(heterogeneous_profile(seed), synthetic_span()).text; });
    }
  } else if (!opt.bundles.empty()) {
    for (const auto& b : opt.bundles) {
      const fs::path p(b);
      jobs.emplace_back(p.filename().string(), [p] { return load_bundle_dir(p); });
    }
  } else {
    jobs.emplace_back("user", [bundle = load_bundle(cfg)] { return bundle; });
  }

  std::vector<std::future<UserComparison>> futures;
  for (const auto& [name, load] : jobs)
    futures.push_back(std::async(std::launch::async, [&cc, name = name, load = load] {
      try {
        return compare_user(name, load(), cc);
      } catch (const InputError& e) {
        return UserComparison{name, {}, std::string(e.what()) + "\n", kExitInput};
      }
    }));
  std::vector<UserComparison> results;
  for (auto& f : futures) results.push_back(f.get());  // ContractViolation propagates

  int status = kExitOk;
  json users = json::array();
  std::string csv = "user,method,fold,error_rate,uncovered,matched,incorrect,rule_count\n";
  std::string table;
  std::map<std::string, std::pair<double, std::size_t>> totals;
  std::size_t best = 0, evaluated = 0;
  for (const auto& uc : results) {
    if (uc.status != kExitOk) {
      err << uc.user << ": " << uc.error;
      status = std::max(status, uc.status);
      users.push_back({{"user", uc.user}, {"error", uc.error}});
      continue;
    }
    ++evaluated;
    json methods = json::array();
    for (const auto& r : uc.reports) {
      methods.push_back(to_json(r));
      if (r.error_rate) {
        totals[r.method].first += *r.error_rate;
        ++totals[r.method].second;
      }
    }
    users.push_back({{"user", uc.user}, {"methods", methods}});
    const auto body = metrics_csv(uc.reports, uc.user);
    csv += body.substr(body.find('\n') + 1);
    table += uc.user + "\n" + metrics_table(uc.reports);
    const auto& cb = uc.reports[0].error_rate;
    if (cb && (!uc.reports[1].error_rate || *cb < *uc.reports[1].error_rate) &&
        (!uc.reports[2].error_rate || *cb < *uc.reports[2].error_rate))
      ++best;
  }

  json aggregate = json::object();
  std::string agg_txt = "aggregate over " + std::to_string(evaluated) + " user(s)\n";
  for (const char* m : {"CalBehav", "BM1", "BM2"}) {
    const auto it = totals.find(m);
    if (it == totals.end() || it->second.second == 0) {
      aggregate[m] = nullptr;
      continue;
    }
    const double mean = it->second.first / static_cast<double>(it->second.second);
    aggregate[m] = mean;
    agg_txt += std::string(m) + " mean error% " + report_detail::fixed(mean, 2) + "\n";
  }
  agg_txt += "CalBehav strictly lowest for " + std::to_string(best) + "/" + std::to_string(evaluated) + " user(s)\n";

  json j{{"config", config_json(cfg)},
         {"users", users},
         {"aggregate", {{"mean_error_rate", aggregate}, {"calbehav_best_users", best}, {"users_evaluated", evaluated}}}};
  const auto dir = ensure_dir(cfg.out);
  write_file(dir / "compare.json", pretty(j));
  write_file(dir / "compare.csv", csv);
  write_file(dir / "compare.txt", table + agg_txt);
  out << table << agg_txt;
  return status;
}

struct SynthOptions {
  std::string profile;
  std::optional<std::uint64_t> heterogeneous;
  bool reference = false;
  std::string from = "2016-01-04";
  std::string to = "2017-01-01";
};

/// Writes calendar.ics, calls.csv, relationships.csv and truth.json.
inline int cmd_synth(const RunConfig& cfg, const SynthOptions& opt, std::ostream& out) {
  using namespace cli_detail;
  Bundle b;
  std::string profile_json;
  if (opt.reference) {
    b = reference_fixture();
  } else {
    UserProfile p;
    if (!opt.profile.empty()) {
      try {
        p = profile_from_json(json::parse(read_file(opt.profile, "profile")));
      } catch (const json::parse_error& e) {
        throw InputError(std::string("profile: ") + e.what());
      }
    } else {
      p = heterogeneous_profile(opt.heterogeneous.value_or(cfg.seed));
    }
    profile_json = pretty(profile_to_json(p));
    b = generate_bundle(p, parse_span(opt.from, opt.to));
  }
  const auto dir = ensure_dir(cfg.out);
  write_file(dir / "calendar.ics", b.text.calendar_ics);
  write_file(dir / "calls.csv", b.text.call_log_csv);
  write_file(dir / "relationships.csv", b.text.relationships_csv);
  write_file(dir / "truth.json", b.truth_json);
  if (!profile_json.empty()) write_file(dir / "profile.json", profile_json);
  out << "wrote bundle to " << dir.string() << '\n';
  return kExitOk;
}

struct ExpandOptions {
  std::string from;
  std::string to;
};

/// Lists the occurrences of every event inside [from, to].
inline int cmd_expand(const RunConfig& cfg, const ExpandOptions& opt, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  auto cal = parse_icalendar(read_file(cfg.calendar, "calendar"));
  bool bad = false;
  for (const auto& d : cal.diagnostics) {
    err << "calendar: " << to_string(d) << '\n';
    bad = bad || d.severity == Severity::Error;
  }
  if (bad) return kExitInput;
  const auto occ = expand_all(cal.items, parse_span(opt.from, opt.to));
  json j = json::array();
  for (const auto& o : occ) j.push_back(to_json(o));
  const auto dir = ensure_dir(cfg.out);
  write_file(dir / "occurrences.json", pretty(j));
  write_file(dir / "occurrences.txt", occurrences_text(occ));
  out << occurrences_text(occ);
  return kExitOk;
}

/// Parses argv and dispatches. Never throws; errors map to exit codes.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"calbehav: behavioral association rules from calendar and call-log data"};
  app.set_config("--config", "", "TOML config file; keys use the long flag names")->envname("CALBEHAV_CONFIG");
  RunConfig cfg;
  std::string precedence = "global";
  app.add_option("--calendar", cfg.calendar, "iCalendar file");
  app.add_option("--calls", cfg.calls, "call-log CSV");
  app.add_option("--relationships", cfg.relationships, "contact,relationship CSV");
  app.add_option("--keywords", cfg.keywords, "BM2 keyword table (JSON)");
  app.add_option("--min-confidence", cfg.min_confidence, "confidence threshold in (0,1]")->capture_default_str();
  app.add_option("--min-support", cfg.min_support, "minimum instance count")->capture_default_str();
  app.add_option("--precedence", precedence, "attribute precedence")
      ->check(CLI::IsMember({"global", "per-node"}))
      ->capture_default_str();
  app.add_option("--folds", cfg.folds, "cross-validation folds")->capture_default_str();
  app.add_option("--seed", cfg.seed, "random seed")->capture_default_str();
  app.add_option("--out", cfg.out, "output directory")->capture_default_str();
  app.fallthrough();
  app.require_subcommand(1);

  auto* mine = app.add_subcommand("mine", "mine rules for one user");
  auto* evaluate = app.add_subcommand("evaluate", "cross-validated error and threshold sweep");
  auto* compare = app.add_subcommand("compare", "CalBehav vs BM1 vs BM2");
  CompareOptions copt;
  compare->add_option("--bundle", copt.bundles, "bundle directory (repeatable)");
  compare->add_option("--synthetic-users", copt.synthetic_users, "generate N heterogeneous users");
  auto* synth = app.add_subcommand("synth", "generate a synthetic bundle");
  SynthOptions sopt;
  auto* profile_opt = synth->add_option("--profile", sopt.profile, "profile JSON");
  auto* het_opt = synth->add_option("--heterogeneous", sopt.heterogeneous, "random profile from this seed");
  auto* reference_opt = synth->add_flag("--reference", sopt.reference, "the reference tree fixture");
  profile_opt->excludes(het_opt)->excludes(reference_opt);
  het_opt->excludes(reference_opt);
  synth->add_option("--from", sopt.from, "span start")->capture_default_str();
  synth->add_option("--to", sopt.to, "span end")->capture_default_str();
  auto* expand = app.add_subcommand("expand", "list event occurrences in a window");
  ExpandOptions eopt;
  expand->add_option("--from", eopt.from, "window start")->required();
  expand->add_option("--to", eopt.to, "window end")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    cfg.precedence = precedence == "per-node" ? PrecedenceMode::PerNode : PrecedenceMode::Global;
    cfg.validate();
    if (mine->parsed()) return cmd_mine(cfg, out, err);
    if (evaluate->parsed()) return cmd_evaluate(cfg, out, err);
    if (compare->parsed()) return cmd_compare(cfg, copt, out, err);
    if (synth->parsed()) return cmd_synth(cfg, sopt, out);
    if (expand->parsed()) return cmd_expand(cfg, eopt, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ContractViolation& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInput;
}

}  // namespace calbehav
