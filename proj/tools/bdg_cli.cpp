// bdg: replays issue-tracker event logs to rebuild the bug dependency
// graph at any point in time, evaluates prioritization and triage
// strategies against what actually happened, and emits CSV reports.
//
// Artifacts live in one dataset directory (--out): ingest writes
// events.jsonl + bugs.jsonl there and every other subcommand reads them
// back, so runs are reproducible from flags + config + files alone.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bdg/config.hpp"
#include "bdg/core.hpp"
#include "bdg/csv.hpp"
#include "bdg/ingest.hpp"
#include "bdg/jsonl.hpp"
#include "bdg/prioritize.hpp"
#include "bdg/replay.hpp"
#include "bdg/stats.hpp"
#include "bdg/synthetic.hpp"
#include "bdg/time.hpp"
#include "bdg/triage.hpp"

namespace {

using namespace bdg;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flag values already merged over the config file; empty optionals fall
// back to per-command defaults.
struct Context {
  Config cfg;

  std::string out_dir() const { return cfg.get_or("out", "."); }

  std::string data_path(const std::string& key, const std::string& fallback) const {
    return out_dir() + "/" + cfg.get_or(key, fallback);
  }

  DayNumber parse_day(const std::string& key) const {
    const auto v = cfg.get(key);
    if (!v) throw UsageError("missing required date --" + key);
    const auto t = parse_rfc3339(*v);
    if (!t) throw UsageError("bad date for --" + key + ": " + *v);
    return day_of(*t);
  }

  // Evaluation window; when a bound is absent it stretches to the log.
  std::pair<DayNumber, DayNumber> window(const EventLog& log) const {
    if (log.events.empty()) throw DataError("event log is empty");
    DayNumber from = cfg.has("from") ? parse_day("from") : day_of(log.events.front().at);
    DayNumber to = cfg.has("to") ? parse_day("to") : day_of(log.events.back().at);
    if (to < from) throw UsageError("--to precedes --from");
    return {from, to};
  }

  EventLog load_dataset() const {
    return load_log(data_path("events", "events.jsonl"), data_path("bugs", "bugs.jsonl"));
  }

  TopicModel::Params lda_params() const {
    TopicModel::Params p;
    p.topics = static_cast<int>(cfg.get_int_or("topics", 20));
    p.iterations = static_cast<int>(cfg.get_int_or("topic_iterations", 500));
    p.seed = static_cast<std::uint64_t>(cfg.get_int_or("seed", 1));
    return p;
  }
};

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << bytes;
}

std::string join_names(const std::vector<std::string>& names) {
  std::string joined;
  for (const std::string& n : names) {
    if (!joined.empty()) joined += ", ";
    joined += n;
  }
  return joined;
}

int cmd_ingest(const Context& ctx) {
  const auto raw_dir = ctx.cfg.get("raw");
  if (!raw_dir) throw UsageError("ingest needs --raw DIR (or raw= in the config)");

  RawCorpus corpus;
  FetchStats fetch_stats;
  if (ctx.cfg.get_or("offline", "0") == "1") {
    corpus = load_raw_dir(*raw_dir);
  } else {
    FetchOptions opt;
    opt.host = ctx.cfg.get_or("host", "127.0.0.1");
    opt.port = static_cast<int>(ctx.cfg.get_int_or("port", 80));
    opt.threads = static_cast<int>(ctx.cfg.get_int_or("threads", 4));
    opt.max_retries = static_cast<int>(ctx.cfg.get_int_or("retries", 10));
    opt.backoff_base_ms = static_cast<int>(ctx.cfg.get_int_or("backoff_ms", 250));
    const std::vector<BugId> ids = fetch_bug_ids(opt, &fetch_stats);
    corpus = fetch_corpus(ids, opt, &fetch_stats);
    save_raw_dir(corpus, *raw_dir);
  }

  const DayNumber window_start = ctx.cfg.has("from") ? ctx.parse_day("from") : 0;
  const NormalizeResult res = normalize(corpus, window_start);
  std::filesystem::create_directories(ctx.out_dir());
  save_log(res.log, ctx.data_path("events", "events.jsonl"),
           ctx.data_path("bugs", "bugs.jsonl"));

  const NormalizeStats& s = res.stats;
  std::cout << "bugs=" << res.log.bugs.size() << " events=" << res.log.events.size()
            << " fetched=" << fetch_stats.fetched
            << " forbidden_skipped=" << fetch_stats.forbidden_skipped
            << " duplicates_merged=" << s.duplicates_merged
            << " missing_dupe_targets=" << s.missing_dupe_targets
            << " enhancements_dropped=" << s.enhancements_dropped
            << " old_arcs_dropped=" << s.old_arcs_dropped
            << " arc_conflicts=" << s.arc_conflicts << " arcs_deduped=" << s.arcs_deduped
            << " dangling_arcs=" << s.dangling_arcs << "\n";
  return 0;
}

int cmd_replay(const Context& ctx) {
  const EventLog log = ctx.load_dataset();
  const auto [from, to] = ctx.window(log);
  const std::int64_t granularity = ctx.cfg.get_int_or("granularity", 1);
  if (granularity < 1) throw UsageError("--granularity must be at least 1");

  const ReplayRun run = run_replay(log, from, to, granularity);
  std::ostringstream csv;
  write_snapshots_csv(run.snapshots, csv);
  const std::string path = ctx.out_dir() + "/snapshots.csv";
  write_file(path, csv.str());
  std::cout << "snapshots=" << run.snapshots.size()
            << " skipped_events=" << run.state.counters().total_skipped() << " out=" << path
            << "\n";
  return 0;
}

int cmd_stateat(const Context& ctx) {
  const auto time_str = ctx.cfg.get("time");
  if (!time_str) throw UsageError("stateat needs --time");
  const auto t = parse_rfc3339(*time_str);
  if (!t) throw UsageError("bad --time value: " + *time_str);
  // A bare date means the whole day has elapsed.
  const bool date_only = time_str->find_first_of("Tt ") == std::string::npos;
  const Timestamp cutoff = date_only ? day_end(day_of(*t)) : *t;

  const EventLog log = ctx.load_dataset();
  const ReplayState state = state_at(log, cutoff);
  write_state_csv(state, std::cout);
  return 0;
}

std::vector<StrategyKind> parse_strategies(const std::string& value) {
  std::vector<std::string> names;
  for (const StrategyKind s : all_strategies()) names.push_back(to_string(s));
  if (value == "all") return all_strategies();

  std::vector<StrategyKind> out;
  std::stringstream ss(value);
  std::string token;
  while (std::getline(ss, token, ',')) {
    const auto s = parse_strategy(token);
    if (!s) {
      throw UsageError("unknown strategy '" + token + "'; valid: " + join_names(names) +
                       ", all");
    }
    out.push_back(*s);
  }
  if (out.empty()) throw UsageError("--strategy lists no strategy; valid: " + join_names(names));
  return out;
}

int cmd_prioritize(const Context& ctx) {
  const EventLog log = ctx.load_dataset();
  const auto [from, to] = ctx.window(log);
  const std::vector<StrategyKind> strategies =
      parse_strategies(ctx.cfg.get_or("strategy", "all"));

  const std::set<BugId> feasible = feasibility_filter(log).feasible;

  bool needs_models = false;
  for (const StrategyKind s : strategies) {
    if (s == StrategyKind::CostOriented || s == StrategyKind::EstimatedPriority ||
        s == StrategyKind::CostAndPriority) {
      needs_models = true;
    }
  }
  PriorityModels models;
  if (needs_models) {
    models = build_priority_models(log, from, ctx.lda_params(),
                                   static_cast<std::uint64_t>(ctx.cfg.get_int_or("seed", 1)));
  }

  std::vector<PrioritizationResult> rows;
  for (const StrategyKind s : strategies) {
    PrioritizationParams params;
    params.from_day = from;
    params.to_day = to;
    params.strategy = s;
    params.alpha = ctx.cfg.get_double_or("alpha", 0.5);
    params.seed = static_cast<std::uint64_t>(ctx.cfg.get_int_or("seed", 1));
    params.repeats = static_cast<int>(ctx.cfg.get_int_or("repeats", 1));
    rows.push_back(
        evaluate_prioritization(log, feasible, needs_models ? &models : nullptr, params));
  }

  std::ostringstream csv;
  write_prioritization_csv(rows, csv);
  const std::string path = ctx.out_dir() + "/prioritization.csv";
  write_file(path, csv.str());
  std::cout << "strategies=" << rows.size() << " feasible=" << feasible.size()
            << " out=" << path << "\n";
  return 0;
}

std::vector<TriageAlgorithm> parse_algorithms(const std::string& value) {
  const std::vector<TriageAlgorithm> all = {TriageAlgorithm::Cbr, TriageAlgorithm::CosTriage,
                                            TriageAlgorithm::Random, TriageAlgorithm::Actual};
  std::vector<std::string> names;
  for (const TriageAlgorithm a : all) names.push_back(to_string(a));
  if (value == "all") return all;

  std::vector<TriageAlgorithm> out;
  std::stringstream ss(value);
  std::string token;
  while (std::getline(ss, token, ',')) {
    const auto a = parse_triage_algorithm(token);
    if (!a) {
      throw UsageError("unknown algorithm '" + token + "'; valid: " + join_names(names) +
                       ", all");
    }
    out.push_back(*a);
  }
  if (out.empty()) throw UsageError("--algorithm lists no algorithm; valid: " + join_names(names));
  return out;
}

int cmd_triage(const Context& ctx) {
  const EventLog log = ctx.load_dataset();
  const auto [from, to] = ctx.window(log);
  const std::vector<TriageAlgorithm> algorithms =
      parse_algorithms(ctx.cfg.get_or("algorithm", "all"));

  const FeasibilityResult feas = feasibility_filter(log);
  const TriageModels models =
      build_triage_models(log, from, ctx.lda_params(),
                          static_cast<std::uint64_t>(ctx.cfg.get_int_or("seed", 1)));

  std::vector<TriageRow> rows;
  for (const TriageAlgorithm a : algorithms) {
    TriageParams params;
    params.from_day = from;
    params.to_day = to;
    params.algorithm = a;
    params.alpha = ctx.cfg.get_double_or("alpha", 0.5);
    params.release_interval = ctx.cfg.get_int_or("release_days", 28);
    params.substitute_parent = ctx.cfg.get_or("substitute_parent", "0") == "1";
    params.seed = static_cast<std::uint64_t>(ctx.cfg.get_int_or("seed", 1));
    params.repeats = static_cast<int>(ctx.cfg.get_int_or("repeats", 1));
    rows.push_back(run_triage(log, feas.feasible, models, params));
  }

  std::ostringstream csv;
  write_triage_csv(rows, csv);
  const std::string path = ctx.out_dir() + "/triage.csv";
  write_file(path, csv.str());
  std::cout << "algorithms=" << rows.size() << " feasible=" << feas.feasible.size()
            << " developers=" << models.devs.size() << " out=" << path << "\n";
  return 0;
}

int cmd_synth(const Context& ctx) {
  const EventLog log = ctx.load_dataset();
  const double gamma = ctx.cfg.get_double_or("gamma", 3.0);
  if (gamma <= 0.0) throw UsageError("--gamma must be positive");
  const std::uint64_t seed = static_cast<std::uint64_t>(ctx.cfg.get_int_or("seed", 1));

  const DensifyResult res = densify(log, gamma, {-2, -1, 0, 1, 2}, seed);
  save_log(res.log, ctx.out_dir() + "/synthetic_events.jsonl",
           ctx.out_dir() + "/synthetic_bugs.jsonl");
  std::cout << "arcs_added=" << res.stats.arcs_added << " redraws=" << res.stats.redraws
            << " arcs_abandoned=" << res.stats.arcs_abandoned << " events="
            << res.log.events.size() << " out=" << ctx.out_dir() << "/synthetic_events.jsonl"
            << "\n";
  return 0;
}

int cmd_rq1(const Context& ctx) {
  const auto attr_str = ctx.cfg.get("attribute");
  if (!attr_str) {
    throw UsageError("rq1 needs --attribute (degree, depth, severity, priority)");
  }
  const auto attr = parse_rq_attribute(*attr_str);
  if (!attr) {
    throw UsageError("unknown attribute '" + *attr_str +
                     "'; valid: degree, depth, severity, priority");
  }

  const EventLog log = ctx.load_dataset();
  const auto [from, to] = ctx.window(log);
  const MonthlySeries series = fixed_vs_open_series(log, from, to, *attr);
  if (series.months.empty()) throw DataError("no complete month has both fixed and open bugs");

  std::ostringstream csv;
  write_rq1_csv(series, csv);
  const std::string path = ctx.out_dir() + "/rq1_" + to_string(*attr) + ".csv";
  write_file(path, csv.str());

  std::cout << "months=" << series.months.size();
  if (series.months.size() >= 2) {
    try {
      const PairedTTest t = paired_t_test(series.fixed_mean, series.open_mean);
      std::printf(" t=%.6f p=%.6f", t.t, t.p_upper);
    } catch (const DegenerateSeries&) {
      std::cout << " t=degenerate p=degenerate";
    }
  }
  std::cout << " out=" << path << "\n";
  return 0;
}

std::string quote_for_log(std::string s) {
  for (char& c : s) {
    if (c == '"') c = '\'';
    if (c == '\n') c = ' ';
  }
  return s;
}

int fail(const char* kind, const std::string& msg) {
  std::cerr << "error kind=" << kind << " msg=\"" << quote_for_log(msg) << "\"\n";
  if (std::string(kind) == "usage") return 1;
  if (std::string(kind) == "network") return 3;
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Issue-tracker wayback machine: replay, prioritize, triage"};
  app.fallthrough();
  app.require_subcommand(0, 1);

  // Global flags; every value can also come from the config file, with
  // flags taking precedence.
  std::string config_path, from, to, out, raw, host, time_str, strategy, algorithm, attribute;
  std::int64_t port = -1, seed = -1, repeats = -1, release_days = -1, granularity = -1,
               threads = -1, retries = -1, backoff_ms = -1;
  double alpha = std::numeric_limits<double>::quiet_NaN();
  double gamma = std::numeric_limits<double>::quiet_NaN();
  bool offline = false, substitute_parent = false;

  app.add_option("--config", config_path, "key=value configuration file");
  app.add_option("--from", from, "window start date (YYYY-MM-DD)");
  app.add_option("--to", to, "window end date (YYYY-MM-DD)");
  app.add_option("--out", out, "dataset and report directory (default .)");
  app.add_flag("--offline", offline, "never touch the network");

  CLI::App* ingest = app.add_subcommand("ingest", "fetch or load raw bugs and normalize them");
  ingest->add_option("--raw", raw, "raw corpus directory (bugs.jsonl, history.jsonl)");
  ingest->add_option("--host", host, "tracker REST host");
  ingest->add_option("--port", port, "tracker REST port");
  ingest->add_option("--threads", threads, "fetch worker count");
  ingest->add_option("--retries", retries, "attempts per request before giving up (default 10)");
  ingest->add_option("--backoff-ms", backoff_ms, "initial retry backoff in ms (default 250)");

  CLI::App* replay = app.add_subcommand("replay", "replay the log and write daily snapshots");
  replay->add_option("--granularity", granularity, "days per snapshot row (default 1)");

  CLI::App* stateat = app.add_subcommand("stateat", "dump the open-bug graph at a timestamp");
  stateat->add_option("--time", time_str, "RFC 3339 timestamp or date (date = end of day)");

  CLI::App* prioritize = app.add_subcommand("prioritize", "score prioritization strategies");
  prioritize->add_option("--strategy", strategy, "strategy name, comma list, or 'all'");
  prioritize->add_option("--alpha", alpha, "cost_priority blend weight (default 0.5)");
  prioritize->add_option("--seed", seed, "base random seed (default 1)");
  prioritize->add_option("--repeats", repeats, "averaging repeats for random (default 1)");

  CLI::App* triage = app.add_subcommand("triage", "simulate assignment algorithms");
  triage->add_option("--algorithm", algorithm, "algorithm name, comma list, or 'all'");
  triage->add_option("--alpha", alpha, "costriage blend weight (default 0.5)");
  triage->add_option("--release-days", release_days, "release interval in days (default 28)");
  triage->add_flag("--substitute-parent", substitute_parent,
                   "assign the root blocker instead of a blocked bug");
  triage->add_option("--seed", seed, "base random seed (default 1)");
  triage->add_option("--repeats", repeats, "averaging repeats for random (default 1)");

  CLI::App* synth = app.add_subcommand("synth", "densify the dependency graph synthetically");
  synth->add_option("--gamma", gamma, "arc expansion factor (default 3)");
  synth->add_option("--seed", seed, "random seed (default 1)");

  CLI::App* rq1 = app.add_subcommand("rq1", "monthly fixed-vs-open attribute series + t-test");
  rq1->add_option("--attribute", attribute, "degree, depth, severity, or priority");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return fail("usage", e.what());
  }

  try {
    Context ctx;
    if (!config_path.empty()) ctx.cfg = Config::from_file(config_path);
    const auto set_if = [&](const char* key, const std::string& v) {
      if (!v.empty()) ctx.cfg.set(key, v);
    };
    set_if("from", from);
    set_if("to", to);
    set_if("out", out);
    set_if("raw", raw);
    set_if("host", host);
    set_if("time", time_str);
    set_if("strategy", strategy);
    set_if("algorithm", algorithm);
    set_if("attribute", attribute);
    if (offline) ctx.cfg.set("offline", "1");
    if (substitute_parent) ctx.cfg.set("substitute_parent", "1");
    if (port >= 0) ctx.cfg.set("port", std::to_string(port));
    if (seed >= 0) ctx.cfg.set("seed", std::to_string(seed));
    if (repeats >= 0) ctx.cfg.set("repeats", std::to_string(repeats));
    if (release_days >= 0) ctx.cfg.set("release_days", std::to_string(release_days));
    if (granularity >= 0) ctx.cfg.set("granularity", std::to_string(granularity));
    if (threads >= 0) ctx.cfg.set("threads", std::to_string(threads));
    if (retries >= 0) ctx.cfg.set("retries", std::to_string(retries));
    if (backoff_ms >= 0) ctx.cfg.set("backoff_ms", std::to_string(backoff_ms));
    if (!std::isnan(alpha)) ctx.cfg.set("alpha", fmt_f6(alpha));
    if (!std::isnan(gamma)) ctx.cfg.set("gamma", fmt_f6(gamma));

    if (ingest->parsed()) return cmd_ingest(ctx);
    if (replay->parsed()) return cmd_replay(ctx);
    if (stateat->parsed()) return cmd_stateat(ctx);
    if (prioritize->parsed()) return cmd_prioritize(ctx);
    if (triage->parsed()) return cmd_triage(ctx);
    if (synth->parsed()) return cmd_synth(ctx);
    if (rq1->parsed()) return cmd_rq1(ctx);
    std::cout << app.help();
    return fail("usage", "no subcommand given");
  } catch (const UsageError& e) {
    return fail("usage", e.what());
  } catch (const NetworkError& e) {
    return fail("network", e.what());
  } catch (const AuthRequired& e) {
    return fail("network", e.what());
  } catch (const DegenerateSeries& e) {
    return fail("data", e.what());
  } catch (const DataError& e) {
    return fail("data", e.what());
  } catch (const std::exception& e) {
    return fail("data", e.what());
  }
}
