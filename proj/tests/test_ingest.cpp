#include <catch2/catch_amalgamated.hpp>

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "bdg/ingest.hpp"
#include "bdg/jsonl.hpp"
#include "bdg/replay.hpp"
#include "helpers.hpp"

using namespace bdg;
using bdg::testing::LogBuilder;

namespace {

Timestamp ts_day(DayNumber d, int hour = 1) { return day_start(d) + hour * 3600; }

RawBug make_raw(BugId id, DayNumber created, const std::string& summary = "a bug") {
  RawBug b;
  b.id = id;
  b.summary = summary;
  b.description = "some description";
  b.component = "comp";
  b.product = "prod";
  b.creation_time = ts_day(created);
  return b;
}

RawHistoryEntry change(Timestamp at, const std::string& field, const std::string& added,
                       const std::string& removed = "") {
  return {at, "someone", {{field, added, removed}}};
}

std::string log_bytes(const EventLog& log) {
  std::ostringstream events, bugs;
  write_events_jsonl(log, events);
  write_bugs_jsonl(log, bugs);
  return events.str() + "\x1e" + bugs.str();
}

const Event* find_event(const EventLog& log, EventKind kind, BugId bug,
                        std::optional<BugId> target = std::nullopt) {
  for (const Event& e : log.events) {
    if (e.kind == kind && e.bug == bug && (!target || e.target == target)) return &e;
  }
  return nullptr;
}

std::string temp_dir(const char* tag) {
  auto dir = std::filesystem::temp_directory_path() / (std::string("bdg_ingest_") + tag);
  std::filesystem::remove_all(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("raw payloads survive a json round trip") {
  RawBug b = make_raw(42, 100, "crash on resize");
  b.severity = "critical";
  b.priority = "P2";
  b.status = "RESOLVED";
  b.resolution = "FIXED";
  b.assigned_to = "dev@example.org";
  b.dupe_of = 7;
  b.comment_count = 3;
  b.depends_on = {1, 2};
  b.blocks = {9};
  b.cf_last_resolved = ts_day(130);
  b.comments = {ts_day(101), ts_day(102)};

  const std::string once = raw_bug_to_json(b).dump();
  const std::string twice = raw_bug_to_json(raw_bug_from_json(OrderedJson::parse(once))).dump();
  CHECK(once == twice);

  RawBug minimal = make_raw(7, 90);
  const std::string m1 = raw_bug_to_json(minimal).dump();
  const RawBug parsed = raw_bug_from_json(OrderedJson::parse(m1));
  CHECK_FALSE(parsed.dupe_of.has_value());
  CHECK_FALSE(parsed.cf_last_resolved.has_value());
  CHECK(raw_bug_to_json(parsed).dump() == m1);

  RawHistory h;
  h.id = 42;
  h.entries.push_back(change(ts_day(101), "assigned_to", "dev@example.org"));
  h.entries.push_back(change(ts_day(105), "blocks", "9, 11"));
  h.entries.push_back(change(ts_day(130), "status", "RESOLVED", "NEW"));
  const std::string h1 = raw_history_to_json(h).dump();
  const std::string h2 =
      raw_history_to_json(raw_history_from_json(OrderedJson::parse(h1))).dump();
  CHECK(h1 == h2);
}

TEST_CASE("raw corpus directory io round trips") {
  RawCorpus corpus;
  corpus.bugs.push_back(make_raw(1, 100));
  corpus.bugs.push_back(make_raw(2, 101, "second bug"));
  RawHistory h;
  h.id = 1;
  h.entries.push_back(change(ts_day(102), "blocks", "2"));
  corpus.histories.push_back(h);

  const std::string dir = temp_dir("dirio");
  save_raw_dir(corpus, dir);
  const RawCorpus loaded = load_raw_dir(dir);
  REQUIRE(loaded.bugs.size() == 2);
  REQUIRE(loaded.histories.size() == 1);

  const std::string dir2 = temp_dir("dirio2");
  save_raw_dir(loaded, dir2);
  for (const char* name : {"/bugs.jsonl", "/history.jsonl"}) {
    std::ifstream a(dir + name), b(dir2 + name);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());
  }
  CHECK_THROWS_AS(load_raw_dir(temp_dir("missing")), DataError);
}

TEST_CASE("duplicates merge into the original and pass their arcs along") {
  RawCorpus raw;
  RawBug orig = make_raw(1, 100, "short");
  orig.priority = "--";
  orig.comment_count = 2;
  raw.bugs.push_back(orig);

  RawBug dup = make_raw(2, 101, "a much longer duplicate summary");
  dup.priority = "P2";
  dup.dupe_of = 1;
  dup.comment_count = 3;
  raw.bugs.push_back(dup);

  raw.bugs.push_back(make_raw(3, 102));

  RawHistory h;
  h.id = 2;  // the duplicate blocks bug 3; the original inherits the arc
  h.entries.push_back(change(ts_day(103), "blocks", "3"));
  raw.histories.push_back(h);

  const NormalizeResult res = normalize(raw, 0);
  CHECK(res.stats.duplicates_merged == 1);
  REQUIRE(res.log.bugs.size() == 2);
  REQUIRE(res.log.bugs.count(1) == 1);
  CHECK(res.log.bugs.count(2) == 0);

  const BugRecord& rec = res.log.bugs.at(1);
  CHECK(rec.summary == "a much longer duplicate summary");
  CHECK(rec.priority == Priority::P2);
  CHECK(rec.comment_count == 5);

  const Event* arc = find_event(res.log, EventKind::Blocks, 1, 3);
  REQUIRE(arc != nullptr);
  CHECK(arc->at == ts_day(103));
  CHECK(find_event(res.log, EventKind::Introduced, 2) == nullptr);
}

TEST_CASE("duplicate chains, cycles, and absent targets") {
  RawCorpus raw;
  raw.bugs.push_back(make_raw(1, 100));
  RawBug b2 = make_raw(2, 101);
  b2.dupe_of = 1;
  raw.bugs.push_back(b2);
  RawBug b3 = make_raw(3, 102);
  b3.dupe_of = 2;  // chain resolves through 2 to 1
  raw.bugs.push_back(b3);
  RawBug b4 = make_raw(4, 103);
  b4.dupe_of = 99;  // no such bug: keep the record
  raw.bugs.push_back(b4);
  RawBug b5 = make_raw(5, 104);
  b5.dupe_of = 6;
  raw.bugs.push_back(b5);
  RawBug b6 = make_raw(6, 105);
  b6.dupe_of = 5;  // mutual loop: contradiction, keep both
  raw.bugs.push_back(b6);

  const NormalizeResult res = normalize(raw, 0);
  CHECK(res.stats.duplicates_merged == 2);
  CHECK(res.stats.missing_dupe_targets == 3);
  CHECK(res.log.bugs.count(1) == 1);
  CHECK(res.log.bugs.count(2) == 0);
  CHECK(res.log.bugs.count(3) == 0);
  CHECK(res.log.bugs.count(4) == 1);
  CHECK(res.log.bugs.count(5) == 1);
  CHECK(res.log.bugs.count(6) == 1);
}

TEST_CASE("enhancements are dropped along with their arcs") {
  RawCorpus raw;
  RawBug enh = make_raw(1, 100);
  enh.severity = "enhancement";
  raw.bugs.push_back(enh);
  raw.bugs.push_back(make_raw(2, 101));
  RawHistory h;
  h.id = 2;
  h.entries.push_back(change(ts_day(102), "blocks", "1"));
  raw.histories.push_back(h);

  const NormalizeResult res = normalize(raw, 0);
  CHECK(res.stats.enhancements_dropped == 1);
  CHECK(res.stats.dangling_arcs == 1);
  CHECK(res.log.bugs.count(1) == 0);
  CHECK(res.log.bugs.count(2) == 1);
  CHECK(find_event(res.log, EventKind::Blocks, 2) == nullptr);
}

TEST_CASE("arcs between two pre-window bugs are excluded") {
  RawCorpus raw;
  raw.bugs.push_back(make_raw(1, 10));
  raw.bugs.push_back(make_raw(2, 20));
  raw.bugs.push_back(make_raw(3, 60));
  RawHistory h;
  h.id = 1;
  h.entries.push_back(change(ts_day(25), "blocks", "2"));
  h.entries.push_back(change(ts_day(61), "blocks", "3"));
  raw.histories.push_back(h);

  const NormalizeResult res = normalize(raw, 50);
  CHECK(res.stats.old_arcs_dropped == 1);
  CHECK(find_event(res.log, EventKind::Blocks, 1, 2) == nullptr);
  CHECK(find_event(res.log, EventKind::Blocks, 1, 3) != nullptr);
}

TEST_CASE("arc mention bookkeeping") {
  SECTION("added then removed later nets to no arc") {
    RawCorpus raw;
    raw.bugs.push_back(make_raw(1, 100));
    raw.bugs.push_back(make_raw(2, 100));
    RawHistory h;
    h.id = 1;
    h.entries.push_back(change(ts_day(101), "blocks", "2"));
    h.entries.push_back(change(ts_day(105), "blocks", "", "2"));
    raw.histories.push_back(h);
    const NormalizeResult res = normalize(raw, 0);
    CHECK(res.stats.arc_conflicts == 1);
    CHECK(find_event(res.log, EventKind::Blocks, 1, 2) == nullptr);
  }
  SECTION("re-adding keeps the earliest mention time") {
    RawCorpus raw;
    raw.bugs.push_back(make_raw(1, 100));
    raw.bugs.push_back(make_raw(2, 100));
    RawHistory h;
    h.id = 1;
    h.entries.push_back(change(ts_day(101), "blocks", "2"));
    h.entries.push_back(change(ts_day(104), "blocks", "2"));
    raw.histories.push_back(h);
    const NormalizeResult res = normalize(raw, 0);
    CHECK(res.stats.arcs_deduped == 1);
    const Event* arc = find_event(res.log, EventKind::Blocks, 1, 2);
    REQUIRE(arc != nullptr);
    CHECK(arc->at == ts_day(101));
  }
  SECTION("mentions before either endpoint exists are clamped to creation") {
    RawCorpus raw;
    raw.bugs.push_back(make_raw(1, 100));
    raw.bugs.push_back(make_raw(2, 110));
    RawHistory h;
    h.id = 1;
    h.entries.push_back(change(ts_day(100, 2), "blocks", "2"));
    raw.histories.push_back(h);
    const NormalizeResult res = normalize(raw, 0);
    const Event* arc = find_event(res.log, EventKind::Blocks, 1, 2);
    REQUIRE(arc != nullptr);
    CHECK(arc->at == ts_day(110));
  }
  SECTION("depends_on keeps its reading while arcs flow blocker to blocked") {
    RawCorpus raw;
    raw.bugs.push_back(make_raw(1, 100));
    raw.bugs.push_back(make_raw(2, 100));
    RawHistory h;
    h.id = 1;
    h.entries.push_back(change(ts_day(101), "depends_on", "2"));
    raw.histories.push_back(h);
    const NormalizeResult res = normalize(raw, 0);
    const Event* ev = find_event(res.log, EventKind::DependsOn, 1, 2);
    REQUIRE(ev != nullptr);

    ReplayState state(res.log);
    for (const Event& e : res.log.events) state.apply(e);
    CHECK(state.graph().has_arc(2, 1));
  }
  SECTION("unknown endpoints are counted, not invented") {
    RawCorpus raw;
    raw.bugs.push_back(make_raw(1, 100));
    RawHistory h;
    h.id = 1;
    h.entries.push_back(change(ts_day(101), "blocks", "77"));
    raw.histories.push_back(h);
    const NormalizeResult res = normalize(raw, 0);
    CHECK(res.stats.dangling_arcs == 1);
    CHECK(find_event(res.log, EventKind::Blocks, 1) == nullptr);
  }
}

TEST_CASE("snapshot dependency lists fill in for silent histories") {
  RawCorpus raw;
  RawBug b1 = make_raw(1, 100);
  b1.blocks = {2, 3};
  raw.bugs.push_back(b1);
  raw.bugs.push_back(make_raw(2, 100));
  raw.bugs.push_back(make_raw(3, 100));

  RawHistory h;  // history already covers 1 -> 2, so only 1 -> 3 comes from the list
  h.id = 1;
  h.entries.push_back(change(ts_day(120), "blocks", "2"));
  raw.histories.push_back(h);

  const NormalizeResult res = normalize(raw, 0);
  const Event* covered = find_event(res.log, EventKind::Blocks, 1, 2);
  REQUIRE(covered != nullptr);
  CHECK(covered->at == ts_day(120));
  const Event* filled = find_event(res.log, EventKind::Blocks, 1, 3);
  REQUIRE(filled != nullptr);
  CHECK(filled->at == ts_day(100));
  CHECK(res.stats.arcs_deduped == 0);
}

TEST_CASE("history drives lifecycle events and the master record") {
  RawCorpus raw;
  RawBug b = make_raw(1, 100);
  b.status = "RESOLVED";
  b.resolution = "FIXED";
  b.assigned_to = "later@example.org";
  b.cf_last_resolved = ts_day(140);
  b.severity = "major";
  b.priority = "P1";
  raw.bugs.push_back(b);

  RawHistory h;
  h.id = 1;
  h.entries.push_back(change(ts_day(105), "assigned_to", "first@example.org"));
  h.entries.push_back(change(ts_day(110), "status", "RESOLVED", "NEW"));
  h.entries.push_back(change(ts_day(115), "status", "REOPENED", "RESOLVED"));
  h.entries.push_back(change(ts_day(120), "assigned_to", "later@example.org"));
  h.entries.push_back(change(ts_day(140), "status", "RESOLVED", "REOPENED"));
  raw.histories.push_back(h);

  const NormalizeResult res = normalize(raw, 0);
  CHECK(find_event(res.log, EventKind::Assigned, 1) != nullptr);
  CHECK(find_event(res.log, EventKind::Reopened, 1) != nullptr);

  int n_resolved = 0;
  for (const Event& e : res.log.events) {
    if (e.kind == EventKind::Resolved) ++n_resolved;
  }
  CHECK(n_resolved == 2);

  const BugRecord& rec = res.log.bugs.at(1);
  CHECK(rec.severity == Severity::Major);
  CHECK(rec.priority == Priority::P1);
  CHECK(rec.status == BugStatus::Resolved);
  REQUIRE(rec.assignee.has_value());
  CHECK(*rec.assignee == "later@example.org");
  CHECK(*rec.assigned_at == ts_day(120));
  CHECK(*rec.resolved_at == ts_day(140));
}

TEST_CASE("snapshot fallbacks cover bugs with no usable history") {
  RawCorpus raw;
  RawBug b = make_raw(1, 100);
  b.status = "RESOLVED";
  b.assigned_to = "solo@example.org";
  b.cf_last_resolved = ts_day(108);
  raw.bugs.push_back(b);

  RawBug closed = make_raw(2, 100);
  closed.status = "CLOSED";
  closed.cf_last_resolved = ts_day(112);
  raw.bugs.push_back(closed);

  const NormalizeResult res = normalize(raw, 0);
  const Event* assign = find_event(res.log, EventKind::Assigned, 1);
  REQUIRE(assign != nullptr);
  CHECK(assign->at == ts_day(100));
  const Event* resolve = find_event(res.log, EventKind::Resolved, 1);
  REQUIRE(resolve != nullptr);
  CHECK(resolve->at == ts_day(108));
  const Event* close = find_event(res.log, EventKind::Closed, 2);
  REQUIRE(close != nullptr);
  CHECK(close->at == ts_day(112));
  CHECK(res.log.bugs.at(2).status == BugStatus::Closed);
}

TEST_CASE("event order is reproducible with introductions first") {
  RawCorpus raw;
  RawBug b1 = make_raw(1, 100);
  b1.blocks = {2};
  raw.bugs.push_back(b1);
  raw.bugs.push_back(make_raw(2, 100));
  RawBug b3 = make_raw(3, 100);
  b3.comments = {ts_day(100)};
  raw.bugs.push_back(b3);

  const NormalizeResult res = normalize(raw, 0);
  REQUIRE(res.log.events.size() == 5);
  for (std::size_t i = 0; i < res.log.events.size(); ++i) {
    CHECK(res.log.events[i].seq == static_cast<std::int64_t>(i));
  }
  CHECK(res.log.events[0].kind == EventKind::Introduced);
  CHECK(res.log.events[1].kind == EventKind::Introduced);
  CHECK(res.log.events[2].kind == EventKind::Introduced);
  CHECK(res.log.events[3].kind == EventKind::Blocks);
  CHECK(res.log.events[4].kind == EventKind::Commented);

  const NormalizeResult again = normalize(raw, 0);
  CHECK(log_bytes(res.log) == log_bytes(again.log));
}

TEST_CASE("normalizing a rebuilt corpus is a fixed point") {
  RawCorpus raw;
  for (BugId id = 1; id <= 6; ++id) {
    RawBug b = make_raw(id, 95 + static_cast<DayNumber>(id), "bug number " + std::to_string(id));
    b.severity = id % 2 == 0 ? "critical" : "normal";
    b.priority = id % 3 == 0 ? "--" : "P3";
    raw.bugs.push_back(b);
  }
  raw.bugs[3].dupe_of = 1;          // bug 4 folds into bug 1
  raw.bugs[4].severity = "enhancement";
  raw.bugs[1].status = "RESOLVED";
  raw.bugs[1].cf_last_resolved = ts_day(130);
  raw.bugs[1].assigned_to = "dev@example.org";
  raw.bugs[2].comments = {ts_day(104), ts_day(106)};

  RawHistory h1;
  h1.id = 1;
  h1.entries.push_back(change(ts_day(103), "blocks", "2, 3"));
  h1.entries.push_back(change(ts_day(107), "blocks", "", "3"));
  raw.histories.push_back(h1);
  RawHistory h2;
  h2.id = 2;
  h2.entries.push_back(change(ts_day(104), "assigned_to", "dev@example.org"));
  h2.entries.push_back(change(ts_day(109), "status", "RESOLVED", "NEW"));
  h2.entries.push_back(change(ts_day(111), "status", "REOPENED", "RESOLVED"));
  raw.histories.push_back(h2);
  RawHistory h6;
  h6.id = 6;
  h6.entries.push_back(change(ts_day(102, 2), "depends_on", "2"));
  raw.histories.push_back(h6);

  const NormalizeResult first = normalize(raw, 90);
  const RawCorpus rebuilt = raw_corpus_from_log(first.log);
  const NormalizeResult second = normalize(rebuilt, 90);

  CHECK(log_bytes(first.log) == log_bytes(second.log));
  CHECK(second.stats.duplicates_merged == 0);
  CHECK(second.stats.enhancements_dropped == 0);
  CHECK(second.stats.arc_conflicts == 0);
  CHECK(second.stats.arcs_deduped == 0);
  CHECK(second.stats.dangling_arcs == 0);

  const RawCorpus rebuilt2 = raw_corpus_from_log(second.log);
  const NormalizeResult third = normalize(rebuilt2, 90);
  CHECK(log_bytes(second.log) == log_bytes(third.log));
}

TEST_CASE("quantiles interpolate between order statistics") {
  const std::vector<double> xs = {1, 2, 3, 4, 100};
  CHECK(quantile(xs, 0.25) == 2.0);
  CHECK(quantile(xs, 0.5) == 3.0);
  CHECK(quantile(xs, 0.75) == 4.0);
  CHECK(iqr(xs) == 2.0);
  CHECK(quantile(xs, 0.0) == 1.0);
  CHECK(quantile(xs, 1.0) == 100.0);
  CHECK(quantile({5.0}, 0.37) == 5.0);
  CHECK(quantile({3.0, 1.0}, 0.5) == 2.0);
  CHECK_THROWS_AS(quantile({}, 0.5), DataError);

  // Independent formulation: explicit floor index plus linear weight.
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> val(-50.0, 50.0);
  std::uniform_real_distribution<double> pd(0.01, 0.99);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(gen() % 40);
    std::vector<double> v(n);
    for (double& x : v) x = val(gen);
    const double p = pd(gen);
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    const double hpos = p * (n - 1);
    const int i0 = static_cast<int>(std::floor(hpos));
    const int i1 = std::min(i0 + 1, n - 1);
    const double w = hpos - i0;
    const double expected = sorted[i0] * (1.0 - w) + sorted[i1] * w;
    CHECK_THAT(quantile(v, p), Catch::Matchers::WithinAbs(expected, 1e-12));
  }
}

TEST_CASE("feasibility keeps outlier-free fixes by active developers") {
  SECTION("single developer, textbook outlier fence") {
    LogBuilder b;
    const double fixings[] = {1, 2, 3, 4, 100};
    for (int i = 0; i < 5; ++i) {
      const BugId id = i + 1;
      b.bug(id, 10);
      b.assigned(id, 20, "ada");
      b.resolved(id, 20 + static_cast<DayNumber>(fixings[i]) - 1);
    }
    const FeasibilityResult res = feasibility_filter(b.done());
    CHECK(res.fixing_threshold == 7.0);
    CHECK(res.active_devs == std::set<std::string>{"ada"});
    CHECK(res.feasible == std::set<BugId>{1, 2, 3, 4});
  }
  SECTION("inactive developers and incomplete records are excluded") {
    LogBuilder b;
    const double fixings[] = {1, 2, 3, 4, 100};
    for (int i = 0; i < 5; ++i) {
      const BugId id = i + 1;
      b.bug(id, 10);
      b.assigned(id, 20, "ada");
      b.resolved(id, 20 + static_cast<DayNumber>(fixings[i]) - 1);
    }
    b.bug(6, 10).assigned(6, 20, "bob").resolved(6, 21);  // lone fix: bob stays inactive
    b.bug(7, 10).resolved(7, 22);                         // resolved but never assigned
    b.bug(8, 10).assigned(8, 20, "ada");                  // still open

    const FeasibilityResult res = feasibility_filter(b.done());
    // fixing times {1,2,2,3,4,100}: Q3 = 3.75, IQR = 1.75
    CHECK(res.fixing_threshold == 6.375);
    // per-developer counts {ada: 5, bob: 1}: IQR = 2, so only ada clears it
    CHECK(res.dev_count_iqr == 2.0);
    CHECK(res.active_devs == std::set<std::string>{"ada"});
    CHECK(res.feasible == std::set<BugId>{1, 2, 3, 4});
  }
  SECTION("empty log yields an empty result") {
    EventLog log;
    const FeasibilityResult res = feasibility_filter(log);
    CHECK(res.feasible.empty());
    CHECK(res.active_devs.empty());
  }
}

TEST_CASE("developer profiles accumulate pre-cutoff fixes") {
  LogBuilder b;
  b.bug(1, 1, Severity::Normal, Priority::P3, "one", "", "gfx");
  b.assigned(1, 2, "ada").resolved(1, 4);   // 3 days
  b.bug(2, 1, Severity::Normal, Priority::P3, "two", "", "net");
  b.assigned(2, 3, "ada").resolved(2, 7);   // 5 days
  b.bug(3, 1, Severity::Normal, Priority::P3, "three", "", "gfx");
  b.assigned(3, 2, "bob").resolved(3, 2);   // 1 day
  b.bug(4, 1, Severity::Normal, Priority::P3, "late", "", "gfx");
  b.assigned(4, 30, "ada").resolved(4, 33);  // after the cutoff

  const auto profiles = build_developer_profiles(b.done(), 20);
  REQUIRE(profiles.size() == 2);
  CHECK(profiles.at("ada").fixes_count == 2);
  CHECK(profiles.at("ada").mean_fixing_days == 4.0);
  CHECK(profiles.at("ada").components_fixed ==
        std::set<std::string>{"gfx", "net"});
  CHECK(profiles.at("bob").fixes_count == 1);
  CHECK(profiles.at("bob").mean_fixing_days == 1.0);
}

TEST_CASE("fetching retries, skips, and fails where it should") {
  httplib::Server server;
  std::atomic<int> bug1_hits{0};

  server.Get("/rest/bug_ids", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"ids": [1, 2, 3]})", "application/json");
  });
  server.Get("/rest/bug/1", [&](const httplib::Request&, httplib::Response& res) {
    if (bug1_hits.fetch_add(1) == 0) {
      res.status = 429;  // first attempt is throttled
      return;
    }
    OrderedJson j;
    j["bugs"] = OrderedJson::array({raw_bug_to_json(make_raw(1, 100, "served bug"))});
    res.set_content(j.dump(), "application/json");
  });
  server.Get("/rest/bug/1/history", [](const httplib::Request&, httplib::Response& res) {
    RawHistory h;
    h.id = 1;
    h.entries.push_back(change(ts_day(101), "blocks", "3"));
    OrderedJson j;
    j["bugs"] = OrderedJson::array({raw_history_to_json(h)});
    res.set_content(j.dump(), "application/json");
  });
  server.Get("/rest/bug/2", [](const httplib::Request&, httplib::Response& res) {
    res.status = 403;  // private bug
  });
  server.Get("/rest/bug/3", [](const httplib::Request&, httplib::Response& res) {
    OrderedJson j;
    j["bugs"] = OrderedJson::array({raw_bug_to_json(make_raw(3, 102, "third bug"))});
    res.set_content(j.dump(), "application/json");
  });
  server.Get("/rest/bug/3/history", [](const httplib::Request&, httplib::Response& res) {
    res.status = 404;  // no history recorded
  });
  server.Get("/rest/bug/9", [](const httplib::Request&, httplib::Response& res) {
    res.status = 503;  // permanently unavailable
  });
  server.Get("/rest/bug/8", [](const httplib::Request&, httplib::Response& res) {
    res.status = 401;
  });

  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  FetchOptions opt;
  opt.host = "127.0.0.1";
  opt.port = port;
  opt.threads = 2;
  opt.max_retries = 3;
  opt.backoff_base_ms = 1;

  FetchStats stats;
  const std::vector<BugId> ids = fetch_bug_ids(opt, &stats);
  CHECK(ids == std::vector<BugId>{1, 2, 3});

  const RawCorpus corpus = fetch_corpus(ids, opt, &stats);
  REQUIRE(corpus.bugs.size() == 2);
  CHECK(corpus.bugs[0].id == 1);
  CHECK(corpus.bugs[0].summary == "served bug");
  CHECK(corpus.bugs[1].id == 3);
  REQUIRE(corpus.histories.size() == 1);
  CHECK(corpus.histories[0].id == 1);
  CHECK(stats.fetched == 2);
  CHECK(stats.forbidden_skipped == 1);
  CHECK(stats.not_found_skipped == 1);
  CHECK(stats.retries >= 1);

  CHECK_THROWS_AS(fetch_corpus({9}, opt), NetworkError);
  CHECK_THROWS_AS(fetch_corpus({8}, opt), AuthRequired);

  server.stop();
  server_thread.join();
}

TEST_CASE("fetched corpus normalizes like a local one") {
  httplib::Server server;
  server.Get(R"(/rest/bug/(\d+))", [](const httplib::Request& req, httplib::Response& res) {
    const BugId id = std::stoll(req.matches[1]);
    RawBug b = make_raw(id, 100 + static_cast<DayNumber>(id));
    if (id == 2) b.blocks = {1};
    OrderedJson j;
    j["bugs"] = OrderedJson::array({raw_bug_to_json(b)});
    res.set_content(j.dump(), "application/json");
  });
  server.Get(R"(/rest/bug/(\d+)/history)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 404;
  });

  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread server_thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  FetchOptions opt;
  opt.host = "127.0.0.1";
  opt.port = port;
  opt.backoff_base_ms = 1;
  const RawCorpus corpus = fetch_corpus({1, 2}, opt);
  server.stop();
  server_thread.join();

  const NormalizeResult res = normalize(corpus, 0);
  CHECK(res.log.bugs.size() == 2);
  CHECK(find_event(res.log, EventKind::Blocks, 2, 1) != nullptr);
}
