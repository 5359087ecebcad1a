#pragma once

// Raw tracker ingestion. Stage A fetches REST-shaped bug records and their
// change histories (or reads them from a fixture directory); stage B
// normalizes them into the canonical chronological event log. Stage B is
// idempotent: normalizing a log rebuilt from its own output is a no-op.

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "bdg/core.hpp"
#include "bdg/jsonl.hpp"
#include "bdg/time.hpp"

namespace bdg {

struct NetworkError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AuthRequired : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Verbatim REST payloads, persisted untouched for audit.
struct RawHistoryChange {
  std::string field_name;
  std::string added;
  std::string removed;
};

struct RawHistoryEntry {
  Timestamp when = 0;
  std::string who;
  std::vector<RawHistoryChange> changes;
};

struct RawHistory {
  BugId id = 0;
  std::vector<RawHistoryEntry> entries;
};

struct RawBug {
  BugId id = 0;
  std::string summary;
  std::string description;
  std::string component;
  std::string product;
  std::string severity = "normal";
  std::string priority = "--";
  std::string status = "NEW";
  std::string resolution;
  std::string assigned_to;
  Timestamp creation_time = 0;
  std::optional<BugId> dupe_of;
  std::int64_t comment_count = 0;
  std::vector<BugId> depends_on;
  std::vector<BugId> blocks;
  std::optional<Timestamp> cf_last_resolved;
  std::vector<Timestamp> comments;  // comment timestamps only
};

struct RawCorpus {
  std::vector<RawBug> bugs;
  std::vector<RawHistory> histories;
};

inline OrderedJson raw_bug_to_json(const RawBug& b) {
  OrderedJson j;
  j["id"] = b.id;
  j["summary"] = b.summary;
  j["description"] = b.description;
  j["component"] = b.component;
  j["product"] = b.product;
  j["severity"] = b.severity;
  j["priority"] = b.priority;
  j["status"] = b.status;
  j["resolution"] = b.resolution;
  j["assigned_to"] = b.assigned_to;
  j["creation_time"] = format_rfc3339(b.creation_time);
  if (b.dupe_of) j["dupe_of"] = *b.dupe_of;
  else j["dupe_of"] = nullptr;
  j["comment_count"] = b.comment_count;
  j["depends_on"] = b.depends_on;
  j["blocks"] = b.blocks;
  if (b.cf_last_resolved) j["cf_last_resolved"] = format_rfc3339(*b.cf_last_resolved);
  else j["cf_last_resolved"] = nullptr;
  OrderedJson comments = OrderedJson::array();
  for (Timestamp t : b.comments) comments.push_back(format_rfc3339(t));
  j["comments"] = comments;
  return j;
}

inline Timestamp parse_raw_time(const OrderedJson& j, const char* key) {
  const std::string s = j.at(key).get<std::string>();
  const auto t = parse_rfc3339(s);
  if (!t) throw DataError(std::string("bad timestamp in field ") + key + ": " + s);
  return *t;
}

inline RawBug raw_bug_from_json(const OrderedJson& j) {
  RawBug b;
  b.id = j.at("id").get<BugId>();
  b.summary = j.value("summary", "");
  b.description = j.value("description", "");
  b.component = j.value("component", "");
  b.product = j.value("product", "");
  b.severity = j.value("severity", "normal");
  b.priority = j.value("priority", "--");
  b.status = j.value("status", "NEW");
  b.resolution = j.value("resolution", "");
  b.assigned_to = j.value("assigned_to", "");
  b.creation_time = parse_raw_time(j, "creation_time");
  if (j.contains("dupe_of") && !j.at("dupe_of").is_null()) b.dupe_of = j.at("dupe_of").get<BugId>();
  b.comment_count = j.value("comment_count", std::int64_t{0});
  if (j.contains("depends_on")) b.depends_on = j.at("depends_on").get<std::vector<BugId>>();
  if (j.contains("blocks")) b.blocks = j.at("blocks").get<std::vector<BugId>>();
  if (j.contains("cf_last_resolved") && !j.at("cf_last_resolved").is_null()) {
    b.cf_last_resolved = parse_raw_time(j, "cf_last_resolved");
  }
  if (j.contains("comments")) {
    for (const auto& c : j.at("comments")) {
      const auto t = parse_rfc3339(c.get<std::string>());
      if (!t) throw DataError("bad comment timestamp on bug " + std::to_string(b.id));
      b.comments.push_back(*t);
    }
  }
  return b;
}

inline OrderedJson raw_history_to_json(const RawHistory& h) {
  OrderedJson j;
  j["id"] = h.id;
  OrderedJson entries = OrderedJson::array();
  for (const RawHistoryEntry& e : h.entries) {
    OrderedJson je;
    je["when"] = format_rfc3339(e.when);
    je["who"] = e.who;
    OrderedJson changes = OrderedJson::array();
    for (const RawHistoryChange& c : e.changes) {
      OrderedJson jc;
      jc["field_name"] = c.field_name;
      jc["added"] = c.added;
      jc["removed"] = c.removed;
      changes.push_back(jc);
    }
    je["changes"] = changes;
    entries.push_back(je);
  }
  j["history"] = entries;
  return j;
}

inline RawHistory raw_history_from_json(const OrderedJson& j) {
  RawHistory h;
  h.id = j.at("id").get<BugId>();
  if (j.contains("history")) {
    for (const auto& je : j.at("history")) {
      RawHistoryEntry e;
      e.when = parse_raw_time(je, "when");
      e.who = je.value("who", "");
      if (je.contains("changes")) {
        for (const auto& jc : je.at("changes")) {
          RawHistoryChange c;
          c.field_name = jc.value("field_name", "");
          c.added = jc.value("added", "");
          c.removed = jc.value("removed", "");
          e.changes.push_back(c);
        }
      }
      h.entries.push_back(e);
    }
  }
  return h;
}

inline void save_raw_dir(const RawCorpus& corpus, const std::string& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir + "/bugs.jsonl", std::ios::binary);
    for (const RawBug& b : corpus.bugs) out << raw_bug_to_json(b).dump() << "\n";
  }
  {
    std::ofstream out(dir + "/history.jsonl", std::ios::binary);
    for (const RawHistory& h : corpus.histories) out << raw_history_to_json(h).dump() << "\n";
  }
}

inline RawCorpus load_raw_dir(const std::string& dir) {
  RawCorpus corpus;
  std::ifstream bugs(dir + "/bugs.jsonl");
  if (!bugs) throw DataError("cannot open " + dir + "/bugs.jsonl");
  std::string line;
  while (std::getline(bugs, line)) {
    if (line.empty()) continue;
    corpus.bugs.push_back(raw_bug_from_json(OrderedJson::parse(line)));
  }
  std::ifstream hist(dir + "/history.jsonl");
  if (!hist) throw DataError("cannot open " + dir + "/history.jsonl");
  while (std::getline(hist, line)) {
    if (line.empty()) continue;
    corpus.histories.push_back(raw_history_from_json(OrderedJson::parse(line)));
  }
  return corpus;
}

struct FetchOptions {
  std::string host = "127.0.0.1";
  int port = 80;
  int threads = 4;
  int max_retries = 10;
  int backoff_base_ms = 250;
};

struct FetchStats {
  std::int64_t fetched = 0;
  std::int64_t forbidden_skipped = 0;
  std::int64_t not_found_skipped = 0;
  std::int64_t retries = 0;
};

namespace detail {

struct FetchCounters {
  std::atomic<std::int64_t> fetched{0};
  std::atomic<std::int64_t> forbidden{0};
  std::atomic<std::int64_t> not_found{0};
  std::atomic<std::int64_t> retries{0};
};

// GET with exponential backoff on 429/5xx and transport failures.
// Returns the body, or nothing when the resource is private or missing.
inline std::optional<std::string> http_get_with_backoff(httplib::Client& cli,
                                                        const std::string& path,
                                                        const FetchOptions& opt,
                                                        FetchCounters& counters) {
  int delay_ms = opt.backoff_base_ms;
  for (int attempt = 0;; ++attempt) {
    httplib::Result res = cli.Get(path);
    if (res) {
      if (res->status == 200) return res->body;
      if (res->status == 401) throw AuthRequired("authentication required for " + path);
      if (res->status == 403) {
        ++counters.forbidden;
        return std::nullopt;
      }
      if (res->status == 404) {
        ++counters.not_found;
        return std::nullopt;
      }
      if (res->status != 429 && res->status < 500) {
        throw NetworkError("unexpected status " + std::to_string(res->status) + " for " + path);
      }
    }
    if (attempt >= opt.max_retries) throw NetworkError("retries exhausted for " + path);
    ++counters.retries;
    std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
    delay_ms = std::min(delay_ms * 2, 60000);
  }
}

}  // namespace detail

inline std::vector<BugId> fetch_bug_ids(const FetchOptions& opt, FetchStats* stats = nullptr) {
  httplib::Client cli(opt.host, opt.port);
  detail::FetchCounters counters;
  const auto body = detail::http_get_with_backoff(cli, "/rest/bug_ids", opt, counters);
  if (stats) stats->retries += counters.retries.load();
  if (!body) throw NetworkError("bug id listing not accessible");
  const OrderedJson j = OrderedJson::parse(*body);
  return j.at("ids").get<std::vector<BugId>>();
}

// Fetches /rest/bug/{id} and /rest/bug/{id}/history for every id with a
// small worker pool. Output order follows the id list regardless of which
// worker finished first; skipped bugs leave no record.
inline RawCorpus fetch_corpus(const std::vector<BugId>& ids, const FetchOptions& opt,
                              FetchStats* stats = nullptr) {
  std::vector<std::optional<RawBug>> bug_slots(ids.size());
  std::vector<std::optional<RawHistory>> hist_slots(ids.size());
  detail::FetchCounters counters;
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto worker = [&]() {
    httplib::Client cli(opt.host, opt.port);
    try {
      for (std::size_t i = next.fetch_add(1); i < ids.size(); i = next.fetch_add(1)) {
        {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (first_error) return;
        }
        const std::string base = "/rest/bug/" + std::to_string(ids[i]);
        const auto body = detail::http_get_with_backoff(cli, base, opt, counters);
        if (!body) continue;
        const OrderedJson j = OrderedJson::parse(*body);
        bug_slots[i] = raw_bug_from_json(j.at("bugs").at(0));
        ++counters.fetched;
        const auto hist_body =
            detail::http_get_with_backoff(cli, base + "/history", opt, counters);
        if (hist_body) {
          const OrderedJson jh = OrderedJson::parse(*hist_body);
          hist_slots[i] = raw_history_from_json(jh.at("bugs").at(0));
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };

  const int n_threads = std::max(1, std::min<int>(opt.threads, static_cast<int>(ids.size())));
  std::vector<std::thread> pool;
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);

  RawCorpus corpus;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!bug_slots[i]) continue;
    corpus.bugs.push_back(std::move(*bug_slots[i]));
    if (hist_slots[i]) corpus.histories.push_back(std::move(*hist_slots[i]));
  }
  if (stats) {
    stats->fetched += counters.fetched.load();
    stats->forbidden_skipped += counters.forbidden.load();
    stats->not_found_skipped += counters.not_found.load();
    stats->retries += counters.retries.load();
  }
  return corpus;
}

struct NormalizeStats {
  std::int64_t duplicates_merged = 0;
  std::int64_t missing_dupe_targets = 0;
  std::int64_t enhancements_dropped = 0;
  std::int64_t old_arcs_dropped = 0;
  std::int64_t arc_conflicts = 0;   // add-then-remove, resolved latest-wins
  std::int64_t arcs_deduped = 0;    // extra add mentions beyond the first
  std::int64_t dangling_arcs = 0;   // endpoint absent or self-referential
};

struct NormalizeResult {
  EventLog log;
  NormalizeStats stats;
};

namespace detail {

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

inline std::string upper(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return s;
}

// Bugzilla change values pack id lists as "123, 456".
inline std::vector<BugId> parse_id_list(const std::string& s) {
  std::vector<BugId> out;
  std::string token;
  std::istringstream in(s);
  while (std::getline(in, token, ',')) {
    std::size_t b = token.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    std::size_t e = token.find_last_not_of(" \t");
    try {
      out.push_back(std::stoll(token.substr(b, e - b + 1)));
    } catch (const std::exception&) {
      throw DataError("bad bug id in change value: " + s);
    }
  }
  return out;
}

struct ArcMention {
  Timestamp at = 0;
  bool add = true;
  EventKind kind = EventKind::Blocks;  // original field the mention came from
  BugId bug = 0;                       // event owner (field holder)
  BugId target = 0;
};

}  // namespace detail

inline NormalizeResult normalize(const RawCorpus& raw, DayNumber window_start) {
  NormalizeResult out;
  NormalizeStats& stats = out.stats;

  std::map<BugId, RawBug> bugs;
  for (const RawBug& b : raw.bugs) bugs[b.id] = b;
  std::map<BugId, const RawHistory*> hist;
  for (const RawHistory& h : raw.histories) hist[h.id] = &h;

  // Follow dupe_of chains to the original report. Chains that leave the
  // corpus or loop are contradictions: the bug is kept as its own record.
  auto ultimate = [&](BugId start) -> std::optional<BugId> {
    BugId cur = start;
    std::set<BugId> seen;
    while (true) {
      const auto it = bugs.find(cur);
      if (it == bugs.end()) return std::nullopt;
      if (!it->second.dupe_of) return cur;
      if (!seen.insert(cur).second) return std::nullopt;
      cur = *it->second.dupe_of;
    }
  };

  std::map<BugId, BugId> resolve_to;
  for (const auto& [id, b] : bugs) {
    if (!b.dupe_of) continue;
    const auto target = ultimate(*b.dupe_of);
    if (!target || *target == id) {
      ++stats.missing_dupe_targets;
      continue;
    }
    resolve_to[id] = *target;
  }

  auto final_id = [&](BugId id) {
    const auto it = resolve_to.find(id);
    return it == resolve_to.end() ? id : it->second;
  };

  // Merge duplicate information into the original, richer fields winning.
  for (const auto& [id, target] : resolve_to) {
    const RawBug& dup = bugs.at(id);
    RawBug& orig = bugs.at(target);
    ++stats.duplicates_merged;
    if (dup.summary.size() > orig.summary.size()) orig.summary = dup.summary;
    if (dup.description.size() > orig.description.size()) orig.description = dup.description;
    if (parse_priority(orig.priority).value_or(Priority::Missing) == Priority::Missing &&
        parse_priority(dup.priority).value_or(Priority::Missing) != Priority::Missing) {
      orig.priority = dup.priority;
    }
    orig.comment_count += dup.comment_count;
    orig.comments.insert(orig.comments.end(), dup.comments.begin(), dup.comments.end());
    orig.blocks.insert(orig.blocks.end(), dup.blocks.begin(), dup.blocks.end());
    orig.depends_on.insert(orig.depends_on.end(), dup.depends_on.begin(), dup.depends_on.end());
  }

  std::set<BugId> kept;
  for (const auto& [id, b] : bugs) {
    if (resolve_to.count(id)) continue;
    if (detail::lower(b.severity) == "enhancement") {
      ++stats.enhancements_dropped;
      continue;
    }
    kept.insert(id);
  }

  // Collect dependency mentions per directed arc; duplicate owners are
  // remapped so the original inherits the duplicate's arcs.
  std::map<std::pair<BugId, BugId>, std::vector<detail::ArcMention>> arcs;
  auto add_mention = [&](EventKind kind, BugId owner_raw, BugId target_raw, Timestamp at,
                         bool add) {
    const BugId owner = final_id(owner_raw);
    const BugId target = final_id(target_raw);
    if (owner == target) {
      ++stats.dangling_arcs;
      return;
    }
    const std::pair<BugId, BugId> key =
        kind == EventKind::Blocks ? std::make_pair(owner, target) : std::make_pair(target, owner);
    arcs[key].push_back({at, add, kind, owner, target});
  };

  for (const auto& [hid, h] : hist) {
    for (const RawHistoryEntry& e : h->entries) {
      for (const RawHistoryChange& c : e.changes) {
        if (c.field_name != "blocks" && c.field_name != "depends_on") continue;
        const EventKind kind =
            c.field_name == "blocks" ? EventKind::Blocks : EventKind::DependsOn;
        for (BugId t : detail::parse_id_list(c.added)) add_mention(kind, hid, t, e.when, true);
        for (BugId t : detail::parse_id_list(c.removed)) add_mention(kind, hid, t, e.when, false);
      }
    }
  }
  // Snapshot lists cover arcs that predate the retained history.
  for (const auto& [id, b] : bugs) {
    if (resolve_to.count(id)) continue;
    for (BugId t : b.blocks) {
      if (!arcs.count({final_id(id), final_id(t)})) {
        add_mention(EventKind::Blocks, id, t, b.creation_time, true);
      }
    }
    for (BugId t : b.depends_on) {
      if (!arcs.count({final_id(t), final_id(id)})) {
        add_mention(EventKind::DependsOn, id, t, b.creation_time, true);
      }
    }
  }

  std::vector<Event> events;

  for (auto& [key, mentions] : arcs) {
    const auto [src, dst] = key;
    if (!kept.count(src) || !kept.count(dst)) {
      ++stats.dangling_arcs;
      continue;
    }
    // Removals sort after additions at the same instant, so an
    // add-then-remove pair at one timestamp nets to "absent".
    std::stable_sort(mentions.begin(), mentions.end(),
                     [](const detail::ArcMention& a, const detail::ArcMention& b) {
                       if (a.at != b.at) return a.at < b.at;
                       return a.add && !b.add;
                     });
    std::int64_t n_adds = 0;
    const detail::ArcMention* first_add = nullptr;
    for (const detail::ArcMention& m : mentions) {
      if (!m.add) continue;
      ++n_adds;
      if (!first_add) first_add = &m;
    }
    if (!mentions.back().add) {
      if (n_adds > 0) ++stats.arc_conflicts;
      continue;
    }
    if (n_adds > 1) stats.arcs_deduped += n_adds - 1;

    // Dependencies among bugs that both predate the window are noise for
    // the replay and are excluded entirely.
    const Timestamp src_created = bugs.at(src).creation_time;
    const Timestamp dst_created = bugs.at(dst).creation_time;
    if (day_of(src_created) < window_start && day_of(dst_created) < window_start) {
      ++stats.old_arcs_dropped;
      continue;
    }
    const Timestamp at = std::max({first_add->at, src_created, dst_created});
    events.push_back({at, 0, first_add->bug, first_add->kind, first_add->target, {}});
  }

  // Lifecycle events and master records.
  for (BugId id : kept) {
    const RawBug& b = bugs.at(id);
    events.push_back({b.creation_time, 0, id, EventKind::Introduced, {}, {}});

    std::optional<std::pair<Timestamp, std::string>> last_assign;
    std::optional<Timestamp> last_resolve;
    bool saw_close = false;
    const auto hit = hist.find(id);
    if (hit != hist.end()) {
      for (const RawHistoryEntry& e : hit->second->entries) {
        for (const RawHistoryChange& c : e.changes) {
          if (c.field_name == "assigned_to" && !c.added.empty()) {
            events.push_back({e.when, 0, id, EventKind::Assigned, {}, c.added});
            last_assign = {e.when, c.added};
          } else if (c.field_name == "status") {
            const std::string added = detail::upper(c.added);
            if (added == "RESOLVED") {
              events.push_back({e.when, 0, id, EventKind::Resolved, {}, {}});
              last_resolve = e.when;
            } else if (added == "REOPENED") {
              events.push_back({e.when, 0, id, EventKind::Reopened, {}, {}});
            } else if (added == "CLOSED") {
              events.push_back({e.when, 0, id, EventKind::Closed, {}, {}});
              saw_close = true;
            }
          }
        }
      }
    }
    if (!last_assign && !b.assigned_to.empty()) {
      events.push_back({b.creation_time, 0, id, EventKind::Assigned, {}, b.assigned_to});
      last_assign = {b.creation_time, b.assigned_to};
    }
    const std::string status = detail::upper(b.status);
    if (!last_resolve && (status == "RESOLVED" || status == "VERIFIED") && b.cf_last_resolved) {
      events.push_back({*b.cf_last_resolved, 0, id, EventKind::Resolved, {}, {}});
      last_resolve = *b.cf_last_resolved;
    }
    if (!saw_close && status == "CLOSED" && b.cf_last_resolved) {
      events.push_back({*b.cf_last_resolved, 0, id, EventKind::Closed, {}, {}});
    }
    for (Timestamp t : b.comments) events.push_back({t, 0, id, EventKind::Commented, {}, {}});

    BugRecord rec;
    rec.id = id;
    rec.created_at = b.creation_time;
    rec.component = b.component;
    rec.product = b.product;
    rec.summary = b.summary;
    rec.description = b.description;
    rec.severity = parse_severity(detail::lower(b.severity)).value_or(Severity::Normal);
    rec.priority = parse_priority(b.priority).value_or(Priority::Missing);
    rec.comment_count =
        static_cast<int>(std::max<std::int64_t>(b.comment_count,
                                                static_cast<std::int64_t>(b.comments.size())));
    if (last_assign) {
      rec.assignee = last_assign->second;
      rec.assigned_at = last_assign->first;
    }
    if (b.cf_last_resolved) rec.resolved_at = *b.cf_last_resolved;
    else if (last_resolve) rec.resolved_at = *last_resolve;
    if (status == "RESOLVED" || status == "VERIFIED") rec.status = BugStatus::Resolved;
    else if (status == "CLOSED") rec.status = BugStatus::Closed;
    else rec.status = BugStatus::Open;
    out.log.bugs[id] = rec;
  }

  out.log.events = std::move(events);
  canonicalize_log(out.log);
  return out;
}

// Rebuilds the raw REST shape from a normalized log. Feeding the result
// back through normalize reproduces the log byte for byte.
inline RawCorpus raw_corpus_from_log(const EventLog& log) {
  std::map<BugId, RawBug> bugs;
  std::map<BugId, RawHistory> histories;
  for (const auto& [id, rec] : log.bugs) {
    RawBug b;
    b.id = id;
    b.summary = rec.summary;
    b.description = rec.description;
    b.component = rec.component;
    b.product = rec.product;
    b.severity = to_string(rec.severity);
    b.priority = to_string(rec.priority);
    b.creation_time = rec.created_at;
    b.comment_count = rec.comment_count;
    b.assigned_to = rec.assignee.value_or("");
    if (rec.status == BugStatus::Resolved) b.status = "RESOLVED";
    else if (rec.status == BugStatus::Closed) b.status = "CLOSED";
    else b.status = "NEW";
    if (rec.resolved_at) b.cf_last_resolved = *rec.resolved_at;
    bugs[id] = b;
  }

  auto entry_for = [&](BugId id, Timestamp at) -> RawHistoryEntry& {
    RawHistory& h = histories[id];
    h.id = id;
    h.entries.push_back({at, "", {}});
    return h.entries.back();
  };

  for (const Event& e : log.events) {
    switch (e.kind) {
      case EventKind::Introduced: break;
      case EventKind::Blocks:
        entry_for(e.bug, e.at).changes.push_back({"blocks", std::to_string(*e.target), ""});
        break;
      case EventKind::DependsOn:
        entry_for(e.bug, e.at).changes.push_back({"depends_on", std::to_string(*e.target), ""});
        break;
      case EventKind::Assigned: {
        RawHistoryEntry& he = entry_for(e.bug, e.at);
        he.who = e.developer.value_or("");
        he.changes.push_back({"assigned_to", e.developer.value_or(""), ""});
        break;
      }
      case EventKind::Resolved:
        entry_for(e.bug, e.at).changes.push_back({"status", "RESOLVED", ""});
        break;
      case EventKind::Reopened:
        entry_for(e.bug, e.at).changes.push_back({"status", "REOPENED", "RESOLVED"});
        break;
      case EventKind::Closed:
        entry_for(e.bug, e.at).changes.push_back({"status", "CLOSED", ""});
        break;
      case EventKind::Commented:
        bugs.at(e.bug).comments.push_back(e.at);
        break;
    }
  }

  RawCorpus corpus;
  for (auto& [_, b] : bugs) corpus.bugs.push_back(std::move(b));
  for (auto& [_, h] : histories) corpus.histories.push_back(std::move(h));
  return corpus;
}

// Rank-interpolation quantile: h = (n-1)p over the sorted values.
inline double quantile(std::vector<double> xs, double p) {
  if (xs.empty()) throw DataError("quantile of an empty series");
  std::sort(xs.begin(), xs.end());
  if (p <= 0.0) return xs.front();
  if (p >= 1.0) return xs.back();
  const double h = static_cast<double>(xs.size() - 1) * p;
  const std::size_t lo = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(lo);
  return xs[lo] + (xs[lo + 1] - xs[lo]) * frac;
}

inline double iqr(const std::vector<double>& xs) {
  return quantile(xs, 0.75) - quantile(xs, 0.25);
}

struct FeasibilityResult {
  std::set<BugId> feasible;
  std::set<std::string> active_devs;
  double fixing_threshold = 0.0;  // Q3 + 1.5 IQR of fixing times
  double dev_count_iqr = 0.0;     // activity cutoff on per-developer fix counts
};

// A bug is feasible when it was resolved, has a recorded assignment date,
// was fixed by an active developer, and its fixing time sits below the
// outlier threshold. Developers are active when their fix count exceeds
// the IQR of all fix counts.
inline FeasibilityResult feasibility_filter(const EventLog& log) {
  FeasibilityResult out;
  std::vector<double> fixings;
  std::map<std::string, std::int64_t> per_dev;
  std::vector<std::pair<BugId, double>> candidates;
  std::vector<BugId> ids;
  for (const auto& [id, _] : log.bugs) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  for (BugId id : ids) {
    const BugRecord& rec = log.bugs.at(id);
    if (!rec.resolved_at || !rec.assigned_at || !rec.assignee) continue;
    const double f = fixing_days(rec);
    fixings.push_back(f);
    per_dev[*rec.assignee] += 1;
    candidates.emplace_back(id, f);
  }
  if (fixings.empty()) return out;

  out.fixing_threshold = quantile(fixings, 0.75) + 1.5 * iqr(fixings);
  std::vector<double> counts;
  for (const auto& [_, c] : per_dev) counts.push_back(static_cast<double>(c));
  out.dev_count_iqr = iqr(counts);
  for (const auto& [dev, c] : per_dev) {
    if (static_cast<double>(c) > out.dev_count_iqr) out.active_devs.insert(dev);
  }
  for (const auto& [id, f] : candidates) {
    const BugRecord& rec = log.bugs.at(id);
    if (f < out.fixing_threshold && out.active_devs.count(*rec.assignee)) {
      out.feasible.insert(id);
    }
  }
  return out;
}

// Per-developer history accumulated from bugs resolved before `before_day`.
inline std::map<std::string, DeveloperProfile> build_developer_profiles(const EventLog& log,
                                                                        DayNumber before_day) {
  std::map<std::string, DeveloperProfile> profiles;
  std::vector<BugId> ids;
  for (const auto& [id, _] : log.bugs) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  for (BugId id : ids) {
    const BugRecord& rec = log.bugs.at(id);
    if (!rec.resolved_at || !rec.assigned_at || !rec.assignee) continue;
    if (day_of(*rec.resolved_at) >= before_day) continue;
    DeveloperProfile& p = profiles[*rec.assignee];
    p.id = *rec.assignee;
    p.fixes_count += 1;
    p.mean_fixing_days += fixing_days(rec);
    p.components_fixed.insert(rec.component);
  }
  for (auto& [_, p] : profiles) p.mean_fixing_days /= static_cast<double>(p.fixes_count);
  return profiles;
}

}  // namespace bdg
