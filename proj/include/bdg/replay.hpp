#pragma once

// Chronological replay of an issue-tracker event log. Replaying the sorted
// stream reconstructs the dependency graph exactly as it stood after any
// event; resolved bugs move to an archive so a later reopen can restore
// them together with the arcs whose other endpoint is still open.

#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "bdg/core.hpp"
#include "bdg/csv.hpp"
#include "bdg/graph.hpp"
#include "bdg/time.hpp"

namespace bdg {

struct ArchivedBug {
  BugRecord record;             // live copy at the moment of removal
  DetachedArcs arcs;            // arcs detached when the node left the graph
  int depth_at_removal = 0;
  int degree_at_removal = 0;
  Timestamp removed_at = 0;
};

// Bookkeeping identity: open node count stays equal to
// introduced - resolved - closed + reopened, counting applied events only.
struct ReplayCounters {
  std::int64_t introduced = 0;
  std::int64_t resolved = 0;
  std::int64_t closed = 0;
  std::int64_t reopened = 0;
  std::int64_t fixed = 0;  // first Resolved per bug

  std::int64_t skipped_unknown_bug = 0;
  std::int64_t skipped_duplicate = 0;   // re-introduce, duplicate arc, redundant transition
  std::int64_t skipped_cycle_arc = 0;
  std::int64_t skipped_closed_endpoint = 0;  // arc event whose endpoint is not open

  std::int64_t total_skipped() const {
    return skipped_unknown_bug + skipped_duplicate + skipped_cycle_arc + skipped_closed_endpoint;
  }
};

struct ConservationReport {
  bool identity_holds = false;
  bool archive_disjoint = false;
  std::int64_t open_count = 0;
  std::int64_t expected_open = 0;
  bool ok() const { return identity_holds && archive_disjoint; }
};

struct FixedBugSample {
  BugId id = 0;
  Timestamp fixed_at = 0;
  int depth = 0;
  int degree = 0;
  Severity severity = Severity::Normal;
  Priority priority = Priority::Missing;
};

class ReplayState {
 public:
  explicit ReplayState(const EventLog& log) : log_(&log) {}

  void apply(const Event& e) {
    switch (e.kind) {
      case EventKind::Introduced: apply_introduced(e); break;
      case EventKind::Blocks:
        if (e.target) apply_arc(e.bug, *e.target);
        else ++counters_.skipped_unknown_bug;
        break;
      case EventKind::DependsOn:
        if (e.target) apply_arc(*e.target, e.bug);
        else ++counters_.skipped_unknown_bug;
        break;
      case EventKind::Assigned: apply_assigned(e); break;
      case EventKind::Resolved: apply_removal(e, /*closed=*/false); break;
      case EventKind::Closed: apply_removal(e, /*closed=*/true); break;
      case EventKind::Reopened: apply_reopened(e); break;
      case EventKind::Commented: apply_commented(e); break;
    }
  }

  const DependencyGraph& graph() const { return graph_; }
  const std::map<BugId, BugRecord>& open_bugs() const { return open_; }
  const std::map<BugId, ArchivedBug>& resolved_store() const { return archive_; }
  const ReplayCounters& counters() const { return counters_; }
  const std::vector<FixedBugSample>& fixed_bugs() const { return fixed_; }
  const EventLog& log() const { return *log_; }

  bool ever_fixed(BugId id) const { return ever_fixed_.count(id) > 0; }

  ConservationReport conservation_check() const {
    ConservationReport r;
    r.open_count = static_cast<std::int64_t>(graph_.node_count());
    r.expected_open =
        counters_.introduced - counters_.resolved - counters_.closed + counters_.reopened;
    r.identity_holds = r.open_count == r.expected_open;
    r.archive_disjoint = true;
    for (const auto& [id, _] : archive_) {
      if (open_.count(id)) {
        r.archive_disjoint = false;
        break;
      }
    }
    return r;
  }

 private:
  void apply_introduced(const Event& e) {
    if (open_.count(e.bug) || archive_.count(e.bug)) {
      ++counters_.skipped_duplicate;
      return;
    }
    const BugRecord* rec = log_->find_bug(e.bug);
    if (!rec) {
      ++counters_.skipped_unknown_bug;
      return;
    }
    BugRecord live = *rec;
    live.status = BugStatus::Open;
    live.comment_count = 0;  // accumulated from Commented events
    open_[e.bug] = std::move(live);
    graph_.add_node(e.bug);
    ++counters_.introduced;
  }

  void apply_arc(BugId from, BugId to) {
    if (!open_.count(from) || !open_.count(to)) {
      if (archive_.count(from) || archive_.count(to)) ++counters_.skipped_closed_endpoint;
      else ++counters_.skipped_unknown_bug;
      return;
    }
    const auto err = graph_.add_arc(from, to);
    if (!err) return;
    if (*err == GraphError::WouldCreateCycle) ++counters_.skipped_cycle_arc;
    else ++counters_.skipped_duplicate;
  }

  void apply_assigned(const Event& e) {
    auto it = open_.find(e.bug);
    if (it == open_.end() || !e.developer) {
      ++counters_.skipped_unknown_bug;
      return;
    }
    it->second.assignee = *e.developer;
    it->second.assigned_at = e.at;  // latest assignment wins
  }

  void apply_removal(const Event& e, bool closed) {
    auto it = open_.find(e.bug);
    if (it == open_.end()) {
      // Resolving or closing an already archived bug is a no-op.
      if (archive_.count(e.bug)) ++counters_.skipped_duplicate;
      else ++counters_.skipped_unknown_bug;
      return;
    }
    ArchivedBug arch;
    arch.depth_at_removal = graph_.depth(e.bug);
    arch.degree_at_removal = graph_.degree(e.bug);
    arch.removed_at = e.at;
    graph_.remove_node(e.bug, &arch.arcs);
    arch.record = std::move(it->second);
    arch.record.status = closed ? BugStatus::Closed : BugStatus::Resolved;
    arch.record.resolved_at = e.at;
    open_.erase(it);
    if (closed) {
      ++counters_.closed;
    } else {
      ++counters_.resolved;
      if (ever_fixed_.insert(e.bug).second) {
        ++counters_.fixed;
        fixed_.push_back({e.bug, e.at, arch.depth_at_removal, arch.degree_at_removal,
                          arch.record.severity, arch.record.priority});
      }
    }
    archive_[e.bug] = std::move(arch);
  }

  void apply_reopened(const Event& e) {
    auto it = archive_.find(e.bug);
    if (it == archive_.end()) {
      if (open_.count(e.bug)) ++counters_.skipped_duplicate;
      else ++counters_.skipped_unknown_bug;
      return;
    }
    ArchivedBug arch = std::move(it->second);
    archive_.erase(it);
    arch.record.status = BugStatus::Open;
    arch.record.resolved_at.reset();
    graph_.add_node(e.bug);
    // Only arcs whose other endpoint is still open come back.
    for (BugId t : arch.arcs.out_targets) {
      if (open_.count(t)) graph_.add_arc(e.bug, t);
    }
    for (BugId s : arch.arcs.in_sources) {
      if (open_.count(s)) graph_.add_arc(s, e.bug);
    }
    open_[e.bug] = std::move(arch.record);
    ++counters_.reopened;
  }

  void apply_commented(const Event& e) {
    auto it = open_.find(e.bug);
    if (it != open_.end()) {
      ++it->second.comment_count;
      return;
    }
    auto ar = archive_.find(e.bug);
    if (ar != archive_.end()) {
      ++ar->second.record.comment_count;  // kept current for a later reopen
      return;
    }
    ++counters_.skipped_unknown_bug;
  }

  const EventLog* log_;
  DependencyGraph graph_;
  std::map<BugId, BugRecord> open_;
  std::map<BugId, ArchivedBug> archive_;
  std::set<BugId> ever_fixed_;
  std::vector<FixedBugSample> fixed_;
  ReplayCounters counters_;
};

struct Snapshot {
  DayNumber day = 0;
  std::int64_t n = 0;
  std::int64_t m = 0;
  std::int64_t fixed_today = 0;
  double max_deg_c = 0.0;
  double max_depth_c = 0.0;
  double mean_sub_depth = 0.0;
  double mean_sev = 0.0;
  double mean_prio = 0.0;
  double mean_comments = 0.0;
  double mean_auth = 0.0;
  double max_auth = 0.0;
  double mean_hub = 0.0;
  double max_hub = 0.0;
  double max_harmonic = 0.0;
};

inline Snapshot take_snapshot(const ReplayState& state, DayNumber day,
                              std::int64_t fixed_in_bucket) {
  Snapshot s;
  s.day = day;
  const DependencyGraph& g = state.graph();
  s.n = static_cast<std::int64_t>(g.node_count());
  s.m = static_cast<std::int64_t>(g.arc_count());
  s.fixed_today = fixed_in_bucket;
  s.max_deg_c = g.max_degree_centrality();
  s.max_depth_c = g.max_depth_centrality();
  s.mean_sub_depth = g.mean_subgraph_depth();
  if (s.n > 0) {
    double sev = 0.0, prio = 0.0, com = 0.0;
    for (const auto& [_, rec] : state.open_bugs()) {
      sev += severity_ordinal(rec.severity);
      prio += priority_ordinal(rec.priority);
      com += rec.comment_count;
    }
    const double n = static_cast<double>(s.n);
    s.mean_sev = sev / n;
    s.mean_prio = prio / n;
    s.mean_comments = com / n;
    const auto hits = g.hits();
    double sa = 0.0, sh = 0.0;
    for (const auto& [_, v] : hits.authority) {
      sa += v;
      s.max_auth = std::max(s.max_auth, v);
    }
    for (const auto& [_, v] : hits.hub) {
      sh += v;
      s.max_hub = std::max(s.max_hub, v);
    }
    s.mean_auth = sa / n;
    s.mean_hub = sh / n;
    for (const auto& [_, v] : g.harmonic_all()) s.max_harmonic = std::max(s.max_harmonic, v);
  }
  return s;
}

inline const char* snapshot_csv_header() {
  return "date,n,m,fixed_today,max_deg_c,max_depth_c,mean_sub_depth,mean_sev,mean_prio,"
         "mean_comments,mean_auth,max_auth,mean_hub,max_hub,max_harmonic";
}

inline void write_snapshots_csv(const std::vector<Snapshot>& snaps, std::ostream& out) {
  out << snapshot_csv_header() << "\r\n";
  for (const Snapshot& s : snaps) {
    out << csv_row({format_date(s.day), fmt_int(s.n), fmt_int(s.m), fmt_int(s.fixed_today),
                    fmt_f6(s.max_deg_c), fmt_f6(s.max_depth_c), fmt_f6(s.mean_sub_depth),
                    fmt_f6(s.mean_sev), fmt_f6(s.mean_prio), fmt_f6(s.mean_comments),
                    fmt_f6(s.mean_auth), fmt_f6(s.max_auth), fmt_f6(s.mean_hub),
                    fmt_f6(s.max_hub), fmt_f6(s.max_harmonic)});
  }
}

struct ReplayRun {
  std::vector<Snapshot> snapshots;
  ReplayState state;
};

// Replays `log` (which must be sorted) and emits one snapshot at the end of
// every `granularity`-th day of [from_day, to_day], plus the final day.
// Events before the window warm the state up without emitting anything.
inline ReplayRun run_replay(const EventLog& log, DayNumber from_day, DayNumber to_day,
                            std::int64_t granularity = 1) {
  ReplayRun run{{}, ReplayState(log)};
  ReplayState& state = run.state;
  std::size_t i = 0;
  const auto& events = log.events;
  while (i < events.size() && day_of(events[i].at) < from_day) state.apply(events[i++]);
  std::int64_t fixed_before = state.counters().fixed;
  for (DayNumber d = from_day; d <= to_day; ++d) {
    while (i < events.size() && day_of(events[i].at) == d) state.apply(events[i++]);
    const bool boundary = (d - from_day + 1) % granularity == 0 || d == to_day;
    if (boundary) {
      const std::int64_t fixed_now = state.counters().fixed;
      run.snapshots.push_back(take_snapshot(state, d, fixed_now - fixed_before));
      fixed_before = fixed_now;
    }
  }
  return run;
}

// Exact state after the last event with timestamp <= t.
inline ReplayState state_at(const EventLog& log, Timestamp t) {
  ReplayState state(log);
  for (const Event& e : log.events) {
    if (e.at > t) break;
    state.apply(e);
  }
  return state;
}

// Per-bug dump of the live graph: bug_id,depth,degree,component_id,severity,priority.
inline void write_state_csv(const ReplayState& state, std::ostream& out) {
  out << "bug_id,depth,degree,component_id,severity,priority\r\n";
  const DependencyGraph& g = state.graph();
  for (const auto& [id, rec] : state.open_bugs()) {
    out << csv_row({fmt_int(id), fmt_int(g.depth(id)), fmt_int(g.degree(id)),
                    fmt_int(g.component_of(id)), fmt_int(severity_ordinal(rec.severity)),
                    fmt_int(priority_ordinal(rec.priority))});
  }
}

}  // namespace bdg
