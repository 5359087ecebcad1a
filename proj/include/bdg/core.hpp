#pragma once

// Domain model for an issue tracker event log: bug records, the ordinal
// severity and priority scales, and the chronological event stream that
// every downstream consumer replays.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "bdg/time.hpp"

namespace bdg {

using BugId = std::int64_t;

// Malformed or inconsistent input data.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Ordinal scale; comparisons on the underlying value are meaningful.
enum class Severity : int {
  Enhancement = 0,
  Trivial = 1,
  Minor = 2,
  Normal = 3,
  Major = 4,
  Critical = 5,
  Blocker = 6,
};

inline int severity_ordinal(Severity s) { return static_cast<int>(s); }

inline const char* to_string(Severity s) {
  switch (s) {
    case Severity::Enhancement: return "enhancement";
    case Severity::Trivial: return "trivial";
    case Severity::Minor: return "minor";
    case Severity::Normal: return "normal";
    case Severity::Major: return "major";
    case Severity::Critical: return "critical";
    case Severity::Blocker: return "blocker";
  }
  return "normal";
}

inline std::optional<Severity> parse_severity(const std::string& s) {
  for (int v = 0; v <= 6; ++v) {
    if (s == to_string(static_cast<Severity>(v))) return static_cast<Severity>(v);
  }
  return std::nullopt;
}

// "Missing" sorts below every real priority; P1 is the most urgent.
enum class Priority : int {
  Missing = 0,
  P5 = 1,
  P4 = 2,
  P3 = 3,
  P2 = 4,
  P1 = 5,
};

inline int priority_ordinal(Priority p) { return static_cast<int>(p); }

inline const char* to_string(Priority p) {
  switch (p) {
    case Priority::Missing: return "--";
    case Priority::P5: return "P5";
    case Priority::P4: return "P4";
    case Priority::P3: return "P3";
    case Priority::P2: return "P2";
    case Priority::P1: return "P1";
  }
  return "--";
}

inline std::optional<Priority> parse_priority(const std::string& s) {
  if (s.empty() || s == "--" || s == "missing") return Priority::Missing;
  if (s.size() == 2 && s[0] == 'P' && s[1] >= '1' && s[1] <= '5') {
    return static_cast<Priority>(6 - (s[1] - '0'));
  }
  return std::nullopt;
}

enum class BugStatus { Open, Resolved, Closed };

inline const char* to_string(BugStatus s) {
  switch (s) {
    case BugStatus::Open: return "open";
    case BugStatus::Resolved: return "resolved";
    case BugStatus::Closed: return "closed";
  }
  return "open";
}

inline std::optional<BugStatus> parse_status(const std::string& s) {
  if (s == "open") return BugStatus::Open;
  if (s == "resolved") return BugStatus::Resolved;
  if (s == "closed") return BugStatus::Closed;
  return std::nullopt;
}

struct BugRecord {
  BugId id = 0;
  Timestamp created_at = 0;
  std::string component;
  std::string product;
  std::string summary;
  std::string description;
  Severity severity = Severity::Normal;
  Priority priority = Priority::Missing;
  int comment_count = 0;
  std::optional<std::string> assignee;
  std::optional<Timestamp> assigned_at;
  std::optional<Timestamp> resolved_at;
  BugStatus status = BugStatus::Open;

  std::string text() const { return summary + " " + description; }
};

// Inclusive day count from assignment to resolution; requires both dates.
inline double fixing_days(const BugRecord& rec) {
  return static_cast<double>(day_of(*rec.resolved_at) - day_of(*rec.assigned_at) + 1);
}

enum class EventKind {
  Introduced,
  Blocks,      // this bug starts blocking `target`
  DependsOn,   // `target` starts blocking this bug
  Assigned,
  Resolved,
  Reopened,
  Closed,
  Commented,
};

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::Introduced: return "introduced";
    case EventKind::Blocks: return "blocks";
    case EventKind::DependsOn: return "depends_on";
    case EventKind::Assigned: return "assigned";
    case EventKind::Resolved: return "resolved";
    case EventKind::Reopened: return "reopened";
    case EventKind::Closed: return "closed";
    case EventKind::Commented: return "commented";
  }
  return "commented";
}

inline std::optional<EventKind> parse_event_kind(const std::string& s) {
  static const char* names[] = {"introduced", "blocks", "depends_on", "assigned",
                                "resolved",   "reopened", "closed",   "commented"};
  for (int i = 0; i < 8; ++i) {
    if (s == names[i]) return static_cast<EventKind>(i);
  }
  return std::nullopt;
}

struct Event {
  Timestamp at = 0;
  std::int64_t seq = 0;  // tiebreaker for equal timestamps
  BugId bug = 0;
  EventKind kind = EventKind::Commented;
  std::optional<BugId> target;            // Blocks / DependsOn
  std::optional<std::string> developer;   // Assigned
};

struct EventLog {
  std::vector<Event> events;
  std::unordered_map<BugId, BugRecord> bugs;

  const BugRecord* find_bug(BugId id) const {
    auto it = bugs.find(id);
    return it == bugs.end() ? nullptr : &it->second;
  }
};

// Chronological order with seq as the tiebreaker. Stable, so equal
// (at, seq) pairs keep their input order and replay is reproducible.
inline void sort_log(EventLog& log) {
  std::stable_sort(log.events.begin(), log.events.end(), [](const Event& a, const Event& b) {
    if (a.at != b.at) return a.at < b.at;
    return a.seq < b.seq;
  });
}

// Canonical producer order: introductions precede same-instant arcs (the
// enum ordering), remaining ties break on ids, and seq becomes the index.
// Re-running this on its own output changes nothing.
inline void canonicalize_log(EventLog& log) {
  std::stable_sort(log.events.begin(), log.events.end(), [](const Event& a, const Event& b) {
    if (a.at != b.at) return a.at < b.at;
    if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    if (a.bug != b.bug) return a.bug < b.bug;
    if (a.target != b.target) return a.target.value_or(-1) < b.target.value_or(-1);
    return a.developer.value_or("") < b.developer.value_or("");
  });
  for (std::size_t i = 0; i < log.events.size(); ++i) {
    log.events[i].seq = static_cast<std::int64_t>(i);
  }
}

struct DeveloperProfile {
  std::string id;
  int fixes_count = 0;
  double mean_fixing_days = 0.0;
  std::set<std::string> components_fixed;
};

}  // namespace bdg
