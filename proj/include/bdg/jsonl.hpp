#pragma once

// JSON Lines persistence for event logs and bug tables. One object per
// line, keys in declaration order so output is byte-stable.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "bdg/core.hpp"
#include "bdg/time.hpp"

namespace bdg {

using OrderedJson = nlohmann::ordered_json;

inline OrderedJson event_to_json(const Event& e) {
  OrderedJson j;
  j["at"] = format_rfc3339(e.at);
  j["seq"] = e.seq;
  j["bug"] = e.bug;
  j["kind"] = to_string(e.kind);
  if (e.target) j["target"] = *e.target;
  if (e.developer) j["developer"] = *e.developer;
  return j;
}

inline Event event_from_json(const OrderedJson& j) {
  Event e;
  const auto at = parse_rfc3339(j.at("at").get<std::string>());
  if (!at) throw DataError("bad event timestamp: " + j.at("at").get<std::string>());
  e.at = *at;
  e.seq = j.at("seq").get<std::int64_t>();
  e.bug = j.at("bug").get<BugId>();
  const auto kind = parse_event_kind(j.at("kind").get<std::string>());
  if (!kind) throw DataError("bad event kind: " + j.at("kind").get<std::string>());
  e.kind = *kind;
  if (j.contains("target")) e.target = j.at("target").get<BugId>();
  if (j.contains("developer")) e.developer = j.at("developer").get<std::string>();
  return e;
}

inline OrderedJson bug_to_json(const BugRecord& b) {
  OrderedJson j;
  j["id"] = b.id;
  j["created_at"] = format_rfc3339(b.created_at);
  j["component"] = b.component;
  j["product"] = b.product;
  j["summary"] = b.summary;
  j["description"] = b.description;
  j["severity"] = severity_ordinal(b.severity);
  j["priority"] = priority_ordinal(b.priority);
  j["comment_count"] = b.comment_count;
  if (b.assignee) j["assignee"] = *b.assignee;
  if (b.assigned_at) j["assigned_at"] = format_rfc3339(*b.assigned_at);
  if (b.resolved_at) j["resolved_at"] = format_rfc3339(*b.resolved_at);
  j["status"] = to_string(b.status);
  return j;
}

inline BugRecord bug_from_json(const OrderedJson& j) {
  BugRecord b;
  b.id = j.at("id").get<BugId>();
  const auto created = parse_rfc3339(j.at("created_at").get<std::string>());
  if (!created) throw DataError("bad created_at for bug " + std::to_string(b.id));
  b.created_at = *created;
  b.component = j.at("component").get<std::string>();
  b.product = j.at("product").get<std::string>();
  b.summary = j.at("summary").get<std::string>();
  b.description = j.at("description").get<std::string>();
  b.severity = static_cast<Severity>(j.at("severity").get<int>());
  b.priority = static_cast<Priority>(j.at("priority").get<int>());
  b.comment_count = j.at("comment_count").get<int>();
  if (j.contains("assignee")) b.assignee = j.at("assignee").get<std::string>();
  if (j.contains("assigned_at")) {
    const auto t = parse_rfc3339(j.at("assigned_at").get<std::string>());
    if (!t) throw DataError("bad assigned_at for bug " + std::to_string(b.id));
    b.assigned_at = *t;
  }
  if (j.contains("resolved_at")) {
    const auto t = parse_rfc3339(j.at("resolved_at").get<std::string>());
    if (!t) throw DataError("bad resolved_at for bug " + std::to_string(b.id));
    b.resolved_at = *t;
  }
  const auto status = parse_status(j.at("status").get<std::string>());
  if (!status) throw DataError("bad status for bug " + std::to_string(b.id));
  b.status = *status;
  return b;
}

inline void write_events_jsonl(const EventLog& log, std::ostream& out) {
  for (const Event& e : log.events) out << event_to_json(e).dump() << "\n";
}

inline void write_bugs_jsonl(const EventLog& log, std::ostream& out) {
  std::vector<BugId> ids;
  ids.reserve(log.bugs.size());
  for (const auto& [id, _] : log.bugs) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  for (BugId id : ids) out << bug_to_json(log.bugs.at(id)).dump() << "\n";
}

inline void read_events_jsonl(std::istream& in, EventLog& log) {
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      log.events.push_back(event_from_json(OrderedJson::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("events line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

inline void read_bugs_jsonl(std::istream& in, EventLog& log) {
  std::string line;
  std::int64_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      BugRecord b = bug_from_json(OrderedJson::parse(line));
      log.bugs[b.id] = std::move(b);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("bugs line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

inline EventLog load_log(const std::string& events_path, const std::string& bugs_path) {
  EventLog log;
  std::ifstream ev(events_path);
  if (!ev) throw DataError("cannot open events file: " + events_path);
  read_events_jsonl(ev, log);
  std::ifstream bg(bugs_path);
  if (!bg) throw DataError("cannot open bugs file: " + bugs_path);
  read_bugs_jsonl(bg, log);
  sort_log(log);
  return log;
}

inline void save_log(const EventLog& log, const std::string& events_path,
                     const std::string& bugs_path) {
  std::ofstream ev(events_path, std::ios::binary);
  if (!ev) throw DataError("cannot write events file: " + events_path);
  write_events_jsonl(log, ev);
  std::ofstream bg(bugs_path, std::ios::binary);
  if (!bg) throw DataError("cannot write bugs file: " + bugs_path);
  write_bugs_jsonl(log, bg);
}

}  // namespace bdg
