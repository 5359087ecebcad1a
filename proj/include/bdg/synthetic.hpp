#pragma once

// Synthetic stress data: a seeded arc densifier that multiplies dependency
// density while leaving every other attribute of the log intact, and a
// severity-conditioned bug sampler driven by observed tracker statistics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "bdg/core.hpp"
#include "bdg/rng.hpp"

namespace bdg {

// Per-bug arc target n' = max(0, round(n * gamma + delta)); llround, so
// halves go away from zero. The clamp is what keeps n = 0 bugs sane when
// delta is negative.
inline std::int64_t densify_target(std::int64_t n, double gamma, std::int64_t delta) {
  const double raw = static_cast<double>(n) * gamma + static_cast<double>(delta);
  return std::max<std::int64_t>(0, std::llround(raw));
}

struct DensifyStats {
  std::int64_t arcs_added = 0;
  std::int64_t redraws = 0;        // rejected candidate draws (cycle, dup, self)
  std::int64_t arcs_abandoned = 0; // arcs given up after the redraw budget
};

struct DensifyResult {
  EventLog log;
  DensifyStats stats;
};

namespace detail {

// Open intervals per bug reconstructed from the lifecycle events; an empty
// upper bound means the bug never left the graph.
struct OpenSpans {
  std::map<BugId, std::vector<std::pair<Timestamp, Timestamp>>> spans;

  static constexpr Timestamp kForever = std::numeric_limits<Timestamp>::max();

  void build(const EventLog& log) {
    std::map<BugId, Timestamp> open_since;
    for (const Event& e : log.events) {
      switch (e.kind) {
        case EventKind::Introduced:
        case EventKind::Reopened:
          open_since.emplace(e.bug, e.at);
          break;
        case EventKind::Resolved:
        case EventKind::Closed: {
          auto it = open_since.find(e.bug);
          if (it != open_since.end()) {
            spans[e.bug].emplace_back(it->second, e.at);
            open_since.erase(it);
          }
          break;
        }
        default:
          break;
      }
    }
    for (const auto& [bug, since] : open_since) spans[bug].emplace_back(since, kForever);
  }

  // Half-open membership: a bug resolved at t is no longer open at t.
  bool open_at(BugId bug, Timestamp t) const {
    const auto it = spans.find(bug);
    if (it == spans.end()) return false;
    for (const auto& [from, to] : it->second) {
      if (from <= t && t < to) return true;
    }
    return false;
  }
};

inline bool reaches(const std::map<BugId, std::vector<BugId>>& adj, BugId from, BugId to) {
  if (from == to) return true;
  std::set<BugId> seen{from};
  std::vector<BugId> stack{from};
  while (!stack.empty()) {
    const BugId cur = stack.back();
    stack.pop_back();
    const auto it = adj.find(cur);
    if (it == adj.end()) continue;
    for (BugId next : it->second) {
      if (next == to) return true;
      if (seen.insert(next).second) stack.push_back(next);
    }
  }
  return false;
}

}  // namespace detail

// Multiplies each bug's outgoing arc count toward n' = max(0, round(n*gamma
// + delta)) with delta drawn per bug from delta_set. Added arcs carry the
// source's first dependency timestamp (creation when it has none), point at
// bugs open at that instant, and never close a cycle; a candidate is
// redrawn up to 20 times before the arc is abandoned. Existing events,
// records, and arc counts are preserved, so the transform only adds.
inline DensifyResult densify(const EventLog& log, double gamma,
                             const std::vector<std::int64_t>& delta_set, std::uint64_t seed) {
  DensifyResult out;
  out.log = log;
  if (delta_set.empty() || log.bugs.empty()) {
    canonicalize_log(out.log);
    return out;
  }

  detail::OpenSpans open;
  open.build(log);

  std::set<std::pair<BugId, BugId>> arc_set;
  std::map<BugId, std::vector<BugId>> adj;
  std::map<BugId, std::int64_t> out_degree;
  std::map<BugId, Timestamp> first_dep;
  for (const Event& e : log.events) {
    if (e.kind != EventKind::Blocks && e.kind != EventKind::DependsOn) continue;
    const BugId src = e.kind == EventKind::Blocks ? e.bug : *e.target;
    const BugId dst = e.kind == EventKind::Blocks ? *e.target : e.bug;
    if (arc_set.insert({src, dst}).second) {
      adj[src].push_back(dst);
      out_degree[src] += 1;
    }
    for (BugId endpoint : {src, dst}) {
      const auto it = first_dep.find(endpoint);
      if (it == first_dep.end() || e.at < it->second) first_dep[endpoint] = e.at;
    }
  }

  std::vector<BugId> ids;
  for (const auto& [id, _] : log.bugs) ids.push_back(id);
  std::sort(ids.begin(), ids.end());

  Rng rng(seed);
  for (BugId src : ids) {
    const std::int64_t n = out_degree.count(src) ? out_degree.at(src) : 0;
    const std::int64_t delta =
        delta_set[rng.uniform_below(static_cast<std::uint64_t>(delta_set.size()))];
    const std::int64_t want = densify_target(n, gamma, delta);
    if (want <= n) continue;

    // Land new arcs where the source first showed dependency activity, but
    // only if it was still open then; histories can mention arcs after a
    // resolution, and an arc landed there would never replay. Creation time
    // is always safe.
    const auto fd = first_dep.find(src);
    const Timestamp at = fd != first_dep.end() && open.open_at(src, fd->second)
                             ? fd->second
                             : log.bugs.at(src).created_at;

    std::vector<BugId> pool;
    for (BugId u : ids) {
      if (u != src && open.open_at(u, at)) pool.push_back(u);
    }
    for (std::int64_t i = n; i < want; ++i) {
      bool placed = false;
      for (int attempt = 0; attempt <= 20 && !pool.empty(); ++attempt) {
        const BugId u = pool[rng.uniform_below(static_cast<std::uint64_t>(pool.size()))];
        if (arc_set.count({src, u}) || detail::reaches(adj, u, src)) {
          ++out.stats.redraws;
          continue;
        }
        arc_set.insert({src, u});
        adj[src].push_back(u);
        out.log.events.push_back({at, 0, src, EventKind::Blocks, u, {}});
        ++out.stats.arcs_added;
        placed = true;
        break;
      }
      if (!placed) ++out.stats.arcs_abandoned;
    }
  }

  canonicalize_log(out.log);
  return out;
}

// One row of the severity table: share of reports plus the moments of the
// dependency counts and the mean observed solving time.
struct SeverityProfile {
  Severity severity = Severity::Normal;
  double percent = 0.0;
  double blocks_mu = 0.0;
  double blocks_sigma = 0.0;
  double depends_mu = 0.0;
  double depends_sigma = 0.0;
  double solve_seconds = 0.0;
};

// Firefox tracker statistics (shares in %, solving times converted to
// seconds from d hh:mm:ss).
inline std::vector<SeverityProfile> firefox_profile() {
  return {
      {Severity::Blocker, 0.41, 0.714, 1.254, 0.143, 0.378, 130883.0},
      {Severity::Critical, 5.49, 0.817, 3.210, 2.032, 16.296, 505034.0},
      {Severity::Major, 6.43, 0.477, 1.309, 0.165, 0.553, 483666.0},
      {Severity::Normal, 85.3, 1.017, 1.827, 4.167, 44.139, 478489.0},
      {Severity::Minor, 2.13, 1.139, 3.523, 1.083, 5.823, 738369.0},
      {Severity::Trivial, 0.24, 0.750, 1.500, 0.000, 0.000, 278177.0},
  };
}

struct SampledBug {
  Severity severity = Severity::Normal;
  int blocks = 0;
  int depends_on = 0;
  double solve_seconds = 0.0;
};

namespace detail {

// Gaussian dependency count clamped at zero then rounded to the nearest
// integer. Clamping shifts the mean above mu when mu is near zero; tests
// compare against the analytic cell-sum expectation, not mu itself.
inline int clamped_count(Rng& rng, double mu, double sigma) {
  const double draw = std::max(0.0, rng.normal(mu, sigma));
  return static_cast<int>(std::llround(draw));
}

}  // namespace detail

// Draws `count` synthetic reports: severity by table share, dependency
// counts from the per-severity Gaussians, solving time at the table mean.
// Per bug the generator consumes severity, blocks, depends draws in that
// order, so streams are reproducible for a fixed seed.
inline std::vector<SampledBug> sample_bugs(const std::vector<SeverityProfile>& profile,
                                           std::int64_t count, std::uint64_t seed) {
  if (profile.empty()) throw DataError("sample_bugs needs a non-empty profile");
  double total = 0.0;
  for (const SeverityProfile& row : profile) total += row.percent;
  if (total <= 0.0) throw DataError("sample_bugs needs positive severity shares");

  std::vector<SampledBug> out;
  Rng rng(seed);
  for (std::int64_t i = 0; i < count; ++i) {
    double u = rng.uniform() * total;
    const SeverityProfile* row = &profile.back();
    for (const SeverityProfile& r : profile) {
      if (u < r.percent) {
        row = &r;
        break;
      }
      u -= r.percent;
    }
    SampledBug bug;
    bug.severity = row->severity;
    bug.blocks = detail::clamped_count(rng, row->blocks_mu, row->blocks_sigma);
    bug.depends_on = detail::clamped_count(rng, row->depends_mu, row->depends_sigma);
    bug.solve_seconds = row->solve_seconds;
    out.push_back(bug);
  }
  return out;
}

}  // namespace bdg
