#pragma once

// Shared fixtures and independent oracles for the test suite. Oracles here
// deliberately use naive dense algorithms so they share no code with the
// incremental implementations they check.

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "bdg/core.hpp"
#include "bdg/graph.hpp"
#include "bdg/rng.hpp"
#include "bdg/time.hpp"

namespace bdg::testing {

// Nine bugs, arcs 1->3, 3->6, 1->4, 4->6, 2->4, 7->8; bugs 5 and 9 isolated.
inline DependencyGraph make_reference_graph() {
  DependencyGraph g;
  for (BugId b = 1; b <= 9; ++b) g.add_node(b);
  g.add_arc(1, 3);
  g.add_arc(3, 6);
  g.add_arc(1, 4);
  g.add_arc(4, 6);
  g.add_arc(2, 4);
  g.add_arc(7, 8);
  return g;
}

struct DenseDag {
  int n = 0;
  std::vector<std::vector<int>> adj;  // adj[i][j] == 1 when arc i -> j
  DependencyGraph graph;              // same structure, node ids 1..n
};

// Random DAG: arcs only from lower to higher index, so acyclic by
// construction. Edge probability is drawn per graph to vary density.
inline DenseDag random_dag(Rng& rng, int max_nodes) {
  DenseDag d;
  d.n = 2 + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(max_nodes - 1)));
  d.adj.assign(d.n, std::vector<int>(d.n, 0));
  for (int i = 0; i < d.n; ++i) d.graph.add_node(i + 1);
  const double p = 0.05 + 0.4 * rng.uniform();
  for (int i = 0; i < d.n; ++i) {
    for (int j = i + 1; j < d.n; ++j) {
      if (rng.uniform() < p) {
        d.adj[i][j] = 1;
        d.graph.add_arc(i + 1, j + 1);
      }
    }
  }
  return d;
}

// Principal eigenvector of A^T A by plain dense power iteration.
inline std::vector<double> oracle_hits_authority(const std::vector<std::vector<int>>& adj,
                                                 int iters = 10000) {
  const int n = static_cast<int>(adj.size());
  std::vector<double> a(n, 1.0), next(n);
  for (int it = 0; it < iters; ++it) {
    // next = A^T A a
    std::vector<double> h(n, 0.0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (adj[i][j]) h[i] += a[j];
      }
    }
    std::fill(next.begin(), next.end(), 0.0);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (adj[i][j]) next[j] += h[i];
      }
    }
    double norm = 0.0;
    for (double x : next) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) return next;
    for (double& x : next) x /= norm;
    a = next;
  }
  return a;
}

// Rayleigh quotient of A^T A at vector a.
inline double oracle_dominant_eigenvalue(const std::vector<std::vector<int>>& adj,
                                         const std::vector<double>& a) {
  const int n = static_cast<int>(adj.size());
  std::vector<double> h(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (adj[i][j]) h[i] += a[j];
    }
  }
  std::vector<double> m(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (adj[i][j]) m[j] += h[i];
    }
  }
  double num = 0.0, den = 0.0;
  for (int i = 0; i < n; ++i) {
    num += a[i] * m[i];
    den += a[i] * a[i];
  }
  return den == 0.0 ? 0.0 : num / den;
}

// All-pairs shortest forward distances by Floyd-Warshall; -1 = unreachable.
inline std::vector<std::vector<int>> oracle_apsp(const std::vector<std::vector<int>>& adj) {
  const int n = static_cast<int>(adj.size());
  const int inf = 1 << 28;
  std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
  for (int i = 0; i < n; ++i) {
    d[i][i] = 0;
    for (int j = 0; j < n; ++j) {
      if (adj[i][j]) d[i][j] = 1;
    }
  }
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
      }
    }
  }
  for (auto& row : d) {
    for (int& x : row) {
      if (x >= inf) x = -1;
    }
  }
  return d;
}

inline double oracle_harmonic(const std::vector<std::vector<int>>& dist, int i) {
  const int n = static_cast<int>(dist.size());
  if (n < 2) return 0.0;
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    if (j != i && dist[i][j] > 0) sum += 1.0 / dist[i][j];
  }
  return sum / (n - 1);
}

// Applies a random add-node / add-arc / remove-node operation; rejected
// operations (cycles, duplicates) are part of the exercise.
inline void random_graph_op(DependencyGraph& g, Rng& rng, BugId max_id) {
  const std::uint64_t roll = rng.uniform_below(100);
  const BugId a = 1 + static_cast<BugId>(rng.uniform_below(static_cast<std::uint64_t>(max_id)));
  const BugId b = 1 + static_cast<BugId>(rng.uniform_below(static_cast<std::uint64_t>(max_id)));
  if (roll < 30) {
    g.add_node(a);
  } else if (roll < 85) {
    g.add_arc(a, b);
  } else {
    g.remove_node(a);
  }
}

inline std::string source_dir() {
  const char* env = std::getenv("BDG_SOURCE_DIR");
  return env ? env : ".";
}

// Small chronological log builder. Events within a day keep insertion
// order via seq; master records carry the actual assignment/resolution
// fields the evaluation protocols read.
struct LogBuilder {
  EventLog log;
  int seq = 0;

  static Timestamp at_day(DayNumber d) { return day_start(d) + 3600; }

  LogBuilder& bug(BugId id, DayNumber created, Severity sev = Severity::Normal,
                  Priority pri = Priority::P3, const std::string& summary = "a bug",
                  const std::string& description = "", const std::string& component = "comp") {
    BugRecord r;
    r.id = id;
    r.created_at = at_day(created);
    r.component = component;
    r.product = "prod";
    r.summary = summary;
    r.description = description;
    r.severity = sev;
    r.priority = pri;
    log.bugs[id] = r;
    log.events.push_back({at_day(created), seq++, id, EventKind::Introduced, {}, {}});
    return *this;
  }

  LogBuilder& blocks(BugId src, BugId dst, DayNumber d) {
    log.events.push_back({at_day(d), seq++, src, EventKind::Blocks, dst, {}});
    return *this;
  }

  LogBuilder& assigned(BugId id, DayNumber d, const std::string& dev = "dev") {
    log.events.push_back({at_day(d), seq++, id, EventKind::Assigned, {}, dev});
    log.bugs[id].assignee = dev;
    log.bugs[id].assigned_at = at_day(d);
    return *this;
  }

  LogBuilder& resolved(BugId id, DayNumber d) {
    log.events.push_back({at_day(d), seq++, id, EventKind::Resolved, {}, {}});
    log.bugs[id].resolved_at = at_day(d);
    log.bugs[id].status = BugStatus::Resolved;
    return *this;
  }

  EventLog& done() {
    sort_log(log);
    return log;
  }
};

}  // namespace bdg::testing
