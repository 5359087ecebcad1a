#pragma once

// Directed acyclic dependency graph over open bugs. An arc u -> v means
// u blocks v. Depth (longest ancestor chain ending at a node), out-degree,
// and weakly connected components are maintained incrementally; a full
// recompute path exists as an independent cross-check.

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "bdg/core.hpp"

namespace bdg {

enum class GraphError {
  DuplicateNode,
  MissingEndpoint,
  WouldCreateCycle,
  DuplicateArc,
  MissingNode,
};

inline const char* to_string(GraphError e) {
  switch (e) {
    case GraphError::DuplicateNode: return "duplicate node";
    case GraphError::MissingEndpoint: return "missing endpoint";
    case GraphError::WouldCreateCycle: return "would create cycle";
    case GraphError::DuplicateArc: return "duplicate arc";
    case GraphError::MissingNode: return "missing node";
  }
  return "graph error";
}

struct NodeMetrics {
  int depth = 0;
  int degree = 0;
  BugId component = 0;
};

// Arcs incident to a node at the moment of its removal.
struct DetachedArcs {
  std::vector<BugId> out_targets;  // removed node blocked these
  std::vector<BugId> in_sources;   // these blocked the removed node
};

class DependencyGraph {
 public:
  bool has_node(BugId id) const { return nodes_.count(id) > 0; }
  bool has_arc(BugId from, BugId to) const {
    auto it = nodes_.find(from);
    return it != nodes_.end() && it->second.out.count(to) > 0;
  }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t arc_count() const { return arc_count_; }

  std::optional<GraphError> add_node(BugId id) {
    if (has_node(id)) return GraphError::DuplicateNode;
    nodes_[id] = Node{};
    nodes_[id].comp = id;
    comps_[id] = {id};
    return std::nullopt;
  }

  std::optional<GraphError> add_arc(BugId from, BugId to) {
    auto fi = nodes_.find(from);
    auto ti = nodes_.find(to);
    if (fi == nodes_.end() || ti == nodes_.end()) return GraphError::MissingEndpoint;
    if (fi->second.out.count(to)) return GraphError::DuplicateArc;
    if (from == to || reaches(to, from)) return GraphError::WouldCreateCycle;

    fi->second.out.insert(to);
    ti->second.in.insert(from);
    ++arc_count_;
    merge_components(fi->second.comp, ti->second.comp);

    // Depth can only grow along the new arc; propagate increases forward.
    if (ti->second.depth < fi->second.depth + 1) {
      ti->second.depth = fi->second.depth + 1;
      std::deque<BugId> work{to};
      while (!work.empty()) {
        const BugId x = work.front();
        work.pop_front();
        const int dx = nodes_.at(x).depth;
        for (BugId w : nodes_.at(x).out) {
          Node& nw = nodes_.at(w);
          if (nw.depth < dx + 1) {
            nw.depth = dx + 1;
            work.push_back(w);
          }
        }
      }
    }
    return std::nullopt;
  }

  std::optional<GraphError> remove_node(BugId id, DetachedArcs* detached = nullptr) {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) return GraphError::MissingNode;
    Node node = std::move(it->second);
    if (detached) {
      detached->out_targets.assign(node.out.begin(), node.out.end());
      detached->in_sources.assign(node.in.begin(), node.in.end());
    }
    for (BugId t : node.out) nodes_.at(t).in.erase(id);
    for (BugId s : node.in) nodes_.at(s).out.erase(id);
    arc_count_ -= node.out.size() + node.in.size();
    nodes_.erase(it);

    // Removal can split the component and lower depths; rebuild both for
    // the remaining members of the old component only.
    std::set<BugId> members = comps_.at(node.comp);
    members.erase(id);
    comps_.erase(node.comp);
    repartition(members);
    return std::nullopt;
  }

  int depth(BugId id) const { return node_at(id).depth; }
  int degree(BugId id) const { return static_cast<int>(node_at(id).out.size()); }
  BugId component_of(BugId id) const { return node_at(id).comp; }
  const std::set<BugId>& out_neighbors(BugId id) const { return node_at(id).out; }
  const std::set<BugId>& in_neighbors(BugId id) const { return node_at(id).in; }

  std::vector<BugId> node_ids() const {
    std::vector<BugId> ids;
    ids.reserve(nodes_.size());
    for (const auto& [id, _] : nodes_) ids.push_back(id);
    return ids;
  }

  // Weakly connected components, members ascending, ordered by their
  // smallest member (which is also the component id).
  std::vector<std::vector<BugId>> subgraphs() const {
    std::vector<std::vector<BugId>> out;
    out.reserve(comps_.size());
    for (const auto& [_, members] : comps_) out.emplace_back(members.begin(), members.end());
    return out;
  }

  double mean_subgraph_depth() const {
    if (comps_.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& [_, members] : comps_) {
      int mx = 0;
      for (BugId b : members) mx = std::max(mx, nodes_.at(b).depth);
      sum += mx;
    }
    return sum / static_cast<double>(comps_.size());
  }

  // Max degree (or depth) normalized by n-1, the maximum either can take.
  double max_degree_centrality() const {
    if (nodes_.size() < 2) return 0.0;
    std::size_t mx = 0;
    for (const auto& [_, n] : nodes_) mx = std::max(mx, n.out.size());
    return static_cast<double>(mx) / static_cast<double>(nodes_.size() - 1);
  }

  double max_depth_centrality() const {
    if (nodes_.size() < 2) return 0.0;
    int mx = 0;
    for (const auto& [_, n] : nodes_) mx = std::max(mx, n.depth);
    return static_cast<double>(mx) / static_cast<double>(nodes_.size() - 1);
  }

  struct HitsResult {
    std::map<BugId, double> authority;
    std::map<BugId, double> hub;
    int iterations = 0;
  };

  // Alternating hub/authority power iteration from all-ones, L2-normalized
  // each half step. A graph with no arcs yields all-zero vectors.
  HitsResult hits(double tol = 1e-10, int max_iter = 1000) const {
    HitsResult res;
    const std::vector<BugId> ids = node_ids();
    if (arc_count_ == 0) {
      for (BugId id : ids) {
        res.authority[id] = 0.0;
        res.hub[id] = 0.0;
      }
      return res;
    }
    std::map<BugId, std::size_t> index;
    for (std::size_t i = 0; i < ids.size(); ++i) index[ids[i]] = i;
    std::vector<double> a(ids.size(), 1.0), h(ids.size(), 1.0);
    std::vector<double> na(ids.size()), nh(ids.size());
    for (int iter = 1; iter <= max_iter; ++iter) {
      std::fill(na.begin(), na.end(), 0.0);
      for (std::size_t i = 0; i < ids.size(); ++i) {
        for (BugId t : nodes_.at(ids[i]).out) na[index.at(t)] += h[i];
      }
      normalize(na);
      std::fill(nh.begin(), nh.end(), 0.0);
      for (std::size_t i = 0; i < ids.size(); ++i) {
        for (BugId t : nodes_.at(ids[i]).out) nh[i] += na[index.at(t)];
      }
      normalize(nh);
      double delta = 0.0;
      for (std::size_t i = 0; i < ids.size(); ++i) {
        delta = std::max(delta, std::abs(na[i] - a[i]));
        delta = std::max(delta, std::abs(nh[i] - h[i]));
      }
      a = na;
      h = nh;
      res.iterations = iter;
      if (delta < tol) break;
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
      res.authority[ids[i]] = a[i];
      res.hub[ids[i]] = h[i];
    }
    return res;
  }

  // Mean inverse forward distance to every other node; unreachable pairs
  // contribute zero. Zero for isolated nodes and single-node graphs.
  double harmonic_centrality(BugId id) const {
    node_at(id);  // validate
    if (nodes_.size() < 2) return 0.0;
    std::map<BugId, int> dist;
    dist[id] = 0;
    std::deque<BugId> work{id};
    double sum = 0.0;
    while (!work.empty()) {
      const BugId x = work.front();
      work.pop_front();
      const int dx = dist.at(x);
      for (BugId t : nodes_.at(x).out) {
        if (dist.count(t)) continue;
        dist[t] = dx + 1;
        sum += 1.0 / static_cast<double>(dx + 1);
        work.push_back(t);
      }
    }
    return sum / static_cast<double>(nodes_.size() - 1);
  }

  std::map<BugId, double> harmonic_all() const {
    std::map<BugId, double> out;
    for (const auto& [id, _] : nodes_) out[id] = harmonic_centrality(id);
    return out;
  }

  // Independent full recomputation of every cached metric, used to
  // cross-check the incremental bookkeeping.
  std::map<BugId, NodeMetrics> recompute_all() const {
    std::map<BugId, NodeMetrics> out;
    // Components by undirected traversal, labeled with the smallest member.
    std::set<BugId> seen;
    for (const auto& [id, _] : nodes_) {
      if (seen.count(id)) continue;
      std::vector<BugId> members;
      std::deque<BugId> work{id};
      seen.insert(id);
      while (!work.empty()) {
        const BugId x = work.front();
        work.pop_front();
        members.push_back(x);
        const Node& nx = nodes_.at(x);
        for (BugId t : nx.out) {
          if (seen.insert(t).second) work.push_back(t);
        }
        for (BugId s : nx.in) {
          if (seen.insert(s).second) work.push_back(s);
        }
      }
      const BugId label = *std::min_element(members.begin(), members.end());
      for (BugId m : members) out[m].component = label;
    }
    // Depth by topological relaxation.
    std::map<BugId, int> indeg;
    std::deque<BugId> ready;
    for (const auto& [id, n] : nodes_) {
      indeg[id] = static_cast<int>(n.in.size());
      if (n.in.empty()) ready.push_back(id);
      out[id].degree = static_cast<int>(n.out.size());
    }
    while (!ready.empty()) {
      const BugId x = ready.front();
      ready.pop_front();
      for (BugId t : nodes_.at(x).out) {
        out[t].depth = std::max(out[t].depth, out[x].depth + 1);
        if (--indeg[t] == 0) ready.push_back(t);
      }
    }
    return out;
  }

  bool caches_match_recompute() const {
    const auto fresh = recompute_all();
    if (fresh.size() != nodes_.size()) return false;
    std::size_t arcs = 0;
    for (const auto& [id, n] : nodes_) {
      auto it = fresh.find(id);
      if (it == fresh.end()) return false;
      if (it->second.depth != n.depth || it->second.component != n.comp) return false;
      if (it->second.degree != static_cast<int>(n.out.size())) return false;
      arcs += n.out.size();
    }
    if (arcs != arc_count_) return false;
    // The component member sets must agree with the labels.
    std::map<BugId, std::set<BugId>> grouped;
    for (const auto& [id, m] : fresh) grouped[m.component].insert(id);
    return grouped == comps_;
  }

 private:
  struct Node {
    std::set<BugId> out;
    std::set<BugId> in;
    int depth = 0;
    BugId comp = 0;
  };

  const Node& node_at(BugId id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end()) throw std::out_of_range("no such bug in graph: " + std::to_string(id));
    return it->second;
  }

  bool reaches(BugId from, BugId goal) const {
    std::set<BugId> seen{from};
    std::deque<BugId> work{from};
    while (!work.empty()) {
      const BugId x = work.front();
      work.pop_front();
      if (x == goal) return true;
      for (BugId t : nodes_.at(x).out) {
        if (seen.insert(t).second) work.push_back(t);
      }
    }
    return false;
  }

  void merge_components(BugId a, BugId b) {
    if (a == b) return;
    const BugId keep = std::min(a, b);
    const BugId drop = std::max(a, b);
    std::set<BugId>& into = comps_.at(keep);
    for (BugId m : comps_.at(drop)) {
      nodes_.at(m).comp = keep;
      into.insert(m);
    }
    comps_.erase(drop);
  }

  // Rebuild component labels and depths for `members`, which must be the
  // complete remainder of one former weak component.
  void repartition(const std::set<BugId>& members) {
    std::set<BugId> seen;
    for (BugId start : members) {
      if (seen.count(start)) continue;
      std::vector<BugId> group;
      std::deque<BugId> work{start};
      seen.insert(start);
      while (!work.empty()) {
        const BugId x = work.front();
        work.pop_front();
        group.push_back(x);
        const Node& nx = nodes_.at(x);
        for (BugId t : nx.out) {
          if (seen.insert(t).second) work.push_back(t);
        }
        for (BugId s : nx.in) {
          if (seen.insert(s).second) work.push_back(s);
        }
      }
      const BugId label = *std::min_element(group.begin(), group.end());
      std::set<BugId>& bucket = comps_[label];
      bucket.clear();
      std::map<BugId, int> indeg;
      std::deque<BugId> ready;
      for (BugId m : group) {
        bucket.insert(m);
        Node& nm = nodes_.at(m);
        nm.comp = label;
        nm.depth = 0;
        indeg[m] = static_cast<int>(nm.in.size());
        if (nm.in.empty()) ready.push_back(m);
      }
      while (!ready.empty()) {
        const BugId x = ready.front();
        ready.pop_front();
        for (BugId t : nodes_.at(x).out) {
          Node& nt = nodes_.at(t);
          nt.depth = std::max(nt.depth, nodes_.at(x).depth + 1);
          if (--indeg[t] == 0) ready.push_back(t);
        }
      }
    }
  }

  static void normalize(std::vector<double>& v) {
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (double& x : v) x /= norm;
    }
  }

  std::map<BugId, Node> nodes_;
  std::map<BugId, std::set<BugId>> comps_;  // component id -> members
  std::size_t arc_count_ = 0;
};

}  // namespace bdg
