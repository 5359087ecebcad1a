#pragma once

// Bug prioritization strategies and the day-by-day evaluation protocol.
// Each day of the window, a strategy re-ranks the currently open feasible
// bugs and claims as many selection slots as the project actually filled
// that day; comparing selection days with actual assignment days yields
// the early / on-time / late counts and the divergence.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "bdg/csv.hpp"
#include "bdg/replay.hpp"
#include "bdg/rng.hpp"
#include "bdg/textmodel.hpp"

namespace bdg {

enum class StrategyKind {
  MaxDegree,
  MaxDepth,
  DegreePlusDepth,
  MaxSeverity,
  DegreePlusSeverity,
  ChildrensDegree,
  ChildrensSeverity,
  MaxPriority,
  CostOriented,
  EstimatedPriority,
  CostAndPriority,
  Random,
  Actual,
};

inline const char* to_string(StrategyKind s) {
  switch (s) {
    case StrategyKind::MaxDegree: return "max_degree";
    case StrategyKind::MaxDepth: return "max_depth";
    case StrategyKind::DegreePlusDepth: return "degree_plus_depth";
    case StrategyKind::MaxSeverity: return "max_severity";
    case StrategyKind::DegreePlusSeverity: return "degree_plus_severity";
    case StrategyKind::ChildrensDegree: return "childrens_degree";
    case StrategyKind::ChildrensSeverity: return "childrens_severity";
    case StrategyKind::MaxPriority: return "max_priority";
    case StrategyKind::CostOriented: return "cost_oriented";
    case StrategyKind::EstimatedPriority: return "estimated_priority";
    case StrategyKind::CostAndPriority: return "cost_priority";
    case StrategyKind::Random: return "random";
    case StrategyKind::Actual: return "actual";
  }
  return "random";
}

inline std::optional<StrategyKind> parse_strategy(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(StrategyKind::Actual); ++i) {
    if (s == to_string(static_cast<StrategyKind>(i))) return static_cast<StrategyKind>(i);
  }
  return std::nullopt;
}

inline std::vector<StrategyKind> all_strategies() {
  std::vector<StrategyKind> out;
  for (int i = 0; i <= static_cast<int>(StrategyKind::Actual); ++i) {
    out.push_back(static_cast<StrategyKind>(i));
  }
  return out;
}

// Sum of value(u) / e^level(u) over the bug itself (level 0) and all its
// descendants, each counted once at its minimal BFS level.
template <typename ValueFn>
double childrens_score(const DependencyGraph& g, BugId root, ValueFn value) {
  std::map<BugId, int> level;
  level[root] = 0;
  std::vector<BugId> queue{root};
  double total = 0.0;
  for (std::size_t i = 0; i < queue.size(); ++i) {
    const BugId u = queue[i];
    const int l = level.at(u);
    total += value(u) / std::exp(static_cast<double>(l));
    for (BugId t : g.out_neighbors(u)) {
      if (level.emplace(t, l + 1).second) queue.push_back(t);
    }
  }
  return total;
}

// Models shared by the text-driven strategies. Training data is every bug
// resolved before the evaluation window.
struct PriorityModels {
  TfidfVectorizer vectorizer;
  LinearModel priority_clf;  // class c = priority ordinal c + 1 (P5..P1)
  bool has_priority_clf = false;
  TopicModel topics;
  CostModel costs;
  bool has_costs = false;
  double fixing_floor_days = 0.5;
};

inline PriorityModels build_priority_models(const EventLog& log, DayNumber training_end_day,
                                            const TopicModel::Params& lda_params,
                                            std::uint64_t seed = 1) {
  PriorityModels m;
  std::vector<const BugRecord*> training;
  std::vector<BugId> ids;
  for (const auto& [id, _] : log.bugs) ids.push_back(id);
  std::sort(ids.begin(), ids.end());
  for (BugId id : ids) {
    const BugRecord& rec = log.bugs.at(id);
    if (rec.resolved_at && day_of(*rec.resolved_at) < training_end_day) training.push_back(&rec);
  }
  if (training.empty()) throw DataError("no resolved bugs before the evaluation window to train on");

  std::vector<std::string> texts;
  for (const BugRecord* rec : training) texts.push_back(rec->text());
  m.vectorizer.fit(texts);

  std::vector<SparseVec> xs;
  std::vector<int> ys;
  for (const BugRecord* rec : training) {
    if (rec->priority == Priority::Missing) continue;
    xs.push_back(m.vectorizer.transform(rec->text()));
    ys.push_back(priority_ordinal(rec->priority) - 1);
  }
  if (!xs.empty()) {
    m.priority_clf.fit(xs, ys, 5, 20, 1e-4, seed);
    m.has_priority_clf = true;
  }

  m.topics.fit(texts, lda_params);

  std::vector<CostModel::Sample> samples;
  for (const BugRecord* rec : training) {
    if (!rec->assignee || !rec->assigned_at || !rec->resolved_at) continue;
    samples.push_back({*rec->assignee, m.topics.dominant_topic(rec->text()), fixing_days(*rec)});
  }
  if (!samples.empty()) {
    m.costs.fit(samples);
    m.has_costs = true;
  }
  return m;
}

struct PrioritizationParams {
  DayNumber from_day = 0;
  DayNumber to_day = 0;
  StrategyKind strategy = StrategyKind::MaxDegree;
  double alpha = 0.5;  // cost_priority blend
  std::uint64_t seed = 1;
  int repeats = 1;
  // Test hook: monotone transform applied to every strategy score before
  // ranking. Selections must be invariant under it.
  std::function<double(double)> score_transform;
};

struct PrioritizationResult {
  std::string strategy;
  std::int64_t n_assigned = 0;
  double early = 0.0;
  double on_time = 0.0;
  double late = 0.0;
  double divergence_days = 0.0;
};

inline double sample_std(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

namespace detail {

// Per-bug values that do not change during the window.
struct StaticScores {
  std::map<BugId, double> estimated_priority;
  std::map<BugId, double> cost;
};

inline StaticScores precompute_static_scores(const EventLog& log, const std::set<BugId>& universe,
                                             const PriorityModels* models, StrategyKind strategy) {
  StaticScores s;
  const bool needs_priority = strategy == StrategyKind::EstimatedPriority ||
                              strategy == StrategyKind::CostAndPriority;
  const bool needs_cost =
      strategy == StrategyKind::CostOriented || strategy == StrategyKind::CostAndPriority;
  if (!needs_priority && !needs_cost) return s;
  if (!models) throw DataError("strategy requires trained models");
  for (BugId id : universe) {
    const BugRecord* rec = log.find_bug(id);
    if (!rec) continue;
    if (needs_priority) {
      if (!models->has_priority_clf) throw DataError("no priority-labeled training bugs");
      const int cls = models->priority_clf.predict(models->vectorizer.transform(rec->text()));
      s.estimated_priority[id] = static_cast<double>(cls + 1);
    }
    if (needs_cost) {
      if (!models->has_costs) throw DataError("no fixing-time training samples");
      s.cost[id] = models->costs.topic_cost(models->topics.dominant_topic(rec->text()));
    }
  }
  return s;
}

inline std::vector<std::pair<BugId, double>> score_pool(const std::vector<BugId>& pool,
                                                        const ReplayState& state,
                                                        const StaticScores& st,
                                                        StrategyKind strategy, double alpha) {
  const DependencyGraph& g = state.graph();
  const auto& open = state.open_bugs();
  auto severity_of = [&](BugId id) {
    return static_cast<double>(severity_ordinal(open.at(id).severity));
  };
  std::vector<std::pair<BugId, double>> scored;
  scored.reserve(pool.size());

  double max_p = 0.0, min_c = 0.0;
  if (strategy == StrategyKind::CostAndPriority && alpha > 0.0 && alpha < 1.0) {
    bool first = true;
    for (BugId id : pool) {
      max_p = std::max(max_p, st.estimated_priority.at(id));
      const double c = st.cost.at(id);
      min_c = first ? c : std::min(min_c, c);
      first = false;
    }
  }

  for (BugId id : pool) {
    double score = 0.0;
    switch (strategy) {
      case StrategyKind::MaxDegree: score = g.degree(id); break;
      case StrategyKind::MaxDepth: score = g.depth(id); break;
      case StrategyKind::DegreePlusDepth: score = g.degree(id) + g.depth(id); break;
      case StrategyKind::MaxSeverity: score = severity_of(id); break;
      case StrategyKind::DegreePlusSeverity: score = g.degree(id) + severity_of(id); break;
      case StrategyKind::ChildrensDegree:
        score = childrens_score(g, id, [&](BugId u) { return static_cast<double>(g.degree(u)); });
        break;
      case StrategyKind::ChildrensSeverity:
        score = childrens_score(g, id, severity_of);
        break;
      case StrategyKind::MaxPriority:
        score = static_cast<double>(priority_ordinal(open.at(id).priority));
        break;
      case StrategyKind::CostOriented: score = -st.cost.at(id); break;
      case StrategyKind::EstimatedPriority: score = st.estimated_priority.at(id); break;
      case StrategyKind::CostAndPriority:
        // Exact formula limits: pure priority at alpha 1, pure cost at 0.
        if (alpha >= 1.0) {
          score = st.estimated_priority.at(id);
        } else if (alpha <= 0.0) {
          score = -st.cost.at(id);
        } else {
          const double p_term = max_p > 0.0 ? st.estimated_priority.at(id) / max_p : 0.0;
          const double c_term = min_c / st.cost.at(id);
          score = alpha * p_term + (1.0 - alpha) * c_term;
        }
        break;
      case StrategyKind::Random:
      case StrategyKind::Actual:
        break;  // handled outside scoring
    }
    scored.emplace_back(id, score);
  }
  return scored;
}

// Highest score first; ties go to the lowest bug id.
inline std::vector<BugId> select_top(std::vector<std::pair<BugId, double>> scored, std::size_t k) {
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<BugId> out;
  for (std::size_t i = 0; i < scored.size() && i < k; ++i) out.push_back(scored[i].first);
  return out;
}

}  // namespace detail

// Single protocol run. `selections_out`, when given, receives the
// (day, bug) selection sequence in order.
inline PrioritizationResult evaluate_prioritization_once(
    const EventLog& log, const std::set<BugId>& feasible, const PriorityModels* models,
    const PrioritizationParams& params,
    std::vector<std::pair<DayNumber, BugId>>* selections_out = nullptr) {
  // Universe: feasible bugs actually assigned inside the window.
  std::map<BugId, DayNumber> actual_day;
  std::map<DayNumber, std::int64_t> slots_by_day;
  for (BugId id : feasible) {
    const BugRecord* rec = log.find_bug(id);
    if (!rec || !rec->assigned_at) continue;
    const DayNumber d = day_of(*rec->assigned_at);
    if (d < params.from_day || d > params.to_day) continue;
    actual_day[id] = d;
    ++slots_by_day[d];
  }

  std::set<BugId> universe;
  for (const auto& [id, _] : actual_day) universe.insert(id);
  const detail::StaticScores st =
      detail::precompute_static_scores(log, universe, models, params.strategy);

  Rng rng(params.seed);
  ReplayState state(log);
  std::size_t i = 0;
  const auto& events = log.events;
  while (i < events.size() && day_of(events[i].at) < params.from_day) state.apply(events[i++]);

  std::map<BugId, DayNumber> selected_day;
  std::int64_t carry = 0;
  for (DayNumber d = params.from_day; d <= params.to_day; ++d) {
    while (i < events.size() && day_of(events[i].at) == d) state.apply(events[i++]);
    const auto sl = slots_by_day.find(d);
    std::int64_t slots = carry + (sl == slots_by_day.end() ? 0 : sl->second);
    if (slots == 0) continue;

    std::vector<BugId> pool;
    for (BugId id : universe) {
      if (!selected_day.count(id) && state.open_bugs().count(id)) pool.push_back(id);
    }

    std::vector<BugId> picked;
    if (params.strategy == StrategyKind::Actual) {
      for (BugId id : pool) {
        if (actual_day.at(id) == d) picked.push_back(id);
      }
      if (static_cast<std::int64_t>(picked.size()) > slots) picked.resize(slots);
    } else if (params.strategy == StrategyKind::Random) {
      std::vector<BugId> shuffled = pool;
      rng.shuffle(shuffled);
      const std::size_t take = std::min<std::size_t>(shuffled.size(), slots);
      picked.assign(shuffled.begin(), shuffled.begin() + take);
    } else {
      auto scored = detail::score_pool(pool, state, st, params.strategy, params.alpha);
      if (params.score_transform) {
        for (auto& [_, s] : scored) s = params.score_transform(s);
      }
      picked = detail::select_top(std::move(scored), static_cast<std::size_t>(slots));
    }
    for (BugId id : picked) {
      selected_day[id] = d;
      if (selections_out) selections_out->emplace_back(d, id);
    }
    carry = slots - static_cast<std::int64_t>(picked.size());
  }

  PrioritizationResult res;
  res.strategy = to_string(params.strategy);
  res.n_assigned = static_cast<std::int64_t>(universe.size());
  std::vector<double> diffs;
  for (const auto& [id, actual] : actual_day) {
    const auto sel = selected_day.find(id);
    const DayNumber strategy_day = sel == selected_day.end() ? params.to_day : sel->second;
    const double diff = static_cast<double>(strategy_day - actual);
    diffs.push_back(diff);
    if (diff < 0) res.early += 1.0;
    else if (diff == 0) res.on_time += 1.0;
    else res.late += 1.0;
  }
  res.divergence_days = sample_std(diffs);
  return res;
}

// Repeated runs averaged; the seed advances per repeat, which only matters
// for the random strategy.
inline PrioritizationResult evaluate_prioritization(const EventLog& log,
                                                    const std::set<BugId>& feasible,
                                                    const PriorityModels* models,
                                                    const PrioritizationParams& params) {
  const int repeats = std::max(1, params.repeats);
  PrioritizationResult acc;
  for (int r = 0; r < repeats; ++r) {
    PrioritizationParams p = params;
    p.seed = params.seed + static_cast<std::uint64_t>(r);
    const PrioritizationResult one = evaluate_prioritization_once(log, feasible, models, p);
    acc.strategy = one.strategy;
    acc.n_assigned = one.n_assigned;
    acc.early += one.early;
    acc.on_time += one.on_time;
    acc.late += one.late;
    acc.divergence_days += one.divergence_days;
  }
  acc.early /= repeats;
  acc.on_time /= repeats;
  acc.late /= repeats;
  acc.divergence_days /= repeats;
  return acc;
}

inline void write_prioritization_csv(const std::vector<PrioritizationResult>& rows,
                                     std::ostream& out) {
  out << "strategy,n_assigned,early,on_time,late,divergence_days\r\n";
  for (const PrioritizationResult& r : rows) {
    out << csv_row({r.strategy, fmt_int(r.n_assigned), fmt_f6(r.early), fmt_f6(r.on_time),
                    fmt_f6(r.late), fmt_f6(r.divergence_days)});
  }
}

}  // namespace bdg
