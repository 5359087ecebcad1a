#pragma once

// Developer assignment (triage) simulation. Algorithms pick a bug and an
// idle developer each step of each simulated day; a developer stays busy
// until the estimated completion of their current bug. Outcomes are scored
// against release boundaries, component experience, and the actual record.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "bdg/csv.hpp"
#include "bdg/prioritize.hpp"
#include "bdg/replay.hpp"
#include "bdg/rng.hpp"
#include "bdg/textmodel.hpp"

namespace bdg {

enum class TriageAlgorithm { Cbr, CosTriage, Random, Actual };

inline const char* to_string(TriageAlgorithm a) {
  switch (a) {
    case TriageAlgorithm::Cbr: return "cbr";
    case TriageAlgorithm::CosTriage: return "costriage";
    case TriageAlgorithm::Random: return "random";
    case TriageAlgorithm::Actual: return "actual";
  }
  return "cbr";
}

inline std::optional<TriageAlgorithm> parse_triage_algorithm(const std::string& s) {
  for (TriageAlgorithm a : {TriageAlgorithm::Cbr, TriageAlgorithm::CosTriage,
                            TriageAlgorithm::Random, TriageAlgorithm::Actual}) {
    if (s == to_string(a)) return a;
  }
  return std::nullopt;
}

struct TriageModels {
  TfidfVectorizer vectorizer;
  LinearModel assignee_clf;  // one class per developer, indexed into devs
  std::vector<std::string> devs;
  TopicModel topics;
  CostModel costs;
  std::map<std::string, DeveloperProfile> profiles;

  int dev_index(const std::string& dev) const {
    for (std::size_t i = 0; i < devs.size(); ++i) {
      if (devs[i] == dev) return static_cast<int>(i);
    }
    return -1;
  }
};

// Bounded positive score for how well a developer matches a bug: the
// classifier margin squashed through a logistic.
inline double suitability(const TriageModels& m, const SparseVec& x, int dev_idx) {
  return 1.0 / (1.0 + std::exp(-m.assignee_clf.score(x, dev_idx)));
}

// Training set: bugs resolved before `training_end_day` with a recorded
// assignee. `restrict_devs`, when given, drops training bugs assigned
// outside that set (used to train on active developers only).
inline TriageModels build_triage_models(const EventLog& log, DayNumber training_end_day,
                                        const TopicModel::Params& lda_params,
                                        std::uint64_t seed = 1,
                                        const std::set<std::string>* restrict_devs = nullptr) {
  std::vector<BugId> ids;
  for (const auto& [id, _] : log.bugs) ids.push_back(id);
  std::sort(ids.begin(), ids.end());

  std::vector<const BugRecord*> training;
  std::set<std::string> devset;
  for (BugId id : ids) {
    const BugRecord& rec = log.bugs.at(id);
    if (!rec.resolved_at || day_of(*rec.resolved_at) >= training_end_day) continue;
    if (!rec.assignee || !rec.assigned_at) continue;
    if (restrict_devs && !restrict_devs->count(*rec.assignee)) continue;
    training.push_back(&rec);
    devset.insert(*rec.assignee);
  }
  if (training.empty()) throw DataError("no resolved assigned bugs before the window to train on");

  TriageModels m;
  m.devs.assign(devset.begin(), devset.end());

  std::vector<std::string> texts;
  for (const BugRecord* rec : training) texts.push_back(rec->text());
  m.vectorizer.fit(texts);

  std::vector<SparseVec> xs;
  std::vector<int> ys;
  for (const BugRecord* rec : training) {
    xs.push_back(m.vectorizer.transform(rec->text()));
    ys.push_back(m.dev_index(*rec->assignee));
  }
  m.assignee_clf.fit(xs, ys, static_cast<int>(m.devs.size()), 20, 1e-4, seed);

  m.topics.fit(texts, lda_params);

  std::vector<CostModel::Sample> samples;
  for (const BugRecord* rec : training) {
    samples.push_back({*rec->assignee, m.topics.dominant_topic(rec->text()), fixing_days(*rec)});
  }
  m.costs.fit(samples);

  for (const BugRecord* rec : training) {
    DeveloperProfile& p = m.profiles[*rec->assignee];
    p.id = *rec->assignee;
    p.fixes_count += 1;
    p.mean_fixing_days += fixing_days(*rec);
    p.components_fixed.insert(rec->component);
  }
  for (auto& [_, p] : m.profiles) p.mean_fixing_days /= static_cast<double>(p.fixes_count);
  return m;
}

struct TriageParams {
  DayNumber from_day = 0;
  DayNumber to_day = 0;
  TriageAlgorithm algorithm = TriageAlgorithm::Cbr;
  double alpha = 0.5;  // costriage blend between suitability and cost
  std::int64_t release_interval = 28;
  bool substitute_parent = false;
  std::uint64_t seed = 1;
  int repeats = 1;
};

struct TriageAssignment {
  BugId bug = 0;
  std::string developer;
  DayNumber day = 0;
  double cost = 0.0;        // estimated fixing days (actual for "actual")
  double completion = 0.0;  // day the developer becomes free again
  bool infeasible = false;  // bug was still blocked when assigned
  std::optional<BugId> substituted_for;  // original pick when a parent was assigned instead
};

struct TriageRow {
  std::string algorithm;
  double n_assigned = 0.0;
  double mean_fixing_days = 0.0;
  double n_developers = 0.0;
  double concentration_mean = 0.0;
  double concentration_std = 0.0;
  double accuracy_pct = 0.0;
  double overdue_pct = 0.0;
  double infeasible_pct = 0.0;
};

// Mean and sample standard deviation of per-developer assignment counts.
inline std::pair<double, double> task_concentration(const std::vector<std::int64_t>& counts) {
  if (counts.empty()) return {0.0, 0.0};
  std::vector<double> xs(counts.begin(), counts.end());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  return {mean, sample_std(xs)};
}

// First release boundary strictly after `assign_day`; releases fall every
// `interval` days counted from the window start.
inline double next_release_boundary(DayNumber from_day, std::int64_t interval,
                                    DayNumber assign_day) {
  const std::int64_t k = (assign_day - from_day) / interval + 1;
  return static_cast<double>(from_day + k * interval);
}

// Developer choice for an already-picked bug. `suit` and `cost` run
// parallel to `candidates`. Alpha blends suitability (normalized by the
// best available) against cost (normalized by the cheapest); outside (0,1)
// the pure rules apply exactly, with ties keeping the earliest candidate.
inline int costriage_pick_dev(const std::vector<int>& candidates, const std::vector<double>& suit,
                              const std::vector<double>& cost, double alpha) {
  std::size_t best_i = 0;
  if (alpha >= 1.0) {
    for (std::size_t i = 1; i < candidates.size(); ++i) {
      if (suit[i] > suit[best_i]) best_i = i;
    }
  } else if (alpha <= 0.0) {
    for (std::size_t i = 1; i < candidates.size(); ++i) {
      if (cost[i] < cost[best_i]) best_i = i;
    }
  } else {
    double max_s = 0.0, min_c = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      max_s = std::max(max_s, suit[i]);
      min_c = i == 0 ? cost[i] : std::min(min_c, cost[i]);
    }
    double best = -1.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const double s_term = max_s > 0.0 ? suit[i] / max_s : 0.0;
      const double c_term = cost[i] > 0.0 ? min_c / cost[i] : 1.0;
      const double blended = alpha * s_term + (1.0 - alpha) * c_term;
      if (blended > best) {
        best = blended;
        best_i = i;
      }
    }
  }
  return candidates[best_i];
}

namespace detail {

struct BugFeatures {
  SparseVec x;
  int topic = -1;
};

inline const BugFeatures& features_of(std::map<BugId, BugFeatures>& cache,
                                      const TriageModels& m, const EventLog& log, BugId id) {
  auto it = cache.find(id);
  if (it != cache.end()) return it->second;
  const BugRecord* rec = log.find_bug(id);
  BugFeatures f;
  if (rec) {
    f.x = m.vectorizer.transform(rec->text());
    f.topic = m.topics.dominant_topic(rec->text());
  }
  return cache.emplace(id, std::move(f)).first->second;
}

}  // namespace detail

inline TriageRow summarize_triage(const std::vector<TriageAssignment>& assignments,
                                  const EventLog& log, const TriageModels& models,
                                  const TriageParams& params) {
  TriageRow row;
  row.algorithm = to_string(params.algorithm);
  row.n_assigned = static_cast<double>(assignments.size());
  if (assignments.empty()) return row;

  std::map<std::string, std::int64_t> per_dev;
  std::int64_t accurate = 0, overdue = 0, infeasible = 0;
  double fixing_sum = 0.0;
  for (const TriageAssignment& a : assignments) {
    per_dev[a.developer] += 1;
    fixing_sum += a.completion - static_cast<double>(a.day) + 1.0;
    if (a.infeasible) ++infeasible;
    if (a.completion > next_release_boundary(params.from_day, params.release_interval, a.day)) {
      ++overdue;
    }
    const BugRecord* rec = log.find_bug(a.bug);
    const auto prof = models.profiles.find(a.developer);
    if (rec && prof != models.profiles.end() &&
        prof->second.components_fixed.count(rec->component)) {
      ++accurate;
    }
  }
  const double n = row.n_assigned;
  row.mean_fixing_days = fixing_sum / n;
  row.n_developers = static_cast<double>(per_dev.size());
  std::vector<std::int64_t> counts;
  for (const auto& [_, c] : per_dev) counts.push_back(c);
  const auto [cmean, cstd] = task_concentration(counts);
  row.concentration_mean = cmean;
  row.concentration_std = cstd;
  row.accuracy_pct = 100.0 * static_cast<double>(accurate) / n;
  row.overdue_pct = 100.0 * static_cast<double>(overdue) / n;
  row.infeasible_pct = 100.0 * static_cast<double>(infeasible) / n;
  return row;
}

inline TriageRow run_triage_once(const EventLog& log, const std::set<BugId>& feasible,
                                 const TriageModels& models, const TriageParams& params,
                                 std::vector<TriageAssignment>* assignments_out = nullptr) {
  // Universe: feasible bugs actually assigned inside the window.
  std::map<BugId, DayNumber> actual_day;
  for (BugId id : feasible) {
    const BugRecord* rec = log.find_bug(id);
    if (!rec || !rec->assigned_at) continue;
    const DayNumber d = day_of(*rec->assigned_at);
    if (d >= params.from_day && d <= params.to_day) actual_day[id] = d;
  }

  Rng rng(params.seed);
  ReplayState state(log);
  std::size_t i = 0;
  const auto& events = log.events;
  while (i < events.size() && day_of(events[i].at) < params.from_day) state.apply(events[i++]);

  std::map<BugId, detail::BugFeatures> feature_cache;
  std::vector<TriageAssignment> assignments;
  std::map<int, double> busy_until;  // dev index -> completion day
  std::set<BugId> taken;

  for (DayNumber d = params.from_day; d <= params.to_day; ++d) {
    while (i < events.size() && day_of(events[i].at) == d) state.apply(events[i++]);

    if (params.algorithm == TriageAlgorithm::Actual) {
      for (const auto& [id, ad] : actual_day) {
        if (ad != d) continue;
        const BugRecord& rec = *log.find_bug(id);
        TriageAssignment a;
        a.bug = id;
        a.developer = rec.assignee.value_or("");
        a.day = d;
        a.completion = rec.resolved_at ? static_cast<double>(day_of(*rec.resolved_at))
                                       : static_cast<double>(d + 1);
        a.cost = a.completion - static_cast<double>(d) + 1.0;
        a.infeasible = state.graph().has_node(id) && !state.graph().in_neighbors(id).empty();
        assignments.push_back(std::move(a));
      }
      continue;
    }

    std::vector<BugId> pool;
    for (const auto& [id, _] : actual_day) {
      if (!taken.count(id) && state.open_bugs().count(id)) pool.push_back(id);
    }

    std::vector<int> idle;
    for (std::size_t di = 0; di < models.devs.size(); ++di) {
      const auto b = busy_until.find(static_cast<int>(di));
      if (b == busy_until.end() || b->second <= static_cast<double>(d)) {
        idle.push_back(static_cast<int>(di));
      }
    }

    while (!idle.empty() && !pool.empty()) {
      BugId pick = pool.front();
      int dev = idle.front();
      if (params.algorithm == TriageAlgorithm::Cbr) {
        double best = -1.0;
        for (BugId b : pool) {
          const auto& f = detail::features_of(feature_cache, models, log, b);
          for (int di : idle) {
            const double s = suitability(models, f.x, di);
            if (s > best) {
              best = s;
              pick = b;
              dev = di;
            }
          }
        }
      } else if (params.algorithm == TriageAlgorithm::CosTriage) {
        // Stage one: the bug some idle developer suits best.
        double best = -1.0;
        for (BugId b : pool) {
          const auto& f = detail::features_of(feature_cache, models, log, b);
          double m = -1.0;
          for (int di : idle) m = std::max(m, suitability(models, f.x, di));
          if (m > best) {
            best = m;
            pick = b;
          }
        }
        // Stage two: developer for that bug, trading suitability against
        // estimated cost.
        const auto& f = detail::features_of(feature_cache, models, log, pick);
        std::vector<double> suits, costs;
        for (int di : idle) {
          suits.push_back(suitability(models, f.x, di));
          costs.push_back(models.costs.cost(models.devs[di], f.topic));
        }
        dev = costriage_pick_dev(idle, suits, costs, params.alpha);
      } else {  // Random
        pick = pool[rng.uniform_below(pool.size())];
        dev = idle[rng.uniform_below(idle.size())];
      }

      // The flag records that the pick itself was blocked, whether or not a
      // parent gets assigned in its place.
      const bool pick_blocked = !state.graph().in_neighbors(pick).empty();

      // Walk to the root blocker and assign it instead. A blocked bug is
      // never assigned while substitution is on: when the root is already
      // claimed the pick is shelved for today and the algorithm chooses
      // again from the remaining pool.
      BugId target = pick;
      std::optional<BugId> substituted;
      if (params.substitute_parent && pick_blocked) {
        BugId cur = pick;
        while (!state.graph().in_neighbors(cur).empty()) {
          cur = *state.graph().in_neighbors(cur).begin();
        }
        if (taken.count(cur)) {
          pool.erase(std::find(pool.begin(), pool.end(), pick));
          continue;
        }
        target = cur;
        substituted = pick;
      }

      const auto& tf = detail::features_of(feature_cache, models, log, target);
      TriageAssignment a;
      a.bug = target;
      a.developer = models.devs[static_cast<std::size_t>(dev)];
      a.day = d;
      a.cost = models.costs.cost(a.developer, tf.topic);
      a.completion = static_cast<double>(d) + a.cost;
      a.infeasible = pick_blocked;
      a.substituted_for = substituted;
      busy_until[dev] = a.completion;
      taken.insert(target);
      assignments.push_back(std::move(a));

      idle.erase(std::find(idle.begin(), idle.end(), dev));
      const auto p = std::find(pool.begin(), pool.end(), target);
      if (p != pool.end()) pool.erase(p);
    }
  }

  if (assignments_out) *assignments_out = assignments;
  return summarize_triage(assignments, log, models, params);
}

// Repeats averaged; the seed advances per repeat, which only matters for
// the random algorithm.
inline TriageRow run_triage(const EventLog& log, const std::set<BugId>& feasible,
                            const TriageModels& models, const TriageParams& params) {
  const int repeats = std::max(1, params.repeats);
  TriageRow acc;
  for (int r = 0; r < repeats; ++r) {
    TriageParams p = params;
    p.seed = params.seed + static_cast<std::uint64_t>(r);
    const TriageRow one = run_triage_once(log, feasible, models, p);
    acc.algorithm = one.algorithm;
    acc.n_assigned += one.n_assigned;
    acc.mean_fixing_days += one.mean_fixing_days;
    acc.n_developers += one.n_developers;
    acc.concentration_mean += one.concentration_mean;
    acc.concentration_std += one.concentration_std;
    acc.accuracy_pct += one.accuracy_pct;
    acc.overdue_pct += one.overdue_pct;
    acc.infeasible_pct += one.infeasible_pct;
  }
  const double k = static_cast<double>(repeats);
  acc.n_assigned /= k;
  acc.mean_fixing_days /= k;
  acc.n_developers /= k;
  acc.concentration_mean /= k;
  acc.concentration_std /= k;
  acc.accuracy_pct /= k;
  acc.overdue_pct /= k;
  acc.infeasible_pct /= k;
  return acc;
}

inline void write_triage_csv(const std::vector<TriageRow>& rows, std::ostream& out) {
  out << "algorithm,n_assigned,mean_fixing_days,n_developers,concentration_mean,"
         "concentration_std,accuracy_pct,overdue_pct,infeasible_pct\r\n";
  for (const TriageRow& r : rows) {
    out << csv_row({r.algorithm, fmt_f6(r.n_assigned), fmt_f6(r.mean_fixing_days),
                    fmt_f6(r.n_developers), fmt_f6(r.concentration_mean),
                    fmt_f6(r.concentration_std), fmt_f6(r.accuracy_pct), fmt_f6(r.overdue_pct),
                    fmt_f6(r.infeasible_pct)});
  }
}

}  // namespace bdg
