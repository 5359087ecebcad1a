// Regenerates the bundled demo corpus: a deterministic 60-day tracker
// extract shaped like raw REST payloads (bugs.jsonl + history.jsonl).
// Fixed seed, no clock access, so the output is byte-stable; the checked-in
// copy under data/demo and the golden CSVs derive from it.
//
// Shape goals: a dependency-rich graph (arc count well above five times the
// number of arc-free bugs), an unbroken stream of assignments and fixes
// through both months so models can train on the first month and evaluate
// on the second, plus small doses of the messy cases the normalizer has to
// absorb: duplicates, enhancements, a pre-window arc, reopens, an outlier
// fixing time, and a nearly idle developer.

#include <cstdio>
#include <string>
#include <vector>

#include "bdg/ingest.hpp"
#include "bdg/rng.hpp"
#include "bdg/time.hpp"

using namespace bdg;

namespace {

const DayNumber kEpoch = days_from_civil(2021, 1, 1);

Timestamp at(DayNumber day_offset, int hour, int minute = 0) {
  return day_start(kEpoch + day_offset) + hour * 3600 + minute * 60;
}

struct Theme {
  const char* component;
  std::vector<const char*> words;
  std::vector<const char*> devs;
};

const std::vector<Theme>& themes() {
  static const std::vector<Theme> t = {
      {"render",
       {"pixel", "shader", "texture", "glitch", "canvas", "frame", "artifact", "viewport"},
       {"ana", "boris"}},
      {"network",
       {"socket", "timeout", "request", "packet", "proxy", "retry", "handshake", "stream"},
       {"chen", "dara"}},
      {"storage",
       {"index", "cache", "journal", "record", "compaction", "snapshot", "durability", "flush"},
       {"emil", "freya"}},
      {"ui",
       {"dialog", "toolbar", "focus", "shortcut", "layout", "scroll", "widget", "menu"},
       {"goran", "hana"}},
  };
  return t;
}

std::string pick_words(Rng& rng, const Theme& theme, int n) {
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (!out.empty()) out += ' ';
    out += theme.words[rng.uniform_below(theme.words.size())];
  }
  return out;
}

const char* pick_severity(Rng& rng) {
  const std::uint64_t roll = rng.uniform_below(100);
  if (roll < 55) return "normal";
  if (roll < 70) return "major";
  if (roll < 80) return "minor";
  if (roll < 92) return "critical";
  if (roll < 97) return "blocker";
  return "trivial";
}

const char* pick_priority(Rng& rng) {
  const std::uint64_t roll = rng.uniform_below(100);
  if (roll < 12) return "--";
  if (roll < 30) return "P1";
  if (roll < 55) return "P2";
  if (roll < 80) return "P3";
  if (roll < 92) return "P4";
  return "P5";
}

}  // namespace

int main(int argc, char** argv) {
  const std::string out_dir = argc > 1 ? argv[1] : "data/demo";
  Rng rng(987654321);

  RawCorpus corpus;
  std::vector<RawHistory> histories(220 + 1);
  for (std::size_t i = 0; i < histories.size(); ++i) histories[i].id = static_cast<BugId>(i);

  std::vector<DayNumber> created(201, 0);
  std::vector<int> theme_of(201, 0);

  // Main population: 200 bugs over 60 days, ids in creation order.
  for (BugId id = 1; id <= 200; ++id) {
    const DayNumber day = (id - 1) * 60 / 200;
    created[id] = day;
    const int theme_idx = static_cast<int>(rng.uniform_below(themes().size()));
    theme_of[id] = theme_idx;
    const Theme& theme = themes()[theme_idx];

    RawBug b;
    b.id = id;
    b.component = theme.component;
    b.product = "demo";
    b.summary = pick_words(rng, theme, 4);
    b.description = pick_words(rng, theme, 9);
    b.severity = pick_severity(rng);
    b.priority = pick_priority(rng);
    b.creation_time = at(day, 8 + static_cast<int>(id % 8));

    const std::uint64_t n_comments = rng.uniform_below(5);
    for (std::uint64_t c = 0; c < n_comments; ++c) {
      b.comments.push_back(b.creation_time + 3600 * (1 + static_cast<Timestamp>(c) * 7));
    }
    b.comment_count = static_cast<std::int64_t>(b.comments.size());

    corpus.bugs.push_back(b);
  }

  // Dependencies: roughly two outgoing arcs per source on average, with a
  // third of the population arc-free. Targets are later creations, so the
  // graph is acyclic by id order. A mix of channels exercises the
  // normalizer: blocks history on the source, depends_on history on the
  // target, or the snapshot list only.
  std::int64_t arcs = 0;
  for (BugId src = 1; src <= 200; ++src) {
    const std::uint64_t shape = rng.uniform_below(10);
    const std::uint64_t out_deg = shape < 3 ? 0 : shape < 5 ? 1 : shape < 7 ? 2 : shape - 4;
    std::set<BugId> chosen;
    for (std::uint64_t k = 0; k < out_deg; ++k) {
      if (src >= 195) break;
      const BugId dst =
          src + 1 + static_cast<BugId>(rng.uniform_below(std::min<std::uint64_t>(40, 200 - src)));
      if (!chosen.insert(dst).second) continue;
      ++arcs;
      const Timestamp when = at(created[dst], 20, static_cast<int>(src % 60));
      const std::uint64_t channel = rng.uniform_below(100);
      RawBug& source_bug = corpus.bugs[src - 1];
      if (channel < 55) {
        histories[src].entries.push_back(
            {when, "triager", {{"blocks", std::to_string(dst), ""}}});
      } else if (channel < 80) {
        histories[dst].entries.push_back(
            {when, "triager", {{"depends_on", std::to_string(src), ""}}});
      } else {
        source_bug.blocks.push_back(dst);
      }
    }
  }

  // Assignments and fixes. Roughly 70% assigned a few days after creation,
  // mostly to the component owners; 80% of those get fixed after 2..12
  // days when the range fits the window.
  std::vector<const char*> all_devs;
  for (const Theme& t : themes()) {
    for (const char* d : t.devs) all_devs.push_back(d);
  }

  for (BugId id = 1; id <= 200; ++id) {
    if (rng.uniform_below(100) >= 70) continue;
    const Theme& theme = themes()[theme_of[id]];
    const char* dev = rng.uniform_below(100) < 80
                          ? theme.devs[rng.uniform_below(theme.devs.size())]
                          : all_devs[rng.uniform_below(all_devs.size())];
    // "ivy" fixes exactly one bug all quarter: below the activity cutoff.
    if (id == 120) dev = "ivy";

    const DayNumber assign_day = created[id] + 1 + static_cast<DayNumber>(rng.uniform_below(5));
    if (assign_day > 59) continue;
    RawBug& b = corpus.bugs[id - 1];
    b.assigned_to = dev;
    b.status = "ASSIGNED";
    histories[id].entries.push_back(
        {at(assign_day, 10, static_cast<int>(id % 60)), dev, {{"assigned_to", dev, ""}}});

    if (rng.uniform_below(100) >= 80) continue;
    DayNumber fixing = 2 + static_cast<DayNumber>(rng.uniform_below(11));
    if (id == 57 || id == 102) fixing = 45;  // outliers past the Q3 + 1.5 IQR fence
    const DayNumber resolve_day = assign_day + fixing - 1;
    if (resolve_day > 59) continue;

    Timestamp resolved_at = at(resolve_day, 17, static_cast<int>(id % 60));
    histories[id].entries.push_back(
        {resolved_at, dev, {{"status", "RESOLVED", "ASSIGNED"}}});

    // A handful reopen and get fixed a second time.
    if (id % 37 == 0 && resolve_day + 4 <= 59) {
      histories[id].entries.push_back(
          {at(resolve_day + 2, 9), "triager", {{"status", "REOPENED", "RESOLVED"}}});
      resolved_at = at(resolve_day + 4, 16);
      histories[id].entries.push_back(
          {resolved_at, dev, {{"status", "RESOLVED", "REOPENED"}}});
    }
    b.status = "RESOLVED";
    b.resolution = "FIXED";
    b.cf_last_resolved = resolved_at;
  }

  // Messy tail: duplicates folding into early bugs (with an arc each that
  // the original inherits), enhancement requests the normalizer drops, and
  // an ancient pair whose mutual arc predates the window entirely.
  for (BugId id = 201; id <= 205; ++id) {
    const BugId target = (id - 200) * 9;
    const Theme& theme = themes()[theme_of[target]];
    RawBug b;
    b.id = id;
    b.component = theme.component;
    b.product = "demo";
    b.summary = pick_words(rng, theme, 6) + " duplicate report with extra detail";
    b.description = pick_words(rng, theme, 12);
    b.severity = "normal";
    b.priority = "P2";
    b.creation_time = at(created[target] + 1, 12);
    b.dupe_of = target;
    b.comment_count = 1;
    b.comments.push_back(b.creation_time + 7200);
    corpus.bugs.push_back(b);
    histories[id].entries.push_back({at(created[target] + 2, 13),
                                     "triager",
                                     {{"blocks", std::to_string(target + 1), ""}}});
  }
  for (BugId id = 206; id <= 208; ++id) {
    RawBug b;
    b.id = id;
    b.component = "ui";
    b.product = "demo";
    b.summary = "please add a preference toggle number " + std::to_string(id);
    b.description = "feature request, not a defect";
    b.severity = "enhancement";
    b.priority = "P5";
    b.creation_time = at(30, 11);
    corpus.bugs.push_back(b);
  }
  for (BugId id = 209; id <= 210; ++id) {
    RawBug b;
    b.id = id;
    b.component = "storage";
    b.product = "demo";
    b.summary = "legacy compaction stall " + std::to_string(id);
    b.description = "carried over from the previous quarter";
    b.severity = "major";
    b.priority = "P3";
    b.creation_time = at(-17, 9);
    corpus.bugs.push_back(b);
  }
  histories[209].entries.push_back(
      {at(-15, 10), "triager", {{"blocks", "210", ""}}});

  for (RawHistory& h : histories) {
    if (!h.entries.empty()) corpus.histories.push_back(h);
  }

  save_raw_dir(corpus, out_dir);
  std::printf("bugs=%zu histories=%zu arcs=%lld out=%s\n", corpus.bugs.size(),
              corpus.histories.size(), static_cast<long long>(arcs), out_dir.c_str());
  return 0;
}
