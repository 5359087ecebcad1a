#pragma once

// Paired one-tailed t-test and the monthly fixed-versus-open attribute
// series it is applied to. The test asks whether the first series runs
// higher than the second; p_upper is the upper-tail probability.

#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bdg/csv.hpp"
#include "bdg/replay.hpp"
#include "bdg/time.hpp"

namespace bdg {

// Every paired difference is zero: the test statistic has no defined value.
class DegenerateSeries : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Continued fraction for the regularized incomplete beta, evaluated with
// the modified Lentz method.
inline double incomplete_beta_cf(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-15;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b).
inline double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * detail::incomplete_beta_cf(a, b, x) / a;
  return 1.0 - bt * detail::incomplete_beta_cf(b, a, 1.0 - x) / b;
}

struct PairedTTest {
  double t = 0.0;
  double p_upper = 1.0;  // P(T >= t) under the null of zero mean difference
  double mean_diff = 0.0;
  double sd_diff = 0.0;
  std::int64_t dof = 0;
};

inline PairedTTest paired_t_test(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw DataError("paired series must have equal length");
  const std::size_t n = xs.size();
  if (n < 2) throw DataError("paired t-test needs at least two pairs");

  std::vector<double> diffs(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    diffs[i] = xs[i] - ys[i];
    mean += diffs[i];
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double d : diffs) ss += (d - mean) * (d - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  PairedTTest r;
  r.dof = static_cast<std::int64_t>(n) - 1;
  r.mean_diff = mean;
  r.sd_diff = sd;
  if (sd == 0.0) {
    if (mean == 0.0) throw DegenerateSeries("all paired differences are zero");
    r.t = mean > 0.0 ? INFINITY : -INFINITY;
    r.p_upper = mean > 0.0 ? 0.0 : 1.0;
    return r;
  }
  r.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  const double nu = static_cast<double>(r.dof);
  const double tail = incomplete_beta(nu / 2.0, 0.5, nu / (nu + r.t * r.t)) / 2.0;
  r.p_upper = r.t >= 0.0 ? tail : 1.0 - tail;
  return r;
}

enum class RqAttribute { Degree, Depth, Severity, Priority };

inline const char* to_string(RqAttribute a) {
  switch (a) {
    case RqAttribute::Degree: return "degree";
    case RqAttribute::Depth: return "depth";
    case RqAttribute::Severity: return "severity";
    case RqAttribute::Priority: return "priority";
  }
  return "degree";
}

inline std::optional<RqAttribute> parse_rq_attribute(const std::string& s) {
  for (RqAttribute a : {RqAttribute::Degree, RqAttribute::Depth, RqAttribute::Severity,
                        RqAttribute::Priority}) {
    if (s == to_string(a)) return a;
  }
  return std::nullopt;
}

struct MonthlySeries {
  std::vector<std::string> months;  // YYYY-MM labels
  std::vector<double> fixed_mean;
  std::vector<double> open_mean;
};

// Monthly comparison of an attribute between bugs fixed during the month
// (valued at the moment of removal) and bugs still open at month end.
// Only months fully inside [from_day, to_day] with activity on both sides
// enter the series.
inline MonthlySeries fixed_vs_open_series(const EventLog& log, DayNumber from_day,
                                          DayNumber to_day, RqAttribute attr) {
  auto fixed_value = [&](const FixedBugSample& s) {
    switch (attr) {
      case RqAttribute::Degree: return static_cast<double>(s.degree);
      case RqAttribute::Depth: return static_cast<double>(s.depth);
      case RqAttribute::Severity: return static_cast<double>(severity_ordinal(s.severity));
      case RqAttribute::Priority: return static_cast<double>(priority_ordinal(s.priority));
    }
    return 0.0;
  };

  ReplayState state(log);
  std::size_t i = 0;
  const auto& events = log.events;
  while (i < events.size() && day_of(events[i].at) < from_day) state.apply(events[i++]);

  std::int64_t m = month_index(from_day);
  if (month_first_day(m) < from_day) ++m;  // skip a leading partial month

  MonthlySeries out;
  for (; month_first_day(m + 1) - 1 <= to_day; ++m) {
    const DayNumber first = month_first_day(m);
    const DayNumber last = month_first_day(m + 1) - 1;
    while (i < events.size() && day_of(events[i].at) <= last) state.apply(events[i++]);

    double fixed_sum = 0.0;
    std::int64_t fixed_n = 0;
    for (const FixedBugSample& s : state.fixed_bugs()) {
      const DayNumber d = day_of(s.fixed_at);
      if (d < first || d > last) continue;
      fixed_sum += fixed_value(s);
      ++fixed_n;
    }

    double open_sum = 0.0;
    std::int64_t open_n = 0;
    for (const auto& [id, rec] : state.open_bugs()) {
      switch (attr) {
        case RqAttribute::Degree: open_sum += state.graph().degree(id); break;
        case RqAttribute::Depth: open_sum += state.graph().depth(id); break;
        case RqAttribute::Severity: open_sum += severity_ordinal(rec.severity); break;
        case RqAttribute::Priority: open_sum += priority_ordinal(rec.priority); break;
      }
      ++open_n;
    }

    if (fixed_n == 0 || open_n == 0) continue;
    out.months.push_back(format_month_index(m));
    out.fixed_mean.push_back(fixed_sum / static_cast<double>(fixed_n));
    out.open_mean.push_back(open_sum / static_cast<double>(open_n));
  }
  return out;
}

inline void write_rq1_csv(const MonthlySeries& s, std::ostream& out) {
  out << "month,fixed_mean,open_mean\r\n";
  for (std::size_t i = 0; i < s.months.size(); ++i) {
    out << csv_row({s.months[i], fmt_f6(s.fixed_mean[i]), fmt_f6(s.open_mean[i])});
  }
}

}  // namespace bdg
