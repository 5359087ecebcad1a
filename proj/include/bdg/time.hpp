#pragma once

// Civil-time helpers on UTC epoch seconds. libstdc++ 11 lacks usable
// chrono calendar support, so date math is done directly.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>

namespace bdg {

using Timestamp = std::int64_t;  // seconds since 1970-01-01T00:00:00Z
using DayNumber = std::int64_t;  // days since 1970-01-01, UTC

constexpr std::int64_t kSecondsPerDay = 86400;

// Days since epoch for a civil date. Valid for the proleptic Gregorian
// calendar; y is the full year (e.g. 2021).
constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct CivilDate {
  std::int64_t year;
  unsigned month;
  unsigned day;
};

constexpr CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return {y + (m <= 2), m, d};
}

inline DayNumber day_of(Timestamp ts) {
  // Floor division; pre-epoch timestamps round toward earlier days.
  return ts >= 0 ? ts / kSecondsPerDay : (ts - kSecondsPerDay + 1) / kSecondsPerDay;
}

inline Timestamp day_start(DayNumber day) { return day * kSecondsPerDay; }
inline Timestamp day_end(DayNumber day) { return day * kSecondsPerDay + kSecondsPerDay - 1; }

inline std::string format_date(DayNumber day) {
  const CivilDate c = civil_from_days(day);
  char buf[48];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02u", static_cast<long long>(c.year), c.month, c.day);
  return buf;
}

inline std::string format_month(DayNumber day) {
  const CivilDate c = civil_from_days(day);
  char buf[24];
  std::snprintf(buf, sizeof buf, "%04lld-%02u", static_cast<long long>(c.year), c.month);
  return buf;
}

// Index usable for month arithmetic and pairing: year*12 + (month-1).
inline std::int64_t month_index(DayNumber day) {
  const CivilDate c = civil_from_days(day);
  return c.year * 12 + (c.month - 1);
}

inline DayNumber month_first_day(std::int64_t month_idx) {
  return days_from_civil(month_idx / 12, static_cast<unsigned>(month_idx % 12) + 1, 1);
}

inline std::string format_month_index(std::int64_t month_idx) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%04d-%02d", static_cast<int>(month_idx / 12),
                static_cast<int>(month_idx % 12 + 1));
  return buf;
}

inline std::string format_rfc3339(Timestamp ts) {
  const DayNumber day = day_of(ts);
  const CivilDate c = civil_from_days(day);
  const int rem = static_cast<int>(ts - day_start(day));
  char buf[48];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<long long>(c.year), c.month, c.day, rem / 3600, rem / 60 % 60,
                rem % 60);
  return buf;
}

// Accepts "YYYY-MM-DD", "YYYY-MM-DDTHH:MM:SS[.frac][Z|+HH:MM|-HH:MM]".
// Fractional seconds are truncated. A bare date means midnight UTC.
inline std::optional<Timestamp> parse_rfc3339(const std::string& s) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  int n = 0;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2d%n", &y, &mo, &d, &n) != 3) return std::nullopt;
  if (mo < 1 || mo > 12 || d < 1 || d > 31) return std::nullopt;
  std::size_t pos = static_cast<std::size_t>(n);
  std::int64_t offset = 0;
  if (pos < s.size()) {
    if (s[pos] != 'T' && s[pos] != 't' && s[pos] != ' ') return std::nullopt;
    ++pos;
    if (std::sscanf(s.c_str() + pos, "%2d:%2d:%2d%n", &h, &mi, &sec, &n) != 3) return std::nullopt;
    pos += static_cast<std::size_t>(n);
    if (h > 23 || mi > 59 || sec > 60) return std::nullopt;
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
    }
    if (pos < s.size()) {
      const char tz = s[pos];
      if (tz == 'Z' || tz == 'z') {
        ++pos;
      } else if (tz == '+' || tz == '-') {
        int oh = 0, om = 0;
        if (std::sscanf(s.c_str() + pos + 1, "%2d:%2d%n", &oh, &om, &n) != 2) return std::nullopt;
        pos += 1 + static_cast<std::size_t>(n);
        offset = (tz == '+' ? -1 : 1) * (oh * 3600LL + om * 60LL);
      } else {
        return std::nullopt;
      }
    }
    if (pos != s.size()) return std::nullopt;
  }
  const std::int64_t days = days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d));
  return days * kSecondsPerDay + h * 3600LL + mi * 60LL + sec + offset;
}

}  // namespace bdg
