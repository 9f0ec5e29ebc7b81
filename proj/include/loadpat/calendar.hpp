#ifndef LOADPAT_CALENDAR_HPP
#define LOADPAT_CALENDAR_HPP

#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace loadpat {

using Date = std::chrono::year_month_day;

enum class DayType { Weekday, Weekend };

inline std::string_view to_string(DayType t) { return t == DayType::Weekday ? "weekday" : "weekend"; }

inline std::optional<DayType> parse_day_type(std::string_view s) {
  if (s == "weekday") return DayType::Weekday;
  if (s == "weekend") return DayType::Weekend;
  return std::nullopt;
}

namespace detail {

inline std::optional<int> parse_digits(std::string_view s) {
  if (s.empty()) return std::nullopt;
  int v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return v;
}

}  // namespace detail

/// Strict `YYYY-MM-DD`. Rejects impossible dates such as 2015-02-30.
inline std::optional<Date> parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto y = detail::parse_digits(s.substr(0, 4));
  auto m = detail::parse_digits(s.substr(5, 2));
  auto d = detail::parse_digits(s.substr(8, 2));
  if (!y || !m || !d) return std::nullopt;
  Date date{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
            std::chrono::day{static_cast<unsigned>(*d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

inline std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

/// Saturday and Sunday are weekend days; holidays are not special-cased.
inline DayType day_type_of(const Date& d) {
  const std::chrono::weekday wd{std::chrono::sys_days{d}};
  return (wd == std::chrono::Saturday || wd == std::chrono::Sunday) ? DayType::Weekend
                                                                    : DayType::Weekday;
}

inline Date next_day(const Date& d) { return Date{std::chrono::sys_days{d} + std::chrono::days{1}}; }

}  // namespace loadpat

#endif  // LOADPAT_CALENDAR_HPP
