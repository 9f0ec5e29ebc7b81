#ifndef LOADPAT_INGEST_HPP
#define LOADPAT_INGEST_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "loadpat/calendar.hpp"
#include "loadpat/csv.hpp"
#include "loadpat/error.hpp"

namespace loadpat {

inline constexpr std::size_t kHoursPerDay = 24;

struct MeterReading {
  std::string household_id;
  Date date;
  int hour = 0;
  double energy_kwh = 0.0;
  std::size_t row = 0;  // 1-based data row number (header excluded)
};

struct Rejection {
  std::size_t row = 0;
  std::string reason;
};

struct ParsedReadings {
  std::vector<MeterReading> readings;
  std::vector<Rejection> rejections;
  std::size_t n_rows = 0;
};

struct LoadProfile {
  std::string household_id;
  Date date;
  std::array<double, kHoursPerDay> values{};
  DayType day_type = DayType::Weekday;

  friend bool operator==(const LoadProfile&, const LoadProfile&) = default;
};

struct DatasetSummary {
  std::size_t n_households = 0;
  std::size_t n_profiles = 0;
  std::size_t n_rejected_rows = 0;
  std::optional<std::pair<Date, Date>> date_range;
};

struct AssembledProfiles {
  std::vector<LoadProfile> profiles;  // sorted by (household_id, date)
  DatasetSummary summary;
  std::vector<Rejection> rejections;  // rows of discarded incomplete days
  std::vector<Rejection> duplicates;  // later occurrences of an already-seen hour
};

namespace detail {

struct Timestamp {
  Date date;
  int hour;
};

enum class TimestampProblem { None, Malformed, NonHourly };

inline TimestampProblem parse_timestamp(std::string_view s, Timestamp& out) {
  if (s.size() != 16 || s[10] != 'T' || s[13] != ':') return TimestampProblem::Malformed;
  auto date = parse_date(s.substr(0, 10));
  auto hh = detail::parse_digits(s.substr(11, 2));
  auto mm = detail::parse_digits(s.substr(14, 2));
  if (!date || !hh || !mm || *hh > 23 || *mm > 59) return TimestampProblem::Malformed;
  if (*mm != 0) return TimestampProblem::NonHourly;
  out = {*date, *hh};
  return TimestampProblem::None;
}

}  // namespace detail

/// Parses `household_id,timestamp,energy_kwh` rows. Every bad row lands in the rejection
/// log with its row number; only an unreadable stream or a wrong header throws.
inline ParsedReadings parse_readings(std::istream& in) {
  if (!in) throw DataError("readings stream is not readable");
  std::string line;
  if (!std::getline(in, line)) throw DataError("readings CSV is empty (missing header)");
  if (csv::trim_cr(line) != "household_id,timestamp,energy_kwh")
    throw DataError("readings CSV header must be 'household_id,timestamp,energy_kwh'");

  ParsedReadings out;
  while (std::getline(in, line)) {
    const std::size_t row = ++out.n_rows;
    const auto fields = csv::split(csv::trim_cr(line));
    auto reject = [&](std::string reason) { out.rejections.push_back({row, std::move(reason)}); };
    if (fields.size() != 3) {
      reject("wrong field count");
      continue;
    }
    if (fields[0].empty()) {
      reject("empty household id");
      continue;
    }
    detail::Timestamp ts{};
    switch (detail::parse_timestamp(fields[1], ts)) {
      case detail::TimestampProblem::Malformed: reject("bad timestamp"); continue;
      case detail::TimestampProblem::NonHourly: reject("non-hourly timestamp"); continue;
      case detail::TimestampProblem::None: break;
    }
    const auto kwh = csv::parse_double(fields[2]);
    if (!kwh || !std::isfinite(*kwh)) {
      reject("bad number");
      continue;
    }
    if (*kwh < 0.0) {
      reject("negative energy");
      continue;
    }
    out.readings.push_back({std::string(fields[0]), ts.date, ts.hour, *kwh, row});
  }
  if (in.bad()) throw DataError("error while reading readings stream");
  return out;
}

/// Groups readings into complete household-days. Duplicated hours keep the first
/// occurrence; days with fewer than 24 distinct hours are dropped and their rows counted
/// as rejected.
inline AssembledProfiles assemble_profiles(const std::vector<MeterReading>& readings) {
  struct Group {
    std::array<double, kHoursPerDay> values{};
    std::array<bool, kHoursPerDay> seen{};
    std::vector<std::size_t> rows;
    std::size_t n_distinct = 0;
  };
  using Key = std::pair<std::string, int>;  // (household, day number)
  std::map<Key, Group> groups;
  AssembledProfiles out;

  for (const auto& r : readings) {
    const int day = std::chrono::sys_days{r.date}.time_since_epoch().count();
    auto& g = groups[{r.household_id, day}];
    const auto h = static_cast<std::size_t>(r.hour);
    if (g.seen[h]) {
      out.duplicates.push_back({r.row, "duplicate reading"});
      continue;
    }
    g.seen[h] = true;
    g.values[h] = r.energy_kwh;
    g.rows.push_back(r.row);
    ++g.n_distinct;
  }

  std::set<std::string> households;
  for (auto& [key, g] : groups) {
    if (g.n_distinct < kHoursPerDay) {
      for (auto row : g.rows) out.rejections.push_back({row, "incomplete day"});
      out.summary.n_rejected_rows += g.rows.size();
      continue;
    }
    const Date date{std::chrono::sys_days{std::chrono::days{key.second}}};
    out.profiles.push_back({key.first, date, g.values, day_type_of(date)});
    households.insert(key.first);
    auto& range = out.summary.date_range;
    if (!range) range = std::pair{date, date};
    range->first = std::min(range->first, date);
    range->second = std::max(range->second, date);
  }
  std::sort(out.rejections.begin(), out.rejections.end(),
            [](const Rejection& a, const Rejection& b) { return a.row < b.row; });
  out.summary.n_households = households.size();
  out.summary.n_profiles = out.profiles.size();
  return out;
}

struct IngestResult {
  std::vector<LoadProfile> profiles;
  DatasetSummary summary;
  std::vector<Rejection> rejection_log;  // parse failures, incomplete days and duplicates
  std::size_t n_input_rows = 0;
  std::size_t n_duplicates = 0;
};

/// parse_readings followed by assemble_profiles; the summary counts parse failures too.
inline IngestResult ingest(std::istream& in) {
  auto parsed = parse_readings(in);
  auto assembled = assemble_profiles(parsed.readings);
  IngestResult out;
  out.n_input_rows = parsed.n_rows;
  out.n_duplicates = assembled.duplicates.size();
  out.summary = assembled.summary;
  out.summary.n_rejected_rows += parsed.rejections.size();
  out.rejection_log = std::move(parsed.rejections);
  out.rejection_log.insert(out.rejection_log.end(), assembled.rejections.begin(),
                           assembled.rejections.end());
  out.rejection_log.insert(out.rejection_log.end(), assembled.duplicates.begin(),
                           assembled.duplicates.end());
  std::stable_sort(out.rejection_log.begin(), out.rejection_log.end(),
                   [](const Rejection& a, const Rejection& b) { return a.row < b.row; });
  out.profiles = std::move(assembled.profiles);
  return out;
}

/// Order within each set follows the input.
inline std::pair<std::vector<LoadProfile>, std::vector<LoadProfile>> split_by_daytype(
    const std::vector<LoadProfile>& profiles) {
  std::pair<std::vector<LoadProfile>, std::vector<LoadProfile>> out;
  for (const auto& p : profiles)
    (p.day_type == DayType::Weekday ? out.first : out.second).push_back(p);
  return out;
}

// ---- serialization

/// Profiles back to the raw readings schema, values in shortest round-trip form.
inline void write_readings_csv(std::ostream& out, const std::vector<LoadProfile>& profiles) {
  out << "household_id,timestamp,energy_kwh\n";
  std::string line;
  for (const auto& p : profiles) {
    const std::string date = format_date(p.date);
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
      char hour[8];
      std::snprintf(hour, sizeof hour, "T%02zu:00,", h);
      line = p.household_id;
      line += ',';
      line += date;
      line += hour;
      line += csv::format_double(p.values[h]);
      line += '\n';
      out << line;
    }
  }
}

inline std::string readings_csv(const std::vector<LoadProfile>& profiles) {
  std::ostringstream ss;
  write_readings_csv(ss, profiles);
  return ss.str();
}

inline std::string profiles_csv(const std::vector<LoadProfile>& profiles) {
  std::string out = "household_id,date,day_type";
  for (std::size_t h = 0; h < kHoursPerDay; ++h) out += ",h_" + std::to_string(h);
  out += '\n';
  for (const auto& p : profiles) {
    out += p.household_id + ',' + format_date(p.date) + ',' + std::string(to_string(p.day_type));
    for (double v : p.values) out += ',' + csv::format_double(v);
    out += '\n';
  }
  return out;
}

inline std::vector<LoadProfile> read_profiles_csv(const std::filesystem::path& path) {
  const auto t = csv::read_table(path);
  require(t.header.size() == 3 + kHoursPerDay && t.header[0] == "household_id" &&
              t.header[1] == "date" && t.header[2] == "day_type",
          "unexpected profiles header in " + path.string());
  std::vector<LoadProfile> out;
  out.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    LoadProfile p;
    p.household_id = r[0];
    auto d = parse_date(r[1]);
    require(d.has_value(), "bad date '" + r[1] + "' in " + path.string());
    p.date = *d;
    p.day_type = day_type_of(p.date);
    for (std::size_t h = 0; h < kHoursPerDay; ++h) {
      p.values[h] = csv::field_double(r[3 + h], "profile value");
      require(p.values[h] >= 0.0, "negative profile value in " + path.string());
    }
    out.push_back(std::move(p));
  }
  return out;
}

inline std::string rejections_csv(const std::vector<Rejection>& log) {
  std::string out = "row,reason\n";
  for (const auto& r : log) out += std::to_string(r.row) + ',' + r.reason + '\n';
  return out;
}

inline nlohmann::json to_json(const DatasetSummary& s) {
  nlohmann::json j;
  j["n_households"] = s.n_households;
  j["n_profiles"] = s.n_profiles;
  j["n_rejected_rows"] = s.n_rejected_rows;
  if (s.date_range)
    j["date_range"] = {format_date(s.date_range->first), format_date(s.date_range->second)};
  else
    j["date_range"] = nullptr;
  return j;
}

}  // namespace loadpat

#endif  // LOADPAT_INGEST_HPP
