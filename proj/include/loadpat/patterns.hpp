#ifndef LOADPAT_PATTERNS_HPP
#define LOADPAT_PATTERNS_HPP

#include <array>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "loadpat/calendar.hpp"
#include "loadpat/clustering.hpp"
#include "loadpat/csv.hpp"
#include "loadpat/error.hpp"

namespace loadpat {

/// A household's probability over the K load patterns for one day type.
struct PatternDistribution {
  std::string household_id;
  DayType day_type = DayType::Weekday;
  std::vector<double> probs;
};

inline constexpr std::size_t kAgeBrackets = 7;
inline constexpr std::array<const char*, kAgeBrackets> kAgeBracketColumns = {
    "age_0_12", "age_13_18", "age_19_24", "age_25_34", "age_35_49", "age_50_64", "age_65p"};
inline constexpr std::size_t kFeatureCount = kAgeBrackets + 3;

struct HouseholdFeatures {
  std::string household_id;
  std::array<int, kAgeBrackets> age_counts{};
  int income_code = 0;     // ascending income bracket
  int education_code = 0;  // ascending attainment
  double square_footage = 0.0;

  void validate() const {
    int residents = 0;
    for (int c : age_counts) {
      require(c >= 0, "household " + household_id + ": negative age count");
      residents += c;
    }
    require(residents >= 1, "household " + household_id + ": no residents");
    require(std::isfinite(square_footage) && square_footage > 0.0,
            "household " + household_id + ": square footage must be positive");
  }
};

inline PatternDistribution empirical_distribution(const std::string& household_id, DayType day_type,
                                                  std::span<const std::size_t> assignments, std::size_t k) {
  require(!assignments.empty(), "household " + household_id + " has no assigned profiles");
  require(k >= 1, "pattern count must be at least 1");
  std::vector<std::size_t> counts(k, 0);
  for (auto a : assignments) {
    require(a < k, "assignment outside [0, K)");
    ++counts[a];
  }
  PatternDistribution d{household_id, day_type, std::vector<double>(k)};
  const double total = static_cast<double>(assignments.size());
  for (std::size_t j = 0; j < k; ++j) d.probs[j] = static_cast<double>(counts[j]) / total;
  return d;
}

/// One distribution per household present in `words`, ordered by household id.
inline std::vector<PatternDistribution> empirical_distributions(const std::vector<SaxWord>& words,
                                                                std::span<const std::size_t> assignments,
                                                                std::size_t k, DayType day_type) {
  require(words.size() == assignments.size(), "words and assignments differ in length");
  std::map<std::string, std::vector<std::size_t>> by_household;
  for (std::size_t i = 0; i < words.size(); ++i) by_household[words[i].household_id].push_back(assignments[i]);
  std::vector<PatternDistribution> out;
  out.reserve(by_household.size());
  for (const auto& [id, a] : by_household) out.push_back(empirical_distribution(id, day_type, a, k));
  return out;
}

/// [age counts..., income, education, square footage]; no scaling.
inline std::array<double, kFeatureCount> encode_features(const HouseholdFeatures& f) {
  f.validate();
  std::array<double, kFeatureCount> v{};
  for (std::size_t i = 0; i < kAgeBrackets; ++i) v[i] = static_cast<double>(f.age_counts[i]);
  v[kAgeBrackets] = static_cast<double>(f.income_code);
  v[kAgeBrackets + 1] = static_cast<double>(f.education_code);
  v[kAgeBrackets + 2] = f.square_footage;
  return v;
}

// ---- serialization

inline std::string features_csv(const std::vector<HouseholdFeatures>& households) {
  std::string out = "household_id";
  for (auto c : kAgeBracketColumns) out += std::string(",") + c;
  out += ",income_code,education_code,square_footage\n";
  for (const auto& h : households) {
    out += h.household_id;
    for (int c : h.age_counts) out += ',' + std::to_string(c);
    out += ',' + std::to_string(h.income_code) + ',' + std::to_string(h.education_code) + ',' +
           csv::format_double(h.square_footage) + '\n';
  }
  return out;
}

inline std::vector<HouseholdFeatures> read_features_csv(const std::filesystem::path& path) {
  const auto t = csv::read_table(path);
  std::vector<HouseholdFeatures> out;
  const auto id_col = t.column("household_id");
  std::array<std::size_t, kAgeBrackets> age_cols{};
  for (std::size_t i = 0; i < kAgeBrackets; ++i) age_cols[i] = t.column(kAgeBracketColumns[i]);
  const auto inc = t.column("income_code"), edu = t.column("education_code"), sq = t.column("square_footage");
  auto int_field = [&](const std::string& s) {
    auto v = csv::parse_int<int>(s);
    require(v.has_value(), "bad integer '" + s + "' in " + path.string());
    return *v;
  };
  for (const auto& r : t.rows) {
    HouseholdFeatures h;
    h.household_id = r[id_col];
    for (std::size_t i = 0; i < kAgeBrackets; ++i) h.age_counts[i] = int_field(r[age_cols[i]]);
    h.income_code = int_field(r[inc]);
    h.education_code = int_field(r[edu]);
    h.square_footage = csv::field_double(r[sq], "square_footage");
    h.validate();
    out.push_back(std::move(h));
  }
  return out;
}

inline std::string distributions_csv(const std::vector<PatternDistribution>& dists) {
  const std::size_t k = dists.empty() ? 0 : dists.front().probs.size();
  std::string out = "household_id,day_type";
  for (std::size_t j = 0; j < k; ++j) out += ",p_" + std::to_string(j);
  out += '\n';
  for (const auto& d : dists) {
    require(d.probs.size() == k, "distributions have inconsistent K");
    out += d.household_id + ',' + std::string(to_string(d.day_type));
    for (double p : d.probs) out += ',' + csv::format_double(p);
    out += '\n';
  }
  return out;
}

inline std::vector<PatternDistribution> read_distributions_csv(const std::filesystem::path& path) {
  const auto t = csv::read_table(path);
  require(t.header.size() >= 3 && t.header[0] == "household_id" && t.header[1] == "day_type",
          "unexpected distributions header in " + path.string());
  std::vector<PatternDistribution> out;
  for (const auto& r : t.rows) {
    PatternDistribution d;
    d.household_id = r[0];
    auto dt = parse_day_type(r[1]);
    require(dt.has_value(), "bad day_type '" + r[1] + "' in " + path.string());
    d.day_type = *dt;
    for (std::size_t j = 2; j < r.size(); ++j) d.probs.push_back(csv::field_double(r[j], "probability"));
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace loadpat

#endif  // LOADPAT_PATTERNS_HPP
