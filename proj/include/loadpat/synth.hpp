#ifndef LOADPAT_SYNTH_HPP
#define LOADPAT_SYNTH_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "loadpat/calendar.hpp"
#include "loadpat/error.hpp"
#include "loadpat/ingest.hpp"
#include "loadpat/patterns.hpp"

/*
 Synthetic households with planted load archetypes.

 Each archetype is a step shape over the eight 3-hour segments. Its segment levels are
 chosen so that, once z-normalized, every segment mean sits near the middle of a SAX
 cell; with the default noise the word of a noisy day therefore differs from the
 archetype word only in occasional single-symbol flips.

 Demographic brackets used by the generator:
   income_code     1..10, uniform (10 ascending annual income brackets)
   education_code  1..5,  uniform (1 = no diploma ... 5 = graduate degree)
   square_footage  lognormal, median 1800 ft^2, log-sd 0.35, rounded to whole ft^2
   age_counts      one of four household types: retirees (65+), pre-retirement (50-64),
                   young adults (19-24), or working adults (25-34 / 35-49) who may have
                   children (0-12) and teenagers (13-18); some households add a 65+ resident.

 The archetype mixture depends on the features through indicator products such as
 "has residents 65+", "income >= 6 and no children", "large home and high income", and
 is sharpened by exp(mixing_sharpness * score).
*/

namespace loadpat {

struct Archetype {
  std::string name;
  std::array<double, kHoursPerDay> shape{};  // kWh
};

inline constexpr std::size_t kMaxArchetypes = 7;

/// The seven planted shapes, in generator order.
inline std::vector<Archetype> default_archetypes() {
  struct Target {
    const char* name;
    std::array<double, 8> z;  // target z-scores per 3-hour segment
    double floor;             // kWh at the lowest segment
  };
  static const std::array<Target, kMaxArchetypes> targets{{
      {"morning-peak", {-0.59, -0.59, 2.45, 0.50, -0.59, -0.59, 0.00, -0.59}, 0.2},
      {"evening-peak", {-0.59, -0.59, -0.59, -0.59, -0.59, 0.00, 2.45, 0.50}, 0.2},
      {"dual-peak", {-1.51, -0.54, 1.66, 0.00, -0.52, -0.55, 1.46, 0.00}, 0.2},
      {"midday-peak", {-1.13, -0.55, -0.55, 0.55, 2.22, 0.55, -0.55, -0.55}, 0.2},
      {"late-night-peak", {1.48, 0.00, -1.55, -0.52, -0.51, -0.53, 0.00, 1.62}, 0.2},
      {"pre-dawn-peak", {0.55, 2.22, 0.55, -0.55, -1.13, -0.55, -0.55, -0.55}, 0.2},
      {"high-base-afternoon", {-1.30, -1.31, -0.55, 0.55, 1.32, 1.29, 0.55, -0.55}, 1.0},
  }};
  constexpr double kwh_per_z = 0.4;
  std::vector<Archetype> out;
  for (const auto& s : targets) {
    Archetype a{s.name, {}};
    const double zmin = *std::min_element(s.z.begin(), s.z.end());
    for (std::size_t h = 0; h < kHoursPerDay; ++h) a.shape[h] = s.floor + kwh_per_z * (s.z[h / 3] - zmin);
    out.push_back(std::move(a));
  }
  return out;
}

struct SynthConfig {
  std::size_t n_households = 312;
  Date start_date = Date{std::chrono::year{2015}, std::chrono::January, std::chrono::day{1}};
  Date end_date = Date{std::chrono::year{2017}, std::chrono::December, std::chrono::day{31}};
  std::size_t n_archetypes = 7;
  double noise_std = 0.1;  // kWh
  double mixing_sharpness = 5.0;  // +inf gives one archetype per household
  std::uint64_t seed = 42;

  void validate() const {
    require(n_households >= 2, "n_households must be at least 2");
    require(n_archetypes >= 2 && n_archetypes <= kMaxArchetypes,
            "n_archetypes must lie in [2, " + std::to_string(kMaxArchetypes) + "]");
    require(noise_std >= 0.0 && std::isfinite(noise_std), "noise_std must be finite and non-negative");
    require(mixing_sharpness > 0.0, "mixing_sharpness must be positive");
    require(start_date.ok() && end_date.ok() && start_date <= end_date, "invalid synthetic date range");
  }
};

struct SynthData {
  std::vector<Archetype> archetypes;
  std::vector<HouseholdFeatures> households;
  std::vector<PatternDistribution> ground_truth;  // weekday and weekend row per household
  std::vector<LoadProfile> profiles;              // household-major, then date
  std::vector<std::size_t> profile_archetype;     // planted archetype of each profile
};

namespace detail {

inline HouseholdFeatures draw_features(std::string id, std::mt19937_64& rng) {
  HouseholdFeatures f;
  f.household_id = std::move(id);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto pick = [&](std::initializer_list<int> options) {
    std::uniform_int_distribution<std::size_t> d(0, options.size() - 1);
    return *(options.begin() + d(rng));
  };
  auto& ages = f.age_counts;
  const double kind = u01(rng);
  const bool working = kind >= 0.5;
  if (kind < 0.25)
    ages[6] = pick({1, 2});
  else if (kind < 0.35)
    ages[5] = pick({1, 2});
  else if (kind < 0.5)
    ages[2] = pick({1, 2, 3});
  else
    ages[u01(rng) < 0.5 ? 3 : 4] = pick({1, 2});
  if (working && u01(rng) < 0.5) ages[0] = pick({1, 2, 3});
  if (working && u01(rng) < 0.3) ages[1] = pick({1, 2});
  if (u01(rng) < 0.1) ages[6] += 1;
  f.income_code = std::uniform_int_distribution<int>(1, 10)(rng);
  f.education_code = std::uniform_int_distribution<int>(1, 5)(rng);
  std::lognormal_distribution<double> sqft(std::log(1800.0), 0.35);
  f.square_footage = std::max(300.0, std::round(sqft(rng)));
  return f;
}

/// Unnormalized archetype affinities; deliberately not linear in the features.
inline std::array<double, kMaxArchetypes> archetype_scores(const HouseholdFeatures& f) {
  const auto& a = f.age_counts;
  const double kid = a[0] > 0, teen = a[1] > 0, young = a[2] > 0, work = (a[3] + a[4]) > 0;
  const double pre = a[5] > 0, old = a[6] > 0;
  const double high_income = f.income_code >= 6, educated = f.education_code >= 4;
  const double small = f.square_footage < 1500.0, big = f.square_footage > 2200.0;
  return {
      1.0 * old + 0.4 * pre,                                          // morning
      1.0 * kid + 0.5 * teen * (1.0 - high_income),                   // evening
      1.0 * work * high_income * (1.0 - kid),                         // dual
      0.7 * old * educated + 0.6 * work * educated * (1.0 - high_income),  // midday
      1.0 * young,                                                    // late night
      0.9 * small * (1.0 - old),                                      // pre-dawn
      1.0 * big * high_income,                                        // high-base afternoon
  };
}

}  // namespace detail

/// Archetype probabilities for a household: softmax(sharpness * score) over the first
/// n archetypes, or one-hot at the best score when sharpness is infinite.
inline std::vector<double> ground_truth_mixture(const HouseholdFeatures& f, std::size_t n_archetypes,
                                                double sharpness) {
  const auto scores = detail::archetype_scores(f);
  std::vector<double> p(n_archetypes, 0.0);
  if (std::isinf(sharpness)) {
    const auto best = std::max_element(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(n_archetypes));
    p[static_cast<std::size_t>(best - scores.begin())] = 1.0;
    return p;
  }
  const double top = *std::max_element(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(n_archetypes));
  double total = 0.0;
  for (std::size_t j = 0; j < n_archetypes; ++j) total += p[j] = std::exp(sharpness * (scores[j] - top));
  for (double& v : p) v /= total;
  return p;
}

inline SynthData generate(const SynthConfig& cfg) {
  cfg.validate();
  SynthData out;
  out.archetypes = default_archetypes();
  out.archetypes.resize(cfg.n_archetypes);
  const std::size_t width = std::to_string(cfg.n_households).size();
  const auto n_days = static_cast<std::size_t>(
      (std::chrono::sys_days{cfg.end_date} - std::chrono::sys_days{cfg.start_date}).count() + 1);
  out.profiles.reserve(cfg.n_households * n_days);
  out.profile_archetype.reserve(cfg.n_households * n_days);

  for (std::size_t i = 0; i < cfg.n_households; ++i) {
    std::mt19937_64 rng(cfg.seed ^ static_cast<std::uint64_t>(i));
    std::string id = std::to_string(i + 1);
    id = "h" + std::string(width - id.size(), '0') + id;
    auto features = detail::draw_features(id, rng);
    const auto mix = ground_truth_mixture(features, cfg.n_archetypes, cfg.mixing_sharpness);
    out.ground_truth.push_back({id, DayType::Weekday, mix});
    out.ground_truth.push_back({id, DayType::Weekend, mix});

    std::discrete_distribution<std::size_t> which(mix.begin(), mix.end());
    std::normal_distribution<double> noise(0.0, 1.0);
    for (Date d = cfg.start_date; d <= cfg.end_date; d = next_day(d)) {
      const std::size_t a = which(rng);
      LoadProfile p{id, d, out.archetypes[a].shape, day_type_of(d)};
      for (double& v : p.values) {
        if (cfg.noise_std > 0.0) v += cfg.noise_std * noise(rng);
        v = std::round(std::max(v, 0.0) * 1000.0) / 1000.0;  // meter resolution: 1 Wh
      }
      out.profiles.push_back(std::move(p));
      out.profile_archetype.push_back(a);
    }
    out.households.push_back(std::move(features));
  }
  return out;
}

}  // namespace loadpat

#endif  // LOADPAT_SYNTH_HPP
