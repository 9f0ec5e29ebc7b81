#ifndef LOADPAT_SAX_HPP
#define LOADPAT_SAX_HPP

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "loadpat/calendar.hpp"
#include "loadpat/csv.hpp"
#include "loadpat/error.hpp"
#include "loadpat/ingest.hpp"

/**
 * @file sax.hpp
 * @brief Symbolic aggregate approximation of daily load profiles.
 *
 * A profile is z-normalized, reduced to segment means (PAA) and each mean is mapped to
 * the equiprobable N(0,1) cell containing it. Cells are half-open on the left,
 * (b[i-1], b[i]], so a value sitting exactly on a breakpoint takes the lower symbol.
 * Every symbol also carries a real-valued embedding, the mean of N(0,1) restricted to its
 * cell, which is what clustering works on.
 */

namespace loadpat {

struct SaxConfig {
  std::size_t hours = 24;
  std::size_t segment_length = 3;  // hours per segment
  std::size_t segments = 8;
  std::size_t alphabet_size = 5;
  double zero_variance_epsilon = 1e-9;

  void validate() const {
    require(segment_length * segments == hours, "segment_length * segments must equal hours");
    require(alphabet_size >= 2, "alphabet_size must be at least 2");
    require(zero_variance_epsilon > 0.0, "zero_variance_epsilon must be positive");
  }
};

struct BreakpointTable {
  std::vector<double> breakpoints;       // A-1 ascending quantiles
  std::vector<double> symbol_embedding;  // A conditional cell means

  std::size_t alphabet_size() const { return symbol_embedding.size(); }

  /// Index of the cell containing `value`: the number of breakpoints strictly below it.
  int symbol_for(double value) const {
    return static_cast<int>(std::lower_bound(breakpoints.begin(), breakpoints.end(), value) -
                            breakpoints.begin());
  }
};

inline BreakpointTable gaussian_breakpoints(std::size_t alphabet_size) {
  require(alphabet_size >= 2, "alphabet_size must be at least 2");
  const boost::math::normal_distribution<double> standard;
  const double a = static_cast<double>(alphabet_size);
  BreakpointTable t;
  t.breakpoints.resize(alphabet_size - 1);
  for (std::size_t i = 1; i < alphabet_size; ++i)
    t.breakpoints[i - 1] = boost::math::quantile(standard, static_cast<double>(i) / a);
  // Exact symmetry; quantile(i/A) and -quantile(1-i/A) may differ in the last ulp.
  for (std::size_t i = 0; i < t.breakpoints.size() / 2; ++i) {
    const std::size_t j = t.breakpoints.size() - 1 - i;
    const double half = 0.5 * (t.breakpoints[j] - t.breakpoints[i]);
    t.breakpoints[i] = -half;
    t.breakpoints[j] = half;
  }
  if (t.breakpoints.size() % 2 == 1) t.breakpoints[t.breakpoints.size() / 2] = 0.0;

  auto pdf = [](double x) {
    return std::isinf(x) ? 0.0 : std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  };
  t.symbol_embedding.resize(alphabet_size);
  for (std::size_t i = 0; i < alphabet_size; ++i) {
    const double lo = i == 0 ? -INFINITY : t.breakpoints[i - 1];
    const double hi = i + 1 == alphabet_size ? INFINITY : t.breakpoints[i];
    t.symbol_embedding[i] = (pdf(lo) - pdf(hi)) * a;
  }
  return t;
}

/// Mean 0 and population std 1; all zeros when the std is below `zero_variance_epsilon`.
inline std::vector<double> znormalize(std::span<const double> values,
                                      double zero_variance_epsilon = 1e-9) {
  require(!values.empty(), "cannot z-normalize an empty series");
  for (double v : values)
    if (!std::isfinite(v)) throw NumericalError("non-finite value in load profile");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> out(values.size(), 0.0);
  if (sd < zero_variance_epsilon) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - mean) / sd;
  // Remove the rounding residue so the output mean is zero to within a few ulps.
  double residue = 0.0;
  for (double v : out) residue += v;
  residue /= n;
  for (double& v : out) v -= residue;
  return out;
}

inline std::vector<double> paa(std::span<const double> normalized, const SaxConfig& cfg) {
  require(normalized.size() == cfg.hours, "PAA input length " + std::to_string(normalized.size()) +
                                              " does not match configured hours " +
                                              std::to_string(cfg.hours));
  std::vector<double> out(cfg.segments, 0.0);
  for (std::size_t s = 0; s < cfg.segments; ++s) {
    double sum = 0.0;
    for (std::size_t t = s * cfg.segment_length; t < (s + 1) * cfg.segment_length; ++t)
      sum += normalized[t];
    out[s] = sum / static_cast<double>(cfg.segment_length);
  }
  return out;
}

struct SaxWord {
  std::string household_id;
  Date date;
  DayType day_type = DayType::Weekday;
  std::vector<double> paa;
  std::vector<int> symbols;
  std::vector<double> embedding;
};

inline std::vector<double> embed_symbols(std::span<const int> symbols, const BreakpointTable& table) {
  std::vector<double> out;
  out.reserve(symbols.size());
  for (int s : symbols) {
    require(s >= 0 && static_cast<std::size_t>(s) < table.alphabet_size(),
            "symbol " + std::to_string(s) + " outside the alphabet");
    out.push_back(table.symbol_embedding[static_cast<std::size_t>(s)]);
  }
  return out;
}

inline SaxWord symbolize_values(std::span<const double> values, const SaxConfig& cfg,
                                const BreakpointTable& table) {
  require(table.alphabet_size() == cfg.alphabet_size, "breakpoint table does not match alphabet size");
  SaxWord w;
  w.paa = paa(znormalize(values, cfg.zero_variance_epsilon), cfg);
  w.symbols.reserve(w.paa.size());
  for (double v : w.paa) w.symbols.push_back(table.symbol_for(v));
  w.embedding = embed_symbols(w.symbols, table);
  return w;
}

inline SaxWord symbolize(const LoadProfile& profile, const SaxConfig& cfg, const BreakpointTable& table) {
  auto w = symbolize_values(profile.values, cfg, table);
  w.household_id = profile.household_id;
  w.date = profile.date;
  w.day_type = profile.day_type;
  return w;
}

inline std::vector<SaxWord> symbolize_all(const std::vector<LoadProfile>& profiles, const SaxConfig& cfg) {
  cfg.validate();
  const auto table = gaussian_breakpoints(cfg.alphabet_size);
  std::vector<SaxWord> out;
  out.reserve(profiles.size());
  for (const auto& p : profiles) out.push_back(symbolize(p, cfg, table));
  return out;
}

/// MINDIST lower bound between two words of the same configuration.
inline double sax_distance(const SaxWord& a, const SaxWord& b, const BreakpointTable& table,
                           std::size_t segment_length) {
  require(a.symbols.size() == b.symbols.size(), "SAX words have different segment counts");
  double sum = 0.0;
  for (std::size_t s = 0; s < a.symbols.size(); ++s) {
    const int lo = std::min(a.symbols[s], b.symbols[s]);
    const int hi = std::max(a.symbols[s], b.symbols[s]);
    require(lo >= 0 && static_cast<std::size_t>(hi) < table.alphabet_size(), "symbol outside the alphabet");
    if (hi - lo <= 1) continue;
    const double d = table.breakpoints[static_cast<std::size_t>(hi - 1)] - table.breakpoints[static_cast<std::size_t>(lo)];
    sum += d * d;
  }
  return std::sqrt(static_cast<double>(segment_length)) * std::sqrt(sum);
}

// ---- serialization: household_id,date,sym_0..sym_{S-1},paa_0..paa_{S-1}

inline std::string sax_words_csv(const std::vector<SaxWord>& words, std::size_t segments) {
  std::string out = "household_id,date";
  for (std::size_t s = 0; s < segments; ++s) out += ",sym_" + std::to_string(s);
  for (std::size_t s = 0; s < segments; ++s) out += ",paa_" + std::to_string(s);
  out += '\n';
  for (const auto& w : words) {
    require(w.symbols.size() == segments && w.paa.size() == segments, "SAX word length mismatch");
    out += w.household_id + ',' + format_date(w.date);
    for (int s : w.symbols) out += ',' + std::to_string(s);
    for (double v : w.paa) out += ',' + csv::format_fixed(v, 6);
    out += '\n';
  }
  return out;
}

inline std::vector<SaxWord> read_sax_words_csv(const std::filesystem::path& path, const SaxConfig& cfg) {
  const auto t = csv::read_table(path);
  const std::size_t segments = cfg.segments;
  require(t.header.size() == 2 + 2 * segments && t.header[0] == "household_id" && t.header[1] == "date",
          "unexpected SAX words header in " + path.string());
  const auto table = gaussian_breakpoints(cfg.alphabet_size);
  std::vector<SaxWord> out;
  out.reserve(t.rows.size());
  for (const auto& r : t.rows) {
    SaxWord w;
    w.household_id = r[0];
    auto d = parse_date(r[1]);
    require(d.has_value(), "bad date '" + r[1] + "' in " + path.string());
    w.date = *d;
    w.day_type = day_type_of(w.date);
    for (std::size_t s = 0; s < segments; ++s) {
      auto sym = csv::parse_int<int>(r[2 + s]);
      require(sym.has_value(), "bad symbol '" + r[2 + s] + "' in " + path.string());
      w.symbols.push_back(*sym);
    }
    for (std::size_t s = 0; s < segments; ++s) w.paa.push_back(csv::field_double(r[2 + segments + s], "paa"));
    w.embedding = embed_symbols(w.symbols, table);
    out.push_back(std::move(w));
  }
  return out;
}

}  // namespace loadpat

#endif  // LOADPAT_SAX_HPP
