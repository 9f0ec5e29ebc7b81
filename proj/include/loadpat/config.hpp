#ifndef LOADPAT_CONFIG_HPP
#define LOADPAT_CONFIG_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "loadpat/calendar.hpp"
#include "loadpat/clustering.hpp"
#include "loadpat/csv.hpp"
#include "loadpat/error.hpp"
#include "loadpat/models.hpp"
#include "loadpat/sax.hpp"
#include "loadpat/synth.hpp"

// Pipeline configuration in a flat TOML-style file:
//
//   seed = 42
//   [synth]
//   n_households = 312
//   mixing_sharpness = 5.0
//
// Section headers prefix the keys below them (`synth.n_households`). Unknown keys are
// rejected so typos do not silently fall back to defaults.

namespace loadpat {

struct PipelineConfig {
  std::uint64_t seed = 42;
  std::string day_type = "all";  // weekday | weekend | all
  std::filesystem::path readings;  // empty: run-all synthesizes data
  std::filesystem::path features;
  std::filesystem::path output_dir = "out";

  SynthConfig synth;
  std::optional<std::uint64_t> synth_seed;  // defaults to `seed`
  SaxConfig sax;
  ClusterConfig cluster;
  std::optional<std::size_t> fixed_k;  // empty: use the selected K
  std::size_t k_min = 2;
  std::size_t k_max = 12;
  TrainConfig train;

  SynthConfig synth_config() const {
    auto c = synth;
    c.seed = synth_seed.value_or(seed);
    return c;
  }
  ClusterConfig cluster_config() const {
    auto c = cluster;
    c.seed = seed;
    return c;
  }
  TrainConfig train_config() const {
    auto c = train;
    c.seed = seed;
    return c;
  }

  void validate() const {
    require(day_type == "all" || parse_day_type(day_type).has_value(), "day_type must be weekday, weekend or all");
    synth_config().validate();
    sax.validate();
    auto c = cluster_config();
    if (fixed_k) c.k = *fixed_k;
    c.validate();
    require(k_min >= 2 && k_min <= k_max, "cluster K range must satisfy 2 <= k_min <= k_max");
    train_config().validate();
  }

  /// Applies one `section.key = value` setting.
  void set(const std::string& key, const std::string& value);
};

namespace detail {

inline std::string strip(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  s = s.substr(b, e - b + 1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

template <typename T>
T parse_value(const std::string& key, const std::string& v);

template <>
inline double parse_value<double>(const std::string& key, const std::string& v) {
  if (v == "inf" || v == "+inf") return INFINITY;
  auto d = csv::parse_double(v);
  require(d.has_value() && !std::isnan(*d), "config " + key + ": expected a number, got '" + v + "'");
  return *d;
}

template <>
inline std::size_t parse_value<std::size_t>(const std::string& key, const std::string& v) {
  auto d = csv::parse_int<std::size_t>(v);
  require(d.has_value(), "config " + key + ": expected a non-negative integer, got '" + v + "'");
  return *d;
}

inline Date parse_date_value(const std::string& key, const std::string& v) {
  auto d = parse_date(v);
  require(d.has_value(), "config " + key + ": expected YYYY-MM-DD, got '" + v + "'");
  return *d;
}

}  // namespace detail

inline void PipelineConfig::set(const std::string& key, const std::string& raw) {
  using detail::parse_value;
  const std::string v = detail::strip(raw);
  using Setter = std::function<void(PipelineConfig&, const std::string&)>;
  static const std::map<std::string, Setter> setters = {
      {"seed", [](auto& c, auto& v) { c.seed = static_cast<std::uint64_t>(parse_value<std::size_t>("seed", v)); }},
      {"day_type", [](auto& c, auto& v) { c.day_type = v; }},
      {"data.readings", [](auto& c, auto& v) { c.readings = v; }},
      {"data.features", [](auto& c, auto& v) { c.features = v; }},
      {"output.dir", [](auto& c, auto& v) { c.output_dir = v; }},
      {"synth.n_households", [](auto& c, auto& v) { c.synth.n_households = parse_value<std::size_t>("synth.n_households", v); }},
      {"synth.start_date", [](auto& c, auto& v) { c.synth.start_date = detail::parse_date_value("synth.start_date", v); }},
      {"synth.end_date", [](auto& c, auto& v) { c.synth.end_date = detail::parse_date_value("synth.end_date", v); }},
      {"synth.n_archetypes", [](auto& c, auto& v) { c.synth.n_archetypes = parse_value<std::size_t>("synth.n_archetypes", v); }},
      {"synth.noise_std", [](auto& c, auto& v) { c.synth.noise_std = parse_value<double>("synth.noise_std", v); }},
      {"synth.mixing_sharpness", [](auto& c, auto& v) { c.synth.mixing_sharpness = parse_value<double>("synth.mixing_sharpness", v); }},
      {"synth.seed", [](auto& c, auto& v) { c.synth_seed = parse_value<std::size_t>("synth.seed", v); }},
      {"sax.segment_length", [](auto& c, auto& v) { c.sax.segment_length = parse_value<std::size_t>("sax.segment_length", v); }},
      {"sax.segments", [](auto& c, auto& v) { c.sax.segments = parse_value<std::size_t>("sax.segments", v); }},
      {"sax.alphabet_size", [](auto& c, auto& v) { c.sax.alphabet_size = parse_value<std::size_t>("sax.alphabet_size", v); }},
      {"sax.zero_variance_epsilon", [](auto& c, auto& v) { c.sax.zero_variance_epsilon = parse_value<double>("sax.zero_variance_epsilon", v); }},
      {"cluster.k", [](auto& c, auto& v) {
         if (v == "auto") c.fixed_k.reset();
         else c.fixed_k = parse_value<std::size_t>("cluster.k", v);
       }},
      {"cluster.k_min", [](auto& c, auto& v) { c.k_min = parse_value<std::size_t>("cluster.k_min", v); }},
      {"cluster.k_max", [](auto& c, auto& v) { c.k_max = parse_value<std::size_t>("cluster.k_max", v); }},
      {"cluster.max_iters", [](auto& c, auto& v) { c.cluster.max_iters = parse_value<std::size_t>("cluster.max_iters", v); }},
      {"cluster.tol", [](auto& c, auto& v) { c.cluster.tol = parse_value<double>("cluster.tol", v); }},
      {"cluster.n_init", [](auto& c, auto& v) { c.cluster.n_init = parse_value<std::size_t>("cluster.n_init", v); }},
      {"train.epochs", [](auto& c, auto& v) { c.train.epochs = parse_value<std::size_t>("train.epochs", v); }},
      {"train.batch_size", [](auto& c, auto& v) { c.train.batch_size = parse_value<std::size_t>("train.batch_size", v); }},
      {"train.learning_rate", [](auto& c, auto& v) { c.train.learning_rate = parse_value<double>("train.learning_rate", v); }},
      {"train.beta1", [](auto& c, auto& v) { c.train.beta1 = parse_value<double>("train.beta1", v); }},
      {"train.beta2", [](auto& c, auto& v) { c.train.beta2 = parse_value<double>("train.beta2", v); }},
      {"train.epsilon", [](auto& c, auto& v) { c.train.epsilon = parse_value<double>("train.epsilon", v); }},
      {"train.train_fraction", [](auto& c, auto& v) { c.train.train_fraction = parse_value<double>("train.train_fraction", v); }},
      {"train.ridge_lambda", [](auto& c, auto& v) { c.train.ridge_lambda = parse_value<double>("train.ridge_lambda", v); }},
      {"train.hidden_layers", [](auto& c, auto& v) {
         c.train.hidden_layers.clear();
         for (auto part : csv::split(v))
           c.train.hidden_layers.push_back(parse_value<std::size_t>("train.hidden_layers", detail::strip(std::string(part))));
       }},
  };
  const auto it = setters.find(key);
  require(it != setters.end(), "unknown config key '" + key + "'");
  it->second(*this, v);
}

inline PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig cfg = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path.string());
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::strip(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      require(line.back() == ']', path.string() + ":" + std::to_string(lineno) + ": malformed section header");
      section = detail::strip(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    require(eq != std::string::npos, path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::strip(line.substr(0, eq));
    cfg.set(section.empty() ? key : section + "." + key, line.substr(eq + 1));
  }
  return cfg;
}

}  // namespace loadpat

#endif  // LOADPAT_CONFIG_HPP
