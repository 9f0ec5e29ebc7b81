#ifndef LOADPAT_PIPELINE_HPP
#define LOADPAT_PIPELINE_HPP

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "loadpat/clustering.hpp"
#include "loadpat/config.hpp"
#include "loadpat/ingest.hpp"
#include "loadpat/models.hpp"
#include "loadpat/patterns.hpp"
#include "loadpat/plot.hpp"
#include "loadpat/sax.hpp"

namespace loadpat {

/// Feature rows joined with one day type's target distributions, ordered by household id.
struct ModelingDataset {
  std::vector<std::string> ids;
  MatrixXd x;
  MatrixXd y;

  ModelingDataset subset(const std::vector<std::string>& keep) const {
    std::map<std::string, Eigen::Index> row;
    for (std::size_t i = 0; i < ids.size(); ++i) row[ids[i]] = static_cast<Eigen::Index>(i);
    ModelingDataset out;
    out.x.resize(static_cast<Eigen::Index>(keep.size()), x.cols());
    out.y.resize(static_cast<Eigen::Index>(keep.size()), y.cols());
    for (std::size_t i = 0; i < keep.size(); ++i) {
      const auto it = row.find(keep[i]);
      require(it != row.end(), "household " + keep[i] + " is not in the dataset");
      out.ids.push_back(keep[i]);
      out.x.row(static_cast<Eigen::Index>(i)) = x.row(it->second);
      out.y.row(static_cast<Eigen::Index>(i)) = y.row(it->second);
    }
    return out;
  }
};

inline ModelingDataset join_features(const std::vector<HouseholdFeatures>& features,
                                     const std::vector<PatternDistribution>& dists, DayType day_type) {
  std::map<std::string, const HouseholdFeatures*> by_id;
  for (const auto& f : features) by_id[f.household_id] = &f;
  std::map<std::string, const PatternDistribution*> targets;
  for (const auto& d : dists)
    if (d.day_type == day_type && by_id.count(d.household_id)) targets[d.household_id] = &d;
  require(!targets.empty(), "no households with both features and " + std::string(to_string(day_type)) + " distributions");
  const auto k = static_cast<Eigen::Index>(targets.begin()->second->probs.size());
  ModelingDataset out;
  out.x.resize(static_cast<Eigen::Index>(targets.size()), static_cast<Eigen::Index>(kFeatureCount));
  out.y.resize(static_cast<Eigen::Index>(targets.size()), k);
  Eigen::Index r = 0;
  for (const auto& [id, d] : targets) {
    require(static_cast<Eigen::Index>(d->probs.size()) == k, "distributions have inconsistent K");
    const auto v = encode_features(*by_id[id]);
    for (std::size_t c = 0; c < kFeatureCount; ++c) out.x(r, static_cast<Eigen::Index>(c)) = v[c];
    for (Eigen::Index j = 0; j < k; ++j) out.y(r, j) = d->probs[static_cast<std::size_t>(j)];
    out.ids.push_back(id);
    ++r;
  }
  return out;
}

struct TrainedModels {
  TrainTestSplit split;
  MlpTrainResult mlp;
  RidgeModel linear;
  RidgeModel poly;
};

inline TrainedModels train_models(const ModelingDataset& data, const TrainConfig& cfg) {
  TrainedModels t;
  t.split = split_train_test(data.ids, cfg.train_fraction, cfg.seed);
  const auto train = data.subset(t.split.train);
  t.mlp = mlp_train(train.x, train.y, cfg);
  t.linear = linear_fit(train.x, train.y, cfg.ridge_lambda);
  t.poly = poly_fit(train.x, train.y, cfg.ridge_lambda);
  return t;
}

struct MseTable {
  double mlp = 0.0;
  double linear = 0.0;
  double poly = 0.0;
};

inline MseTable evaluate_models(const MlpModel& mlp, const RidgeModel& linear, const RidgeModel& poly,
                                const ModelingDataset& test) {
  return {evaluate_mse(mlp, test.x, test.y), evaluate_mse(linear, test.x, test.y), evaluate_mse(poly, test.x, test.y)};
}

inline std::vector<plot::HouseholdComparison> comparisons(const MlpModel& mlp, const RidgeModel& linear,
                                                          const RidgeModel& poly, const ModelingDataset& test,
                                                          std::size_t count = 3) {
  std::vector<plot::HouseholdComparison> out;
  const MatrixXd pm = mlp.predict(test.x), pl = linear.predict(test.x), pp = poly.predict(test.x);
  auto row = [](const MatrixXd& m, Eigen::Index r) {
    std::vector<double> v(static_cast<std::size_t>(m.cols()));
    for (Eigen::Index c = 0; c < m.cols(); ++c) v[static_cast<std::size_t>(c)] = m(r, c);
    return v;
  };
  for (std::size_t i = 0; i < std::min(count, test.ids.size()); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    out.push_back({test.ids[i], {"empirical", "mlp", "linear", "poly"}, {row(test.y, r), row(pm, r), row(pl, r), row(pp, r)}});
  }
  return out;
}

/// Everything produced for one day type.
struct DayTypeResult {
  DayType day_type = DayType::Weekday;
  std::vector<SaxWord> words;
  KSelectionReport selection;
  ClusterModel model;
  std::vector<PatternDistribution> distributions;
  TrainedModels trained;
  MseTable mse;
};

inline std::vector<LoadProfile> profiles_of(const std::vector<LoadProfile>& profiles, DayType t) {
  auto [weekday, weekend] = split_by_daytype(profiles);
  return t == DayType::Weekday ? weekday : weekend;
}

/// SAX -> K selection -> clustering -> empirical distributions, no model fitting.
inline DayTypeResult characterize_day_type(const std::vector<LoadProfile>& profiles, DayType day_type,
                                           const PipelineConfig& cfg) {
  DayTypeResult r;
  r.day_type = day_type;
  r.words = symbolize_all(profiles_of(profiles, day_type), cfg.sax);
  require(!r.words.empty(), "no " + std::string(to_string(day_type)) + " profiles");
  const auto points = embeddings(r.words);
  const std::size_t k_max = std::min(cfg.k_max, points.size() - 1);
  r.selection = select_k(std::span<const Point>(points), cfg.k_min, k_max, cfg.cluster_config());
  const std::size_t k = cfg.fixed_k.value_or(r.selection.chosen_k);
  const auto row = std::find_if(r.selection.rows.begin(), r.selection.rows.end(), [&](const auto& x) { return x.k == k; });
  if (row != r.selection.rows.end()) {
    r.model = r.selection.models[static_cast<std::size_t>(row - r.selection.rows.begin())];
  } else {
    auto cc = cfg.cluster_config();
    cc.k = k;
    cc.seed += k;
    r.model = kmeans_fit(std::span<const Point>(points), cc);
  }
  r.distributions = empirical_distributions(r.words, r.model.assignments, r.model.k(), day_type);
  return r;
}

inline DayTypeResult run_day_type(const std::vector<LoadProfile>& profiles, const std::vector<HouseholdFeatures>& features,
                                  DayType day_type, const PipelineConfig& cfg) {
  auto r = characterize_day_type(profiles, day_type, cfg);
  const auto data = join_features(features, r.distributions, day_type);
  r.trained = train_models(data, cfg.train_config());
  r.mse = evaluate_models(r.trained.mlp.model, r.trained.linear, r.trained.poly, data.subset(r.trained.split.test));
  return r;
}

// ---- small file formats shared by the CLI

inline std::string loss_curve_csv(const std::vector<double>& curve) {
  std::string out = "epoch,mse\n";
  for (std::size_t e = 0; e < curve.size(); ++e) out += std::to_string(e + 1) + ',' + csv::format_double(curve[e]) + '\n';
  return out;
}

inline nlohmann::json to_json(const TrainTestSplit& s) { return {{"train", s.train}, {"test", s.test}}; }

inline TrainTestSplit split_from_json(const nlohmann::json& j) {
  try {
    return {j.at("train").get<std::vector<std::string>>(), j.at("test").get<std::vector<std::string>>()};
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid split JSON: ") + e.what());
  }
}

inline std::string mse_csv_header() { return "model,day_type,mse\n"; }

inline std::string mse_csv_rows(const MseTable& t, DayType d) {
  const std::string dt(to_string(d));
  return "mlp," + dt + ',' + csv::format_double(t.mlp) + '\n' + "linear," + dt + ',' + csv::format_double(t.linear) +
         '\n' + "poly," + dt + ',' + csv::format_double(t.poly) + '\n';
}

}  // namespace loadpat

#endif  // LOADPAT_PIPELINE_HPP
