// loadpat: command-line front end for the load-pattern pipeline.
//
// Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 numerical failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "loadpat/loadpat.hpp"

namespace fs = std::filesystem;
using namespace loadpat;

namespace {

struct Options {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> day_type;
};

PipelineConfig resolve_config(const Options& opt) {
  PipelineConfig cfg;
  if (!opt.config_path.empty()) cfg = load_config(opt.config_path);
  for (const auto& kv : opt.overrides) {
    const auto eq = kv.find('=');
    require(eq != std::string::npos, "--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.day_type) cfg.day_type = *opt.day_type;
  cfg.validate();
  return cfg;
}

void write_json(const fs::path& path, const nlohmann::json& j) { write_file_atomic(path, j.dump(2) + "\n"); }

nlohmann::json read_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError("cannot parse " + path.string() + ": " + e.what());
  }
}

std::vector<DayType> selected_day_types(const PipelineConfig& cfg) {
  if (cfg.day_type == "all") return {DayType::Weekday, DayType::Weekend};
  return {*parse_day_type(cfg.day_type)};
}

// ---- steps shared by the subcommands and run-all

void write_synth(const fs::path& dir, const SynthData& data) {
  write_file_atomic(dir / "features.csv", features_csv(data.households));
  write_file_atomic(dir / "readings.csv", [&](std::ostream& out) { write_readings_csv(out, data.profiles); });
  write_file_atomic(dir / "ground_truth.csv", distributions_csv(data.ground_truth));
}

IngestResult run_ingest(const fs::path& readings, const fs::path& dir) {
  std::ifstream in(readings);
  if (!in) throw DataError("cannot open readings file " + readings.string());
  auto result = ingest(in);
  write_file_atomic(dir / "profiles.csv", profiles_csv(result.profiles));
  write_json(dir / "summary.json", to_json(result.summary));
  write_file_atomic(dir / "rejections.csv", rejections_csv(result.rejection_log));
  return result;
}

std::vector<SaxWord> sax_for(const std::vector<LoadProfile>& profiles, const PipelineConfig& cfg) {
  std::vector<LoadProfile> chosen;
  const auto types = selected_day_types(cfg);
  for (const auto& p : profiles)
    if (std::find(types.begin(), types.end(), p.day_type) != types.end()) chosen.push_back(p);
  return symbolize_all(chosen, cfg.sax);
}

void write_selection(const fs::path& dir, const KSelectionReport& report) {
  write_file_atomic(dir / "k_report.csv", k_report_csv(report));
  write_file_atomic(dir / "k_selection.svg", plot::k_selection_svg(report));
}

void write_cluster(const fs::path& dir, const ClusterModel& model, const PipelineConfig& cfg) {
  write_json(dir / "cluster_model.json", to_json(model));
  write_file_atomic(dir / "centroids.svg", plot::centroids_svg(model, cfg.sax.segment_length));
}

std::vector<PatternDistribution> distributions_for(const ClusterModel& model, const std::vector<SaxWord>& words) {
  std::vector<PatternDistribution> out;
  for (DayType t : {DayType::Weekday, DayType::Weekend}) {
    std::vector<SaxWord> subset;
    std::vector<std::size_t> labels;
    for (const auto& w : words)
      if (w.day_type == t) {
        subset.push_back(w);
        labels.push_back(assign(model, w));
      }
    if (subset.empty()) continue;
    auto d = empirical_distributions(subset, labels, model.k(), t);
    out.insert(out.end(), d.begin(), d.end());
  }
  return out;
}

std::set<DayType> day_types_in(const std::vector<PatternDistribution>& dists) {
  std::set<DayType> out;
  for (const auto& d : dists) out.insert(d.day_type);
  return out;
}

void write_trained(const fs::path& dir, const std::string& suffix, const TrainedModels& t, const TrainConfig& cfg) {
  write_json(dir / ("mlp" + suffix + ".json"), to_json(t.mlp.model, cfg));
  write_json(dir / ("linear" + suffix + ".json"), to_json(t.linear, cfg));
  write_json(dir / ("poly" + suffix + ".json"), to_json(t.poly, cfg));
  write_file_atomic(dir / ("loss_curve" + suffix + ".csv"), loss_curve_csv(t.mlp.loss_curve));
  write_json(dir / ("split" + suffix + ".json"), to_json(t.split));
}

void print_mse(const std::string& rows) { std::cout << mse_csv_header() << rows; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Residential load-pattern characterization: SAX symbolization, K-means load patterns and "
               "demographic regression models"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opt;
  app.add_option("-c,--config", opt.config_path, "Pipeline config file (key = value, [section] headers)");
  app.add_option("--set", opt.overrides, "Override a config key, e.g. --set cluster.n_init=5")->take_all();
  app.add_option("--seed", opt.seed, "Seed for every seeded step");
  app.add_option("--day-type", opt.day_type, "weekday, weekend or all")->check(CLI::IsMember({"weekday", "weekend", "all"}));

  std::string out, in_readings, in_profiles, in_words, in_model, in_features, in_dists, in_models;
  std::optional<std::size_t> k, k_min, k_max;

  auto* synth = app.add_subcommand("synth", "Write synthetic features, readings and ground truth CSVs");
  synth->add_option("-o,--out", out, "Output directory")->required();

  auto* ingest_cmd = app.add_subcommand("ingest", "Readings CSV -> profiles, summary JSON, rejection log");
  ingest_cmd->add_option("-r,--readings", in_readings, "Readings CSV")->required();
  ingest_cmd->add_option("-o,--out", out, "Output directory")->required();

  auto* sax_cmd = app.add_subcommand("sax", "Profiles CSV -> SAX words CSV");
  sax_cmd->add_option("-p,--profiles", in_profiles, "Profiles CSV")->required();
  sax_cmd->add_option("-o,--out", out, "Output CSV")->required();

  auto* select = app.add_subcommand("select-k", "SAX words -> K selection report and plot");
  select->add_option("-w,--words", in_words, "SAX words CSV")->required();
  select->add_option("--k-min", k_min, "Smallest K");
  select->add_option("--k-max", k_max, "Largest K");
  select->add_option("-o,--out", out, "Output directory")->required();

  auto* cluster = app.add_subcommand("cluster", "SAX words + K -> cluster model JSON and centroid plot");
  cluster->add_option("-w,--words", in_words, "SAX words CSV")->required();
  cluster->add_option("-k,--k", k, "Number of clusters");
  cluster->add_option("-o,--out", out, "Output directory")->required();

  auto* dist = app.add_subcommand("distributions", "Cluster model + SAX words -> distributions CSV");
  dist->add_option("-m,--model", in_model, "Cluster model JSON")->required();
  dist->add_option("-w,--words", in_words, "SAX words CSV")->required();
  dist->add_option("-o,--out", out, "Output CSV")->required();

  auto* train = app.add_subcommand("train", "Features + distributions -> MLP, linear and poly models");
  train->add_option("-f,--features", in_features, "Features CSV")->required();
  train->add_option("-d,--distributions", in_dists, "Distributions CSV")->required();
  train->add_option("-o,--out", out, "Output directory")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Trained models + test split -> MSE table and comparison plot");
  evaluate->add_option("-M,--models", in_models, "Directory written by train")->required();
  evaluate->add_option("-f,--features", in_features, "Features CSV")->required();
  evaluate->add_option("-d,--distributions", in_dists, "Distributions CSV")->required();
  evaluate->add_option("-o,--out", out, "Output directory")->required();

  auto* run_all = app.add_subcommand("run-all", "Full pipeline for weekday and weekend data");
  run_all->add_option("-o,--out", out, "Output directory (default: output.dir from the config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "loadpat: usage error: " << e.what() << "\n";
    return 1;
  }

  try {
    auto cfg = resolve_config(opt);
    if (k_min) cfg.k_min = *k_min;
    if (k_max) cfg.k_max = *k_max;

    if (synth->parsed()) {
      write_synth(out, generate(cfg.synth_config()));
    } else if (ingest_cmd->parsed()) {
      const auto r = run_ingest(in_readings, out);
      std::cout << to_json(r.summary).dump() << "\n";
    } else if (sax_cmd->parsed()) {
      const auto words = sax_for(read_profiles_csv(in_profiles), cfg);
      write_file_atomic(out, sax_words_csv(words, cfg.sax.segments));
    } else if (select->parsed()) {
      const auto words = read_sax_words_csv(in_words, cfg.sax);
      const auto report = select_k(words, cfg.k_min, cfg.k_max, cfg.cluster_config());
      write_selection(out, report);
      std::cout << "chosen_k=" << report.chosen_k << "\n";
    } else if (cluster->parsed()) {
      auto cc = cfg.cluster_config();
      if (k)
        cc.k = *k;
      else if (cfg.fixed_k)
        cc.k = *cfg.fixed_k;
      else
        throw DataError("cluster needs --k or cluster.k in the config");
      cc.seed += cc.k;  // same per-K seed as select-k and run-all
      const auto words = read_sax_words_csv(in_words, cfg.sax);
      write_cluster(out, kmeans_fit(words, cc), cfg);
    } else if (dist->parsed()) {
      const auto model = cluster_model_from_json(read_json(in_model));
      const auto words = read_sax_words_csv(in_words, cfg.sax);
      write_file_atomic(out, distributions_csv(distributions_for(model, words)));
    } else if (train->parsed()) {
      const auto features = read_features_csv(in_features);
      const auto dists = read_distributions_csv(in_dists);
      const auto tc = cfg.train_config();
      for (DayType t : day_types_in(dists)) {
        const auto trained = train_models(join_features(features, dists, t), tc);
        write_trained(out, "_" + std::string(to_string(t)), trained, tc);
      }
    } else if (evaluate->parsed()) {
      const auto features = read_features_csv(in_features);
      const auto dists = read_distributions_csv(in_dists);
      std::string rows;
      for (DayType t : day_types_in(dists)) {
        const std::string s = "_" + std::string(to_string(t));
        const fs::path dir = in_models;
        const auto mlp = mlp_from_json(read_json(dir / ("mlp" + s + ".json")));
        const auto lin = ridge_from_json(read_json(dir / ("linear" + s + ".json")));
        const auto poly = ridge_from_json(read_json(dir / ("poly" + s + ".json")));
        const auto split = split_from_json(read_json(dir / ("split" + s + ".json")));
        const auto test = join_features(features, dists, t).subset(split.test);
        rows += mse_csv_rows(evaluate_models(mlp, lin, poly, test), t);
        write_file_atomic(fs::path(out) / ("comparison" + s + ".svg"), plot::comparison_svg(comparisons(mlp, lin, poly, test)));
      }
      write_file_atomic(fs::path(out) / "mse.csv", mse_csv_header() + rows);
      print_mse(rows);
    } else if (run_all->parsed()) {
      const fs::path root = out.empty() ? cfg.output_dir : fs::path(out);
      fs::path readings = cfg.readings, features_path = cfg.features;
      if (readings.empty()) {
        write_synth(root / "data", generate(cfg.synth_config()));
        readings = root / "data" / "readings.csv";
        if (features_path.empty()) features_path = root / "data" / "features.csv";
      }
      require(!features_path.empty(), "run-all needs data.features when data.readings is given");
      const auto ingested = run_ingest(readings, root / "ingest");
      const auto features = read_features_csv(features_path);
      const auto tc = cfg.train_config();
      std::string rows;
      for (DayType t : selected_day_types(cfg)) {
        const fs::path dir = root / std::string(to_string(t));
        auto r = characterize_day_type(ingested.profiles, t, cfg);
        write_file_atomic(dir / "sax_words.csv", sax_words_csv(r.words, cfg.sax.segments));
        write_selection(dir, r.selection);
        write_cluster(dir, r.model, cfg);
        write_file_atomic(dir / "distributions.csv", distributions_csv(r.distributions));
        const auto data = join_features(features, r.distributions, t);
        const auto trained = train_models(data, tc);
        write_trained(dir, "", trained, tc);
        const auto test = data.subset(trained.split.test);
        const auto& mlp = trained.mlp.model;
        rows += mse_csv_rows(evaluate_models(mlp, trained.linear, trained.poly, test), t);
        write_file_atomic(dir / "comparison.svg", plot::comparison_svg(comparisons(mlp, trained.linear, trained.poly, test)));
        std::cerr << to_string(t) << ": " << r.words.size() << " profiles, chosen K=" << r.selection.chosen_k
                  << ", model K=" << r.model.k() << "\n";
      }
      write_file_atomic(root / "mse.csv", mse_csv_header() + rows);
      print_mse(rows);
    }
  } catch (const NumericalError& e) {
    std::cerr << "loadpat: numerical error: " << e.what() << "\n";
    return 3;
  } catch (const DataError& e) {
    std::cerr << "loadpat: error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "loadpat: error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
