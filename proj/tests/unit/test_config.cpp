#include <fstream>

#include "catch_amalgamated.hpp"
#include "generators.hpp"

using namespace loadpat;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& text) {
  const auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("defaults follow the documented pipeline") {
  const PipelineConfig c;
  CHECK(c.seed == 42);
  CHECK(c.sax.segment_length == 3);
  CHECK(c.sax.segments == 8);
  CHECK(c.sax.alphabet_size == 5);
  CHECK(c.k_min == 2);
  CHECK(c.k_max == 12);
  CHECK(c.cluster.n_init == 10);
  CHECK(c.train.hidden_layers == std::vector<std::size_t>{100, 100, 100});
  CHECK(c.train.epochs == 2000);
  CHECK(c.train.batch_size == 32);
  CHECK(c.train.learning_rate == 1e-3);
  CHECK(c.train.train_fraction == 0.8);
  CHECK(c.synth.n_households == 312);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("the global seed reaches every seeded step") {
  PipelineConfig c;
  c.set("seed", "9");
  CHECK(c.synth_config().seed == 9);
  CHECK(c.cluster_config().seed == 9);
  CHECK(c.train_config().seed == 9);
  c.set("synth.seed", "3");
  CHECK(c.synth_config().seed == 3);
  CHECK(c.train_config().seed == 9);
}

TEST_CASE("config file with sections and comments") {
  const auto p = write_temp("loadpat_test.cfg",
                            "# experiment\n"
                            "seed = 7\n"
                            "day_type = weekend\n"
                            "[synth]\n"
                            "n_households = 50   # small\n"
                            "end_date = 2015-06-30\n"
                            "mixing_sharpness = inf\n"
                            "\n"
                            "[cluster]\n"
                            "k = 5\n"
                            "n_init = 3\n"
                            "[train]\n"
                            "hidden_layers = 20, 10\n"
                            "learning_rate = 5e-4\n");
  const auto c = load_config(p);
  CHECK(c.seed == 7);
  CHECK(c.day_type == "weekend");
  CHECK(c.synth.n_households == 50);
  CHECK(c.synth.end_date == gen::date(2015, 6, 30));
  CHECK(std::isinf(c.synth.mixing_sharpness));
  CHECK(c.fixed_k == 5u);
  CHECK(c.cluster.n_init == 3);
  CHECK(c.train.hidden_layers == std::vector<std::size_t>{20, 10});
  CHECK(c.train.learning_rate == 5e-4);
  CHECK_NOTHROW(c.validate());
  std::filesystem::remove(p);
}

TEST_CASE("cluster.k accepts auto") {
  PipelineConfig c;
  c.set("cluster.k", "4");
  CHECK(c.fixed_k == 4u);
  c.set("cluster.k", "auto");
  CHECK_FALSE(c.fixed_k.has_value());
}

TEST_CASE("bad settings are data errors") {
  PipelineConfig c;
  CHECK_THROWS_AS(c.set("nope", "1"), DataError);
  CHECK_THROWS_AS(c.set("seed", "-1"), DataError);
  CHECK_THROWS_AS(c.set("train.learning_rate", "fast"), DataError);
  CHECK_THROWS_AS(c.set("synth.end_date", "2015-02-30"), DataError);
  CHECK_THROWS_AS(load_config("/nonexistent/loadpat.cfg"), DataError);

  const auto p = write_temp("loadpat_bad.cfg", "[synth\nn_households = 3\n");
  CHECK_THROWS_AS(load_config(p), DataError);
  std::filesystem::remove(p);

  c = PipelineConfig{};
  c.set("cluster.k_min", "1");
  CHECK_THROWS_AS(c.validate(), DataError);
  c = PipelineConfig{};
  c.set("day_type", "holiday");
  CHECK_THROWS_AS(c.validate(), DataError);
  c = PipelineConfig{};
  c.set("sax.segments", "7");
  CHECK_THROWS_AS(c.validate(), DataError);
  c = PipelineConfig{};
  c.set("train.train_fraction", "1");
  CHECK_THROWS_AS(c.validate(), DataError);
}
