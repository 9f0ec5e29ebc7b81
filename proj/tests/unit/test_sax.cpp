#include <cmath>
#include <numeric>

#include "catch_amalgamated.hpp"
#include "generators.hpp"

using namespace loadpat;
using Catch::Matchers::WithinAbs;

namespace {

// Independent oracle: bisection on the normal CDF written via erfc.
double oracle_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double oracle_quantile(double p) {
  double lo = -10.0, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (oracle_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Conditional mean of N(0,1) on (lo, hi] by composite Simpson quadrature, scaled by 1/mass.
double oracle_cell_mean(double lo, double hi, double mass) {
  lo = std::max(lo, -12.0);
  hi = std::min(hi, 12.0);
  const int n = 20000;
  const double h = (hi - lo) / n;
  double s = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double x = lo + k * h;
    const double w = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    s += w * x * std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  }
  return s * h / 3.0 / mass;
}

std::array<double, 24> ramp() {
  std::array<double, 24> v{};
  std::iota(v.begin(), v.end(), 0.0);
  return v;
}

SaxWord word_with(std::vector<int> symbols, const BreakpointTable& t) {
  SaxWord w;
  w.symbols = std::move(symbols);
  w.embedding = embed_symbols(w.symbols, t);
  return w;
}

}  // namespace

TEST_CASE("breakpoints for A=5 match the quantile oracle") {
  const auto t = gaussian_breakpoints(5);
  REQUIRE(t.breakpoints.size() == 4);
  // frozen from the erfc-bisection oracle
  const std::array<double, 4> frozen = {-0.8416212335729143, -0.2533471031357999, 0.2533471031357997, 0.8416212335729143};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK_THAT(t.breakpoints[i], WithinAbs(oracle_quantile(0.2 * static_cast<double>(i + 1)), 1e-12));
    CHECK_THAT(t.breakpoints[i], WithinAbs(frozen[i], 1e-12));
  }
  CHECK(t.breakpoints[0] == -t.breakpoints[3]);
  CHECK(t.breakpoints[1] == -t.breakpoints[2]);
}

TEST_CASE("symbol embedding for A=5 matches quadrature") {
  const auto t = gaussian_breakpoints(5);
  const std::array<double, 5> frozen = {-1.3998096020390405, -0.5319030654452654, 0.0, 0.5319030654452654, 1.3998096020390405};
  for (std::size_t i = 0; i < 5; ++i) {
    const double lo = i == 0 ? -INFINITY : t.breakpoints[i - 1];
    const double hi = i == 4 ? INFINITY : t.breakpoints[i];
    CHECK_THAT(t.symbol_embedding[i], WithinAbs(oracle_cell_mean(lo, hi, 0.2), 1e-9));
    CHECK_THAT(t.symbol_embedding[i], WithinAbs(frozen[i], 1e-9));
  }
  CHECK(t.symbol_embedding[2] == 0.0);
}

TEST_CASE("A=2 has a single zero breakpoint and embedding +-sqrt(2/pi)") {
  const auto t = gaussian_breakpoints(2);
  REQUIRE(t.breakpoints.size() == 1);
  CHECK(t.breakpoints[0] == 0.0);
  CHECK_THAT(t.symbol_embedding[0], WithinAbs(-0.7978845608028654, 1e-12));
  CHECK_THAT(t.symbol_embedding[1], WithinAbs(0.7978845608028654, 1e-12));
}

TEST_CASE("alphabet below 2 is rejected") {
  CHECK_THROWS_AS(gaussian_breakpoints(1), DataError);
  CHECK_THROWS_AS(gaussian_breakpoints(0), DataError);
}

TEST_CASE("property: breakpoint cells are equiprobable") {
  for (std::size_t a = 2; a <= 20; ++a) {
    const auto t = gaussian_breakpoints(a);
    for (std::size_t i = 0; i < a; ++i) {
      const double lo = i == 0 ? 0.0 : oracle_cdf(t.breakpoints[i - 1]);
      const double hi = i + 1 == a ? 1.0 : oracle_cdf(t.breakpoints[i]);
      CHECK_THAT(hi - lo, WithinAbs(1.0 / static_cast<double>(a), 1e-9));
    }
    CHECK(std::is_sorted(t.breakpoints.begin(), t.breakpoints.end()));
  }
}

TEST_CASE("znormalize examples") {
  const std::vector<double> constant(24, 5.0);
  for (double v : znormalize(constant)) CHECK(v == 0.0);

  std::vector<double> alt;
  for (int i = 0; i < 12; ++i) {
    alt.push_back(0.0);
    alt.push_back(2.0);
  }
  const auto z = znormalize(alt);
  for (std::size_t i = 0; i < z.size(); ++i) CHECK_THAT(z[i], WithinAbs(i % 2 ? 1.0 : -1.0, 1e-15));

  std::vector<double> bad(24, 1.0);
  bad[3] = NAN;
  CHECK_THROWS_AS(znormalize(bad), NumericalError);
  bad[3] = INFINITY;
  CHECK_THROWS_AS(znormalize(bad), NumericalError);
}

TEST_CASE("property: znormalize gives mean 0 and unit population std") {
  gen::Rng rng(21);
  for (int trial = 0; trial < 500; ++trial) {
    auto v = gen::profile_values(rng);
    const double scale = std::pow(10.0, gen::uniform(rng, -3, 3));
    for (auto& x : v) x *= scale;
    const auto z = znormalize(v);
    const double mean = std::accumulate(z.begin(), z.end(), 0.0) / 24.0;
    double var = 0.0;
    for (double x : z) var += (x - mean) * (x - mean);
    CHECK(std::abs(mean) < 1e-12);
    CHECK_THAT(std::sqrt(var / 24.0), WithinAbs(1.0, 1e-12));
  }
}

TEST_CASE("paa examples") {
  const SaxConfig cfg;
  std::vector<double> v(24, 0.0);
  v[0] = 1;
  v[1] = 2;
  v[2] = 3;
  CHECK(paa(v, cfg)[0] == 2.0);
  for (double x : paa(std::vector<double>(24, 0.0), cfg)) CHECK(x == 0.0);
  const auto r = ramp();
  CHECK(paa(r, cfg) == std::vector<double>{1, 4, 7, 10, 13, 16, 19, 22});
  CHECK_THROWS_AS(paa(std::vector<double>(23, 0.0), cfg), DataError);
}

TEST_CASE("symbolize examples") {
  const SaxConfig cfg;
  const auto t = gaussian_breakpoints(5);
  const std::array<double, 24> flat = [] {
    std::array<double, 24> a{};
    a.fill(3.3);
    return a;
  }();
  const auto w = symbolize(gen::profile("h", gen::date(2015, 1, 3), flat), cfg, t);
  CHECK(w.symbols == std::vector<int>(8, 2));
  CHECK(w.embedding == std::vector<double>(8, 0.0));
  CHECK(w.day_type == DayType::Weekend);

  CHECK(t.symbol_for(-1.0) == 0);
  CHECK(t.symbol_for(t.breakpoints[2]) == 2);
  CHECK(t.symbol_for(std::nextafter(t.breakpoints[2], 1.0)) == 3);
  CHECK(t.symbol_for(t.breakpoints[0]) == 0);
  CHECK(t.symbol_for(1e300) == 4);
}

TEST_CASE("sax_distance examples") {
  const auto t = gaussian_breakpoints(5);
  const auto w = word_with({0, 1, 2, 3, 4, 0, 1, 2}, t);
  CHECK(sax_distance(w, w, t, 3) == 0.0);
  const auto adj = word_with({1, 2, 3, 4, 3, 1, 0, 1}, t);
  CHECK(sax_distance(w, adj, t, 3) == 0.0);
  // 0 vs 4 in one segment: sqrt(3) * (b[3] - b[0])
  const auto a = word_with({0, 2, 2, 2, 2, 2, 2, 2}, t);
  const auto b = word_with({4, 2, 2, 2, 2, 2, 2, 2}, t);
  CHECK_THAT(sax_distance(a, b, t, 3), WithinAbs(2.9154614745541614, 1e-12));
  CHECK_THROWS_AS(sax_distance(a, word_with({0, 1}, t), t, 3), DataError);
}

TEST_CASE("property: SAX is invariant under positive affine maps") {
  const SaxConfig cfg;
  const auto t = gaussian_breakpoints(5);
  gen::Rng rng(8);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto v = gen::profile_values(rng);
    const double alpha = std::pow(10.0, gen::uniform(rng, -2, 2));
    const double c = gen::uniform(rng, -100, 100);
    auto u = v;
    for (auto& x : u) x = alpha * x + c;
    CHECK(symbolize_values(u, cfg, t).symbols == symbolize_values(v, cfg, t).symbols);
  }
}

TEST_CASE("property: symbols are monotone in the PAA value") {
  const auto t = gaussian_breakpoints(5);
  gen::Rng rng(4);
  for (int trial = 0; trial < 2000; ++trial) {
    const double a = gen::uniform(rng, -3, 3), b = gen::uniform(rng, -3, 3);
    CHECK(t.symbol_for(std::min(a, b)) <= t.symbol_for(std::max(a, b)));
  }
}

TEST_CASE("property: every word has S segments and a consistent embedding") {
  const SaxConfig cfg;
  gen::Rng rng(2);
  std::vector<LoadProfile> ps;
  for (int i = 0; i < 200; ++i) ps.push_back(gen::profile("h", gen::date(2015, 5, 1), gen::profile_values(rng)));
  const auto t = gaussian_breakpoints(cfg.alphabet_size);
  for (const auto& w : symbolize_all(ps, cfg)) {
    REQUIRE(w.symbols.size() == 8);
    REQUIRE(w.paa.size() == 8);
    CHECK(w.embedding == embed_symbols(w.symbols, t));
    for (std::size_t s = 0; s < 8; ++s) CHECK(w.symbols[s] == t.symbol_for(w.paa[s]));
  }
}

TEST_CASE("SAX words CSV round-trips symbols and embedding") {
  const SaxConfig cfg;
  gen::Rng rng(6);
  std::vector<LoadProfile> ps;
  Date d = gen::date(2015, 1, 1);
  for (int i = 0; i < 10; ++i, d = next_day(d)) ps.push_back(gen::profile("h" + std::to_string(i % 3), d, gen::profile_values(rng)));
  const auto words = symbolize_all(ps, cfg);
  const auto path = std::filesystem::temp_directory_path() / "loadpat_test_words.csv";
  write_file_atomic(path, sax_words_csv(words, cfg.segments));
  const auto back = read_sax_words_csv(path, cfg);
  REQUIRE(back.size() == words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    CHECK(back[i].household_id == words[i].household_id);
    CHECK(back[i].date == words[i].date);
    CHECK(back[i].day_type == words[i].day_type);
    CHECK(back[i].symbols == words[i].symbols);
    CHECK(back[i].embedding == words[i].embedding);
  }
  std::filesystem::remove(path);
}

TEST_CASE("SaxConfig validation") {
  SaxConfig cfg;
  cfg.segments = 7;
  CHECK_THROWS_AS(cfg.validate(), DataError);
}
