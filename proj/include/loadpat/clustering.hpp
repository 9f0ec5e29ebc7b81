#ifndef LOADPAT_CLUSTERING_HPP
#define LOADPAT_CLUSTERING_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "loadpat/csv.hpp"
#include "loadpat/error.hpp"
#include "loadpat/sax.hpp"

/**
 * @file clustering.hpp
 * @brief K-means with k-means++ seeding, silhouette scores and K selection.
 *
 * Identical input points are collapsed into one weighted point before fitting. SAX
 * embeddings take few distinct values, so this turns an n-point problem into a much
 * smaller one without changing the result: Lloyd steps, seeding probabilities and the
 * silhouette are all exact under multiplicity weights. Because the collapsed set is kept
 * in lexicographic order the fit does not depend on input order.
 */

namespace loadpat {

using Point = std::vector<double>;

struct ClusterConfig {
  std::size_t k = 7;
  std::size_t max_iters = 300;
  double tol = 1e-6;  // max centroid shift counted as converged
  std::size_t n_init = 10;
  std::uint64_t seed = 0;

  void validate() const {
    require(k >= 1, "cluster count k must be at least 1");
    require(max_iters >= 1, "max_iters must be at least 1");
    require(n_init >= 1, "n_init must be at least 1");
    require(tol >= 0.0, "tol must be non-negative");
  }
};

struct ClusterModel {
  std::vector<Point> centroids;
  std::vector<std::size_t> assignments;
  double sse = 0.0;
  std::vector<std::size_t> sizes;
  ClusterConfig config;

  std::size_t k() const { return centroids.size(); }
  std::size_t dim() const { return centroids.empty() ? 0 : centroids.front().size(); }
};

/// Per-restart SSE after every centroid update; filled when passed to kmeans_fit.
struct FitTrace {
  std::vector<std::vector<double>> sse_per_iteration;
};

namespace detail {

inline double squared_distance(const double* a, const double* b, std::size_t dim) {
  double s = 0.0;
  for (std::size_t d = 0; d < dim; ++d) {
    const double diff = a[d] - b[d];
    s += diff * diff;
  }
  return s;
}

struct WeightedPoints {
  std::size_t dim = 0;
  std::vector<double> coords;  // row-major, one row per distinct point
  std::vector<double> weights;
  std::vector<std::size_t> of_input;  // input index -> row

  std::size_t size() const { return weights.size(); }
  const double* row(std::size_t i) const { return coords.data() + i * dim; }
};

inline std::size_t checked_dim(std::span<const Point> points) {
  require(!points.empty(), "no points to cluster");
  const std::size_t dim = points.front().size();
  require(dim > 0, "points must have at least one dimension");
  for (const auto& p : points) {
    require(p.size() == dim, "points have inconsistent dimensions");
    for (double v : p)
      if (!std::isfinite(v)) throw NumericalError("non-finite coordinate in clustering input");
  }
  return dim;
}

inline WeightedPoints as_weighted(std::span<const Point> points, bool collapse) {
  WeightedPoints w;
  w.dim = checked_dim(points);
  w.of_input.resize(points.size());
  if (!collapse) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      w.coords.insert(w.coords.end(), points[i].begin(), points[i].end());
      w.weights.push_back(1.0);
      w.of_input[i] = i;
    }
    return w;
  }
  std::map<Point, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < points.size(); ++i) groups[points[i]].push_back(i);
  for (const auto& [p, members] : groups) {
    const std::size_t row = w.weights.size();
    w.coords.insert(w.coords.end(), p.begin(), p.end());
    w.weights.push_back(static_cast<double>(members.size()));
    for (auto m : members) w.of_input[m] = row;
  }
  return w;
}

inline std::size_t count_distinct(std::span<const Point> points) {
  std::vector<const Point*> ptrs;
  ptrs.reserve(points.size());
  for (const auto& p : points) ptrs.push_back(&p);
  std::sort(ptrs.begin(), ptrs.end(), [](const Point* a, const Point* b) { return *a < *b; });
  return static_cast<std::size_t>(
      std::unique(ptrs.begin(), ptrs.end(), [](const Point* a, const Point* b) { return *a == *b; }) -
      ptrs.begin());
}

struct Solution {
  std::vector<double> centroids;  // k rows of dim
  std::vector<std::size_t> assign;
  double sse = 0.0;
};

class Lloyd {
 public:
  Lloyd(const WeightedPoints& pts, std::size_t k) : pts_(pts), k_(k) {}

  Solution run(const ClusterConfig& cfg, std::mt19937_64& rng, std::vector<double>* trace) {
    Solution s;
    s.centroids = seed_plus_plus(rng);
    s.assign.assign(pts_.size(), 0);
    for (std::size_t iter = 0; iter < cfg.max_iters; ++iter) {
      const bool changed = assign_step(s);
      if (iter > 0 && !changed) break;
      const double shift = update_step(s);
      if (trace) trace->push_back(s.sse);
      if (shift < cfg.tol) {
        // Centroids are stable; one more pass makes sure assignments agree with them.
        if (!assign_step(s)) break;
        update_step(s);
        if (trace) trace->push_back(s.sse);
      }
    }
    return s;
  }

 private:
  const double* centroid(const Solution& s, std::size_t j) const { return s.centroids.data() + j * pts_.dim; }

  std::size_t nearest(const double* x, const std::vector<double>& centroids) const {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k_; ++j) {
      const double d = squared_distance(x, centroids.data() + j * pts_.dim, pts_.dim);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    return best;
  }

  std::vector<double> seed_plus_plus(std::mt19937_64& rng) const {
    const std::size_t n = pts_.size();
    std::vector<double> centroids;
    centroids.reserve(k_ * pts_.dim);
    std::vector<bool> taken(n, false);
    auto take = [&](std::size_t i) {
      taken[i] = true;
      centroids.insert(centroids.end(), pts_.row(i), pts_.row(i) + pts_.dim);
    };
    auto sample = [&](const std::vector<double>& mass) -> std::size_t {
      const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
      if (!(total > 0.0)) {
        for (std::size_t i = 0; i < n; ++i)
          if (!taken[i]) return i;
        return 0;
      }
      std::uniform_real_distribution<double> u(0.0, total);
      const double r = u(rng);
      double acc = 0.0;
      std::size_t last = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (mass[i] <= 0.0) continue;
        acc += mass[i];
        last = i;
        if (r < acc) return i;
      }
      return last;
    };

    take(sample(pts_.weights));
    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(pts_.row(i), centroids.data(), pts_.dim);
    std::vector<double> mass(n);
    while (centroids.size() < k_ * pts_.dim) {
      for (std::size_t i = 0; i < n; ++i) mass[i] = pts_.weights[i] * d2[i];
      take(sample(mass));
      const double* c = centroids.data() + centroids.size() - pts_.dim;
      for (std::size_t i = 0; i < n; ++i) d2[i] = std::min(d2[i], squared_distance(pts_.row(i), c, pts_.dim));
    }
    return centroids;
  }

  /// Nearest-centroid assignment (ties to the lowest index), then empty-cluster repair.
  bool assign_step(Solution& s) const {
    bool changed = false;
    for (std::size_t i = 0; i < pts_.size(); ++i) {
      const std::size_t j = nearest(pts_.row(i), s.centroids);
      if (j != s.assign[i]) {
        s.assign[i] = j;
        changed = true;
      }
    }
    std::vector<std::size_t> members(k_, 0);
    for (auto a : s.assign) ++members[a];
    for (std::size_t j = 0; j < k_; ++j) {
      if (members[j] > 0) continue;
      // Move the point farthest from its own centroid, taken from a cluster that keeps a member.
      std::size_t far = pts_.size();
      double far_d = -1.0;
      for (std::size_t i = 0; i < pts_.size(); ++i) {
        if (members[s.assign[i]] < 2) continue;
        const double d = squared_distance(pts_.row(i), centroid(s, s.assign[i]), pts_.dim);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far == pts_.size()) throw DataError("cannot fill an empty cluster: too few points");
      --members[s.assign[far]];
      s.assign[far] = j;
      members[j] = 1;
      std::copy(pts_.row(far), pts_.row(far) + pts_.dim, s.centroids.begin() + static_cast<std::ptrdiff_t>(j * pts_.dim));
      changed = true;
    }
    return changed;
  }

  /// Recomputes centroids as weighted means in fixed point order; returns the max shift.
  double update_step(Solution& s) const {
    std::vector<double> sums(k_ * pts_.dim, 0.0);
    std::vector<double> mass(k_, 0.0);
    for (std::size_t i = 0; i < pts_.size(); ++i) {
      const std::size_t j = s.assign[i];
      mass[j] += pts_.weights[i];
      for (std::size_t d = 0; d < pts_.dim; ++d) sums[j * pts_.dim + d] += pts_.weights[i] * pts_.row(i)[d];
    }
    double shift = 0.0;
    for (std::size_t j = 0; j < k_; ++j) {
      for (std::size_t d = 0; d < pts_.dim; ++d) sums[j * pts_.dim + d] /= mass[j];
      shift = std::max(shift, std::sqrt(squared_distance(sums.data() + j * pts_.dim, centroid(s, j), pts_.dim)));
    }
    s.centroids = std::move(sums);
    s.sse = 0.0;
    for (std::size_t i = 0; i < pts_.size(); ++i)
      s.sse += pts_.weights[i] * squared_distance(pts_.row(i), centroid(s, s.assign[i]), pts_.dim);
    return shift;
  }

  const WeightedPoints& pts_;
  std::size_t k_;
};

}  // namespace detail

/// Best-SSE model over `cfg.n_init` seeded k-means++/Lloyd restarts.
inline ClusterModel kmeans_fit(std::span<const Point> points, const ClusterConfig& cfg, FitTrace* trace = nullptr) {
  cfg.validate();
  require(points.size() >= cfg.k, "need at least k=" + std::to_string(cfg.k) + " points to cluster, got " +
                                      std::to_string(points.size()));
  // Collapsing is only valid when every cluster can own a distinct point.
  const bool collapse = detail::count_distinct(points) >= cfg.k;
  const auto pts = detail::as_weighted(points, collapse);

  std::mt19937_64 rng(cfg.seed);
  detail::Lloyd lloyd(pts, cfg.k);
  detail::Solution best;
  bool have_best = false;
  for (std::size_t r = 0; r < cfg.n_init; ++r) {
    std::vector<double>* curve = nullptr;
    if (trace) curve = &trace->sse_per_iteration.emplace_back();
    auto s = lloyd.run(cfg, rng, curve);
    if (!have_best || s.sse < best.sse) {
      best = std::move(s);
      have_best = true;
    }
  }

  ClusterModel model;
  model.config = cfg;
  model.centroids.resize(cfg.k);
  for (std::size_t j = 0; j < cfg.k; ++j)
    model.centroids[j].assign(best.centroids.begin() + static_cast<std::ptrdiff_t>(j * pts.dim),
                              best.centroids.begin() + static_cast<std::ptrdiff_t>((j + 1) * pts.dim));
  model.assignments.resize(points.size());
  model.sizes.assign(cfg.k, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    model.assignments[i] = best.assign[pts.of_input[i]];
    ++model.sizes[model.assignments[i]];
  }
  model.sse = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i)
    model.sse += detail::squared_distance(points[i].data(), model.centroids[model.assignments[i]].data(), pts.dim);
  return model;
}

inline std::vector<Point> embeddings(const std::vector<SaxWord>& words) {
  std::vector<Point> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(w.embedding);
  return out;
}

inline ClusterModel kmeans_fit(const std::vector<SaxWord>& words, const ClusterConfig& cfg, FitTrace* trace = nullptr) {
  const auto pts = embeddings(words);
  return kmeans_fit(std::span<const Point>(pts), cfg, trace);
}

/// Nearest centroid, ties to the lowest index.
inline std::size_t assign(const ClusterModel& model, std::span<const double> point) {
  require(!model.centroids.empty(), "cluster model has no centroids");
  require(point.size() == model.dim(), "point dimension " + std::to_string(point.size()) +
                                           " does not match centroid dimension " + std::to_string(model.dim()));
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < model.k(); ++j) {
    const double d = detail::squared_distance(point.data(), model.centroids[j].data(), point.size());
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return best;
}

inline std::size_t assign(const ClusterModel& model, const SaxWord& word) { return assign(model, word.embedding); }

/// Mean silhouette with Euclidean distance. Singleton clusters score 0, as does a point
/// with a == b == 0. Computed exactly over distinct (cluster, point) pairs.
inline double silhouette(std::span<const Point> points, std::span<const std::size_t> assignments) {
  require(points.size() == assignments.size(), "points and assignments differ in length");
  const std::size_t dim = detail::checked_dim(points);
  const std::size_t k = *std::max_element(assignments.begin(), assignments.end()) + 1;
  std::vector<double> cluster_size(k, 0.0);
  for (auto a : assignments) cluster_size[a] += 1.0;
  const auto non_empty = std::count_if(cluster_size.begin(), cluster_size.end(), [](double c) { return c > 0; });
  require(non_empty >= 2, "silhouette needs at least two non-empty clusters");

  std::map<std::pair<std::size_t, Point>, double> groups;
  for (std::size_t i = 0; i < points.size(); ++i) groups[{assignments[i], points[i]}] += 1.0;
  std::vector<std::size_t> label;
  std::vector<double> weight, coords;
  for (const auto& [key, w] : groups) {
    label.push_back(key.first);
    weight.push_back(w);
    coords.insert(coords.end(), key.second.begin(), key.second.end());
  }

  const std::size_t g = label.size();
  std::vector<double> dist_sum(k);
  double total = 0.0;
  for (std::size_t i = 0; i < g; ++i) {
    const std::size_t own = label[i];
    if (cluster_size[own] < 2.0) continue;
    std::fill(dist_sum.begin(), dist_sum.end(), 0.0);
    for (std::size_t j = 0; j < g; ++j)
      dist_sum[label[j]] += weight[j] * std::sqrt(detail::squared_distance(&coords[i * dim], &coords[j * dim], dim));
    const double a = dist_sum[own] / (cluster_size[own] - 1.0);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c)
      if (c != own && cluster_size[c] > 0) b = std::min(b, dist_sum[c] / cluster_size[c]);
    const double m = std::max(a, b);
    if (m > 0.0) total += weight[i] * (b - a) / m;
  }
  return total / static_cast<double>(points.size());
}

struct KSelectionRow {
  std::size_t k = 0;
  double sse = 0.0;
  double silhouette = 0.0;
};

struct KSelectionReport {
  std::vector<KSelectionRow> rows;  // ascending k
  std::size_t chosen_k = 0;
  std::size_t elbow_k = 0;  // smallest K from which every further relative SSE drop is < elbow_threshold
  std::vector<ClusterModel> models;  // one per row
};

inline constexpr double kElbowThreshold = 0.10;

/// Relative SSE drop from row i to row i+1; zero when sse(i) is already zero.
inline double relative_drop(const KSelectionReport& r, std::size_t i) {
  const double a = r.rows[i].sse;
  return a > 0.0 ? (a - r.rows[i + 1].sse) / a : 0.0;
}

/// Fits every K in [k_min, k_max] (seed + K per fit), applies the elbow rule, then picks
/// the highest silhouette at or beyond the elbow (ties to the smaller K).
inline KSelectionReport select_k(std::span<const Point> points, std::size_t k_min, std::size_t k_max,
                                 const ClusterConfig& base, double elbow_threshold = kElbowThreshold) {
  require(k_min <= k_max, "empty K range");
  require(k_min >= 2, "K range must start at 2 or above");
  require(k_max + 1 <= points.size(), "K range must end at most at n-1 = " +
                                          std::to_string(points.size() == 0 ? 0 : points.size() - 1));
  KSelectionReport report;
  for (std::size_t k = k_min; k <= k_max; ++k) {
    ClusterConfig cfg = base;
    cfg.k = k;
    cfg.seed = base.seed + k;
    auto model = kmeans_fit(points, cfg);
    report.rows.push_back({k, model.sse, silhouette(points, model.assignments)});
    report.models.push_back(std::move(model));
  }
  std::size_t elbow = report.rows.size() - 1;
  while (elbow > 0 && relative_drop(report, elbow - 1) < elbow_threshold) --elbow;
  report.elbow_k = report.rows[elbow].k;
  std::size_t best = elbow;
  for (std::size_t i = elbow + 1; i < report.rows.size(); ++i)
    if (report.rows[i].silhouette > report.rows[best].silhouette) best = i;
  report.chosen_k = report.rows[best].k;
  return report;
}

inline KSelectionReport select_k(const std::vector<SaxWord>& words, std::size_t k_min, std::size_t k_max,
                                 const ClusterConfig& base) {
  const auto pts = embeddings(words);
  return select_k(std::span<const Point>(pts), k_min, k_max, base);
}

// ---- serialization

inline std::string k_report_csv(const KSelectionReport& r) {
  std::string out = "k,sse,silhouette\n";
  for (const auto& row : r.rows)
    out += std::to_string(row.k) + ',' + csv::format_double(row.sse) + ',' + csv::format_double(row.silhouette) + '\n';
  return out;
}

inline nlohmann::json to_json(const ClusterModel& m) {
  nlohmann::json j;
  j["k"] = m.k();
  j["centroids"] = m.centroids;
  j["sizes"] = m.sizes;
  j["sse"] = m.sse;
  j["config"] = {{"k", m.config.k}, {"max_iters", m.config.max_iters}, {"tol", m.config.tol}, {"n_init", m.config.n_init}};
  j["seed"] = m.config.seed;
  return j;
}

inline ClusterModel cluster_model_from_json(const nlohmann::json& j) {
  try {
    ClusterModel m;
    m.centroids = j.at("centroids").get<std::vector<Point>>();
    m.sizes = j.at("sizes").get<std::vector<std::size_t>>();
    m.sse = j.at("sse").get<double>();
    const auto& c = j.at("config");
    m.config.k = c.at("k").get<std::size_t>();
    m.config.max_iters = c.at("max_iters").get<std::size_t>();
    m.config.tol = c.at("tol").get<double>();
    m.config.n_init = c.at("n_init").get<std::size_t>();
    m.config.seed = j.at("seed").get<std::uint64_t>();
    require(!m.centroids.empty() && m.centroids.size() == m.config.k, "cluster model centroid count mismatch");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("invalid cluster model JSON: ") + e.what());
  }
}

}  // namespace loadpat

#endif  // LOADPAT_CLUSTERING_HPP
