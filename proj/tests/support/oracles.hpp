// Reference implementations used only as test oracles. Deliberately naive.
#ifndef LOADPAT_TEST_ORACLES_HPP
#define LOADPAT_TEST_ORACLES_HPP

#include <cmath>
#include <limits>
#include <vector>

#include "loadpat/clustering.hpp"

namespace oracle {

inline double sse_of(const std::vector<loadpat::Point>& pts, const std::vector<std::size_t>& label, std::size_t k) {
  const std::size_t dim = pts.front().size();
  std::vector<std::vector<double>> sum(k, std::vector<double>(dim, 0.0));
  std::vector<double> count(k, 0.0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    count[label[i]] += 1;
    for (std::size_t d = 0; d < dim; ++d) sum[label[i]][d] += pts[i][d];
  }
  double sse = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t d = 0; d < dim; ++d) {
      const double c = sum[label[i]][d] / count[label[i]];
      sse += (pts[i][d] - c) * (pts[i][d] - c);
    }
  return sse;
}

// Global optimum over every labelling with K non-empty clusters.
inline double brute_force_sse(const std::vector<loadpat::Point>& pts, std::size_t k) {
  const std::size_t n = pts.size();
  std::vector<std::size_t> label(n, 0);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    std::vector<bool> used(k, false);
    for (auto l : label) used[l] = true;
    bool all = true;
    for (bool u : used) all = all && u;
    if (all) best = std::min(best, sse_of(pts, label, k));
    std::size_t i = 0;
    while (i < n && ++label[i] == k) label[i++] = 0;
    if (i == n) break;
  }
  return best;
}

inline double euclid(const loadpat::Point& a, const loadpat::Point& b) {
  double s = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(s);
}

// Textbook O(n^2) silhouette with the singleton and max(a,b)==0 conventions.
inline double silhouette(const std::vector<loadpat::Point>& pts, const std::vector<std::size_t>& label) {
  std::size_t k = 0;
  for (auto l : label) k = std::max(k, l + 1);
  double total = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<double> sum(k, 0.0), cnt(k, 0.0);
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (j == i) continue;
      sum[label[j]] += euclid(pts[i], pts[j]);
      cnt[label[j]] += 1;
    }
    if (cnt[label[i]] == 0) continue;
    const double a = sum[label[i]] / cnt[label[i]];
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c)
      if (c != label[i] && cnt[c] > 0) b = std::min(b, sum[c] / cnt[c]);
    const double m = std::max(a, b);
    if (m > 0) total += (b - a) / m;
  }
  return total / static_cast<double>(pts.size());
}

}  // namespace oracle

#endif
