#ifndef LOADPAT_PLOT_HPP
#define LOADPAT_PLOT_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "loadpat/clustering.hpp"
#include "loadpat/csv.hpp"

// Self-contained SVG figures. Output is a pure function of the inputs (no timestamps).

namespace loadpat::plot {

namespace detail {

inline std::string num(double v) { return csv::format_fixed(v, 2); }

class Svg {
 public:
  Svg(double width, double height) : width_(width), height_(height) {}

  void line(double x1, double y1, double x2, double y2, const std::string& stroke, double w = 1.0) {
    body_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) +
             "\" stroke=\"" + stroke + "\" stroke-width=\"" + num(w) + "\"/>\n";
  }
  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke, double w = 1.5) {
    body_ += "<polyline fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + num(w) + "\" points=\"";
    for (const auto& [x, y] : pts) body_ += num(x) + "," + num(y) + " ";
    body_ += "\"/>\n";
  }
  void rect(double x, double y, double w, double h, const std::string& fill, const std::string& stroke = "none") {
    body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) +
             "\" fill=\"" + fill + "\" stroke=\"" + stroke + "\"/>\n";
  }
  void circle(double x, double y, double r, const std::string& fill) {
    body_ += "<circle cx=\"" + num(x) + "\" cy=\"" + num(y) + "\" r=\"" + num(r) + "\" fill=\"" + fill + "\"/>\n";
  }
  void text(double x, double y, const std::string& s, double size = 12, const std::string& anchor = "middle") {
    body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-size=\"" + num(size) +
             "\" font-family=\"sans-serif\" text-anchor=\"" + anchor + "\">" + s + "</text>\n";
  }
  std::string str() const {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width_) + "\" height=\"" + num(height_) +
           "\" viewBox=\"0 0 " + num(width_) + " " + num(height_) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" +
           body_ + "</svg>\n";
  }

 private:
  double width_, height_;
  std::string body_;
};

struct Frame {
  double x0, y0, w, h;  // pixel box
  double xmin, xmax, ymin, ymax;
  double px(double x) const { return x0 + (x - xmin) / (xmax - xmin) * w; }
  double py(double y) const { return y0 + h - (y - ymin) / (ymax - ymin) * h; }
};

inline void axes(Svg& svg, const Frame& f, const std::string& title, const std::string& xlabel) {
  svg.rect(f.x0, f.y0, f.w, f.h, "none", "#444");
  svg.text(f.x0 + f.w / 2, f.y0 - 8, title, 13);
  if (!xlabel.empty()) svg.text(f.x0 + f.w / 2, f.y0 + f.h + 32, xlabel, 11);
  svg.text(f.x0 - 6, f.py(f.ymax) + 4, num(f.ymax), 10, "end");
  svg.text(f.x0 - 6, f.py(f.ymin) + 4, num(f.ymin), 10, "end");
}

inline std::pair<double, double> padded_range(const std::vector<double>& v) {
  double lo = *std::min_element(v.begin(), v.end()), hi = *std::max_element(v.begin(), v.end());
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace detail

/// SSE and silhouette against K, chosen K highlighted.
inline std::string k_selection_svg(const KSelectionReport& report) {
  using namespace detail;
  Svg svg(900, 360);
  std::vector<double> ks, sse, sil;
  for (const auto& r : report.rows) {
    ks.push_back(static_cast<double>(r.k));
    sse.push_back(r.sse);
    sil.push_back(r.silhouette);
  }
  const double kmin = ks.front() - 0.5, kmax = ks.back() + 0.5;
  auto panel = [&](double x0, const std::vector<double>& ys, const std::string& title) {
    auto [lo, hi] = padded_range(ys);
    Frame f{x0, 40, 360, 260, kmin, kmax, lo, hi};
    axes(svg, f, title, "number of clusters K");
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < ks.size(); ++i) {
      pts.emplace_back(f.px(ks[i]), f.py(ys[i]));
      svg.text(f.px(ks[i]), f.y0 + f.h + 14, std::to_string(report.rows[i].k), 10);
    }
    svg.polyline(pts, "#1f77b4");
    for (std::size_t i = 0; i < ks.size(); ++i)
      svg.circle(pts[i].first, pts[i].second, report.rows[i].k == report.chosen_k ? 5.0 : 3.0,
                 report.rows[i].k == report.chosen_k ? "#d62728" : "#1f77b4");
  };
  panel(70, sse, "SSE");
  panel(510, sil, "Silhouette index (chosen K = " + std::to_string(report.chosen_k) + ")");
  return svg.str();
}

/// One panel per cluster: the centroid as a step function over the day (z-score units).
inline std::string centroids_svg(const ClusterModel& model, std::size_t hours_per_segment) {
  using namespace detail;
  const std::size_t k = model.k();
  const std::size_t cols = std::min<std::size_t>(k, 4);
  const std::size_t rows = (k + cols - 1) / cols;
  const double pw = 200, ph = 140, gap = 60;
  Svg svg(static_cast<double>(cols) * (pw + gap) + gap, static_cast<double>(rows) * (ph + gap) + gap);
  const double hours = static_cast<double>(model.dim() * hours_per_segment);
  for (std::size_t j = 0; j < k; ++j) {
    const double x0 = gap + static_cast<double>(j % cols) * (pw + gap);
    const double y0 = gap + static_cast<double>(j / cols) * (ph + gap);
    Frame f{x0, y0, pw, ph, 0.0, hours, -1.6, 1.6};
    axes(svg, f, "Cluster " + std::to_string(j + 1) + " (n=" + std::to_string(model.sizes[j]) + ")", "hour of day");
    svg.line(f.px(0), f.py(0), f.px(hours), f.py(0), "#bbb");
    std::vector<std::pair<double, double>> pts;
    for (std::size_t s = 0; s < model.dim(); ++s) {
      const double a = static_cast<double>(s * hours_per_segment), b = static_cast<double>((s + 1) * hours_per_segment);
      pts.emplace_back(f.px(a), f.py(model.centroids[j][s]));
      pts.emplace_back(f.px(b), f.py(model.centroids[j][s]));
    }
    svg.polyline(pts, "#2ca02c", 2.0);
    for (double h = 0; h <= hours; h += 6) svg.text(f.px(h), f.y0 + f.h + 14, std::to_string(static_cast<int>(h)), 10);
  }
  return svg.str();
}

struct HouseholdComparison {
  std::string household_id;
  std::vector<std::string> series_names;     // e.g. empirical, mlp, linear, poly
  std::vector<std::vector<double>> series;   // each K long
};

/// Grouped bars per cluster, one panel per household. Values are clamped to [0,1] for display.
inline std::string comparison_svg(const std::vector<HouseholdComparison>& households) {
  using namespace detail;
  static const char* colors[] = {"#444444", "#d62728", "#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd"};
  const double pw = 320, ph = 220, gap = 60;
  Svg svg(static_cast<double>(std::max<std::size_t>(households.size(), 1)) * (pw + gap) + gap, ph + 2 * gap + 40);
  for (std::size_t h = 0; h < households.size(); ++h) {
    const auto& hc = households[h];
    const std::size_t k = hc.series.empty() ? 0 : hc.series.front().size();
    const double x0 = gap + static_cast<double>(h) * (pw + gap);
    Frame f{x0, gap, pw, ph, 0.0, static_cast<double>(k), 0.0, 1.0};
    axes(svg, f, "Household " + hc.household_id, "load pattern");
    const double group = pw / static_cast<double>(std::max<std::size_t>(k, 1));
    const double bar = 0.8 * group / static_cast<double>(std::max<std::size_t>(hc.series.size(), 1));
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t s = 0; s < hc.series.size(); ++s) {
        const double v = std::clamp(hc.series[s][j], 0.0, 1.0);
        const double bx = f.px(static_cast<double>(j)) + 0.1 * group + static_cast<double>(s) * bar;
        svg.rect(bx, f.py(v), bar, f.py(0.0) - f.py(v), colors[s % 6]);
      }
      svg.text(f.px(static_cast<double>(j) + 0.5), f.y0 + f.h + 14, std::to_string(j + 1), 10);
    }
    for (std::size_t s = 0; s < hc.series_names.size(); ++s) {
      const double lx = x0 + static_cast<double>(s) * 80;
      svg.rect(lx, gap + ph + 40, 10, 10, colors[s % 6]);
      svg.text(lx + 14, gap + ph + 49, hc.series_names[s], 10, "start");
    }
  }
  return svg.str();
}

}  // namespace loadpat::plot

#endif  // LOADPAT_PLOT_HPP
