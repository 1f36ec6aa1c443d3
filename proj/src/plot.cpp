// Copyright 2026 The distilrobust Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "distilrobust/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "distilrobust/error.hpp"

namespace distilrobust::plot {

namespace {

constexpr double kWidth = 720.0;
constexpr double kPanelHeight = 180.0;
constexpr double kLeft = 70.0, kRight = 20.0, kTop = 28.0, kBottom = 26.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

Panel make_panel(std::string title, std::vector<Series> series, std::size_t index,
                 std::optional<std::pair<double, double>> fixed_y) {
  Panel p{std::move(title), std::move(series), {}, {}};
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
  double ylo = xlo, yhi = -xlo;
  for (const auto& s : p.series) {
    for (double v : s.x) xlo = std::min(xlo, v), xhi = std::max(xhi, v);
    for (double v : s.y)
      if (std::isfinite(v)) ylo = std::min(ylo, v), yhi = std::max(yhi, v);
  }
  if (fixed_y) std::tie(ylo, yhi) = *fixed_y;
  if (!std::isfinite(ylo)) ylo = 0.0, yhi = 1.0;
  if (yhi <= ylo) yhi = ylo + 1.0;
  if (xhi <= xlo) xhi = xlo + 1.0;
  const double top = static_cast<double>(index) * kPanelHeight;
  p.x = {xlo, xhi, kLeft, kWidth - kRight};
  p.y = {ylo, yhi, top + kPanelHeight - kBottom, top + kTop};
  return p;
}

}  // namespace

double Axis::map(double v) const {
  return px_lo + (v - lo) / (hi - lo) * (px_hi - px_lo);
}

std::vector<Panel> training_panels(const std::vector<train::MetricsRecord>& metrics) {
  if (metrics.empty()) fail(ErrorKind::kValidation, "metrics log is empty");
  Series combined{"combined", "#1f77b4", {}, {}}, smoothed{"smoothed", "#d62728", {}, {}},
      kd{"kd", "#2ca02c", {}, {}}, enh{"enh", "#9467bd", {}, {}};
  Series lr{"lr", "#ff7f0e", {}, {}}, tau{"tau (dB)", "#17becf", {}, {}},
      t{"t", "#8c564b", {}, {}};
  for (const auto& r : metrics) {
    const double x = static_cast<double>(r.iter);
    for (auto* s : {&combined, &smoothed, &kd, &lr, &tau, &t}) s->x.push_back(x);
    combined.y.push_back(r.combined);
    smoothed.y.push_back(r.smoothed);
    kd.y.push_back(r.kd_total);
    lr.y.push_back(r.lr);
    tau.y.push_back(r.tau);
    t.y.push_back(r.reverb_threshold);
    if (r.enh) {
      enh.x.push_back(x);
      enh.y.push_back(*r.enh);
    }
  }
  std::vector<Series> loss{combined, smoothed, kd};
  if (!enh.x.empty()) loss.push_back(enh);
  std::vector<Panel> out;
  out.push_back(make_panel("loss", std::move(loss), 0, std::nullopt));
  out.push_back(make_panel("learning rate", {lr}, 1, std::nullopt));
  out.push_back(make_panel("SNR lower bound tau", {tau}, 2, std::pair{0.0, 20.0}));
  out.push_back(make_panel("reverb threshold t", {t}, 3, std::pair{0.0, 1.0}));
  return out;
}

std::string render_svg(const std::vector<Panel>& panels) {
  std::ostringstream s;
  const double height = kPanelHeight * static_cast<double>(panels.size());
  s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\""
    << num(height) << "\" viewBox=\"0 0 " << num(kWidth) << ' ' << num(height)
    << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& p : panels) {
    const double x0 = p.x.px_lo, x1 = p.x.px_hi, yb = p.y.px_lo, yt = p.y.px_hi;
    s << "<g class=\"panel\">\n"
      << "<text x=\"" << num(x0) << "\" y=\"" << num(yt - 8) << "\" font-weight=\"bold\">"
      << escape(p.title) << "</text>\n"
      << "<rect x=\"" << num(x0) << "\" y=\"" << num(yt) << "\" width=\"" << num(x1 - x0)
      << "\" height=\"" << num(yb - yt) << "\" fill=\"none\" stroke=\"#888\"/>\n";
    for (double v : {p.y.lo, p.y.hi})
      s << "<text x=\"" << num(x0 - 4) << "\" y=\"" << num(p.y.map(v) + 4)
        << "\" text-anchor=\"end\">" << num(v) << "</text>\n";
    for (double v : {p.x.lo, p.x.hi})
      s << "<text x=\"" << num(p.x.map(v)) << "\" y=\"" << num(yb + 14)
        << "\" text-anchor=\"middle\">" << num(v) << "</text>\n";
    double legend_x = x1;
    for (auto it = p.series.rbegin(); it != p.series.rend(); ++it) {
      s << "<text x=\"" << num(legend_x) << "\" y=\"" << num(yt - 8)
        << "\" text-anchor=\"end\" fill=\"" << it->color << "\">" << escape(it->label)
        << "</text>\n";
      legend_x -= 8.0 * static_cast<double>(it->label.size()) + 12.0;
    }
    for (const auto& series : p.series) {
      s << "<polyline class=\"series\" data-label=\"" << escape(series.label)
        << "\" fill=\"none\" stroke=\"" << series.color << "\" stroke-width=\"1.2\" points=\"";
      for (std::size_t i = 0; i < series.x.size(); ++i) {
        if (!std::isfinite(series.y[i])) continue;
        s << num(p.x.map(series.x[i])) << ',' << num(p.y.map(series.y[i])) << ' ';
      }
      s << "\"/>\n";
    }
    s << "</g>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace distilrobust::plot
