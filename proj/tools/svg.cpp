#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace repdyn {

namespace {

constexpr double kPanelW = 600.0, kPanelH = 430.0;
constexpr double kMarginL = 72.0, kMarginR = 16.0;
constexpr double kMarginT = 48.0, kMarginB = 56.0;
constexpr double kPlotW = kPanelW - kMarginL - kMarginR;
constexpr double kPlotH = kPanelH - kMarginT - kMarginB;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};
constexpr int kPaletteSize = 8;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.5g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool valid() const { return lo <= hi; }
  void finalize(double pad_fraction) {
    if (!valid()) {
      lo = 0.0;
      hi = 1.0;
      return;
    }
    if (hi == lo) {
      double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.5;
      lo -= pad;
      hi += pad;
      return;
    }
    double pad = (hi - lo) * pad_fraction;
    lo -= pad;
    hi += pad;
  }
};

void render_panel(const PlotSpec& plot, std::string& out) {
  Range rx, ry;
  if (plot.fixed_range) {
    rx.lo = plot.x_min;
    rx.hi = plot.x_max;
    ry.lo = plot.y_min;
    ry.hi = plot.y_max;
  } else {
    for (const auto& s : plot.series) {
      for (double v : s.x) rx.add(v);
      for (double v : s.y) ry.add(v);
      for (double v : s.band_lo) ry.add(v);
      for (double v : s.band_hi) ry.add(v);
    }
    rx.finalize(0.02);
    ry.finalize(0.06);
  }
  auto sx = [&](double v) {
    return kMarginL + (v - rx.lo) / (rx.hi - rx.lo) * kPlotW;
  };
  auto sy = [&](double v) {
    return kMarginT + kPlotH - (v - ry.lo) / (ry.hi - ry.lo) * kPlotH;
  };

  out += "<rect x=\"" + num(kMarginL) + "\" y=\"" + num(kMarginT) +
         "\" width=\"" + num(kPlotW) + "\" height=\"" + num(kPlotH) +
         "\" fill=\"white\" stroke=\"#404040\" stroke-width=\"1\"/>\n";

  for (int i = 0; i < 5; ++i) {
    double fx = rx.lo + (rx.hi - rx.lo) * i / 4.0;
    double fy = ry.lo + (ry.hi - ry.lo) * i / 4.0;
    double px = sx(fx), py = sy(fy);
    if (i > 0 && i < 4) {
      out += "<line x1=\"" + num(px) + "\" y1=\"" + num(kMarginT) +
             "\" x2=\"" + num(px) + "\" y2=\"" + num(kMarginT + kPlotH) +
             "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
      out += "<line x1=\"" + num(kMarginL) + "\" y1=\"" + num(py) +
             "\" x2=\"" + num(kMarginL + kPlotW) + "\" y2=\"" + num(py) +
             "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
    }
    out += "<text x=\"" + num(px) + "\" y=\"" + num(kMarginT + kPlotH + 18) +
           "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#202020\">" +
           escape(tick(fx)) + "</text>\n";
    out += "<text x=\"" + num(kMarginL - 6) + "\" y=\"" + num(py + 4) +
           "\" font-size=\"11\" text-anchor=\"end\" fill=\"#202020\">" +
           escape(tick(fy)) + "</text>\n";
  }

  int color_index = 0;
  for (const auto& s : plot.series) {
    const char* color = kPalette[color_index % kPaletteSize];
    ++color_index;
    const std::size_t n = s.x.size();

    if (s.band_lo.size() == n && s.band_hi.size() == n && n > 0) {
      std::size_t i = 0;
      while (i < n) {
        std::size_t j = i;
        while (j < n && std::isfinite(s.x[j]) && std::isfinite(s.band_lo[j]) &&
               std::isfinite(s.band_hi[j]))
          ++j;
        if (j > i + 1) {
          std::string points;
          for (std::size_t k = i; k < j; ++k)
            points += num(sx(s.x[k])) + "," + num(sy(s.band_hi[k])) + " ";
          for (std::size_t k = j; k-- > i;)
            points += num(sx(s.x[k])) + "," + num(sy(s.band_lo[k])) + " ";
          points.pop_back();
          out += std::string("<polygon points=\"") + points + "\" fill=\"" +
                 color + "\" fill-opacity=\"0.18\" stroke=\"none\"/>\n";
        }
        i = j > i ? j : i + 1;
      }
    }

    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j < n && std::isfinite(s.x[j]) && std::isfinite(s.y[j])) ++j;
      if (j == i) {
        ++i;
        continue;
      }
      if (j - i == 1) {
        out += std::string("<circle cx=\"") + num(sx(s.x[i])) + "\" cy=\"" +
               num(sy(s.y[i])) + "\" r=\"2.5\" fill=\"" + color + "\"/>\n";
      } else {
        std::string points;
        for (std::size_t k = i; k < j; ++k)
          points += num(sx(s.x[k])) + "," + num(sy(s.y[k])) + " ";
        points.pop_back();
        out += std::string("<polyline points=\"") + points +
               "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"1.5\"/>\n";
      }
      i = j;
    }
  }

  out += "<text x=\"" + num(kPanelW / 2) +
         "\" y=\"20\" font-size=\"14\" text-anchor=\"middle\" "
         "fill=\"#000000\">" +
         escape(plot.title) + "</text>\n";
  out += "<text x=\"" + num(kMarginL + kPlotW / 2) + "\" y=\"" +
         num(kPanelH - 14) +
         "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#000000\">" +
         escape(plot.x_label) + "</text>\n";
  out += "<text x=\"16\" y=\"" + num(kMarginT + kPlotH / 2) +
         "\" font-size=\"12\" text-anchor=\"middle\" fill=\"#000000\" "
         "transform=\"rotate(-90 16 " +
         num(kMarginT + kPlotH / 2) + ")\">" +
         escape(plot.y_label) + "</text>\n";

  double ly = kMarginT + 14.0;
  color_index = 0;
  for (const auto& s : plot.series) {
    const char* color = kPalette[color_index % kPaletteSize];
    ++color_index;
    if (s.label.empty()) continue;
    double lx = kMarginL + kPlotW - 150.0;
    out += std::string("<line x1=\"") + num(lx) + "\" y1=\"" + num(ly - 4) +
           "\" x2=\"" + num(lx + 22) + "\" y2=\"" + num(ly - 4) +
           "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + num(lx + 28) + "\" y=\"" + num(ly) +
           "\" font-size=\"11\" fill=\"#202020\">" + escape(s.label) +
           "</text>\n";
    ly += 15.0;
  }

  double ay = 34.0;
  for (const auto& note : plot.annotations) {
    out += "<text x=\"" + num(kMarginL) + "\" y=\"" + num(ay) +
           "\" font-size=\"11\" fill=\"#8b0000\">" + escape(note) +
           "</text>\n";
    ay += 13.0;
  }
}

}  // namespace

std::string render_plots(const std::vector<PlotSpec>& plots) {
  const double width = kPanelW * std::max<std::size_t>(1, plots.size());
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    num(width) + "\" height=\"" + num(kPanelH) +
                    "\" viewBox=\"0 0 " + num(width) + " " + num(kPanelH) +
                    "\">\n<rect width=\"100%\" height=\"100%\" "
                    "fill=\"white\"/>\n";
  for (std::size_t p = 0; p < plots.size(); ++p) {
    out += "<g transform=\"translate(" + num(kPanelW * p) + ",0)\">\n";
    render_panel(plots[p], out);
    out += "</g>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace repdyn
