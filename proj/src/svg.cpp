#include "stochot/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "stochot/io.hpp"

namespace stochot {

namespace {

constexpr double kWidth = 720, kHeight = 480;
constexpr double kLeft = 70, kRight = 580, kTop = 44, kBottom = 430;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (ch == '&')
      out += "&amp;";
    else if (ch == '<')
      out += "&lt;";
    else if (ch == '>')
      out += "&gt;";
    else
      out += ch;
  }
  return out;
}

std::string px(double v) { return format_double(std::round(v * 100.0) / 100.0); }

bool usable(double v, bool logscale) {
  return std::isfinite(v) && (!logscale || v > 0.0);
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void take(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
};

double nice_step(double raw) {
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double frac = raw / mag;
  if (frac <= 1.0) return mag;
  if (frac <= 2.0) return 2.0 * mag;
  if (frac <= 5.0) return 5.0 * mag;
  return 10.0 * mag;
}

std::string tick_label(double v, bool logscale) {
  if (logscale) {
    std::ostringstream os;
    os << "1e" << static_cast<long>(std::lround(v));
    return os.str();
  }
  return format_double(v);
}

}  // namespace

std::string render_svg(const std::vector<SvgSeries>& series, const SvgAxes& axes) {
  if (series.empty()) throw std::invalid_argument("render_svg: no series");
  for (const SvgSeries& s : series)
    if (s.x.size() != s.y.size())
      throw std::invalid_argument("render_svg: series '" + s.label + "' has ragged data");

  Range rx, ry;
  bool any = false;
  for (const SvgSeries& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(s.x[i], axes.logx) || !usable(s.y[i], axes.logy)) continue;
      rx.take(axes.logx ? std::log10(s.x[i]) : s.x[i]);
      ry.take(axes.logy ? std::log10(s.y[i]) : s.y[i]);
      any = true;
    }
  }
  if (!any) throw std::invalid_argument("render_svg: no plottable points");
  if (rx.hi - rx.lo < 1e-12) {
    rx.lo -= 0.5;
    rx.hi += 0.5;
  }
  if (ry.hi - ry.lo < 1e-12) {
    ry.lo -= 0.5;
    ry.hi += 0.5;
  }

  auto sx = [&](double v) {
    double t = (axes.logx ? std::log10(v) : v);
    return kLeft + (t - rx.lo) / (rx.hi - rx.lo) * (kRight - kLeft);
  };
  auto sy = [&](double v) {
    double t = (axes.logy ? std::log10(v) : v);
    return kBottom - (t - ry.lo) / (ry.hi - ry.lo) * (kBottom - kTop);
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"24\" text-anchor=\"middle\" "
      << "font-family=\"sans-serif\" font-size=\"16\">" << escape(axes.title) << "</text>\n";

  // axes frame
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kRight - kLeft
      << "\" height=\"" << kBottom - kTop << "\" fill=\"none\" stroke=\"#333333\"/>\n";

  auto draw_ticks = [&](bool xaxis, bool logscale, const Range& r) {
    std::vector<double> ticks;
    if (logscale) {
      long d0 = static_cast<long>(std::ceil(r.lo - 1e-9));
      long d1 = static_cast<long>(std::floor(r.hi + 1e-9));
      long step = std::max<long>(1, (d1 - d0) / 8 + ((d1 - d0) % 8 ? 1 : 0));
      for (long d = d0; d <= d1; d += step) ticks.push_back(static_cast<double>(d));
    } else {
      double step = nice_step((r.hi - r.lo) / 4.0);
      for (double t = std::ceil(r.lo / step) * step; t <= r.hi + 1e-9 * step; t += step)
        ticks.push_back(t);
    }
    for (double t : ticks) {
      if (xaxis) {
        double p = kLeft + (t - r.lo) / (r.hi - r.lo) * (kRight - kLeft);
        out << "<line x1=\"" << px(p) << "\" y1=\"" << kBottom << "\" x2=\"" << px(p)
            << "\" y2=\"" << kBottom + 5 << "\" stroke=\"#333333\"/>\n";
        out << "<text x=\"" << px(p) << "\" y=\"" << kBottom + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << tick_label(t, logscale) << "</text>\n";
      } else {
        double p = kBottom - (t - r.lo) / (r.hi - r.lo) * (kBottom - kTop);
        out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << px(p) << "\" x2=\"" << kLeft
            << "\" y2=\"" << px(p) << "\" stroke=\"#333333\"/>\n";
        out << "<text x=\"" << kLeft - 8 << "\" y=\"" << px(p + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << tick_label(t, logscale) << "</text>\n";
      }
    }
  };
  draw_ticks(true, axes.logx, rx);
  draw_ticks(false, axes.logy, ry);

  out << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << kBottom + 38
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << escape(axes.xlabel) << "</text>\n";
  out << "<text x=\"20\" y=\"" << (kTop + kBottom) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
      << "transform=\"rotate(-90 20 " << (kTop + kBottom) / 2 << ")\">" << escape(axes.ylabel)
      << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const SvgSeries& s = series[si];
    const char* color = kPalette[si % kPaletteSize];
    std::ostringstream pts;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(s.x[i], axes.logx) || !usable(s.y[i], axes.logy)) continue;
      if (pts.tellp() > 0) pts << ' ';
      pts << px(sx(s.x[i])) << ',' << px(sy(s.y[i]));
    }
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\""
        << pts.str() << "\"/>\n";
    double ly = kTop + 16 + 18 * static_cast<double>(si);
    out << "<line x1=\"" << kRight + 10 << "\" y1=\"" << px(ly - 4) << "\" x2=\""
        << kRight + 34 << "\" y2=\"" << px(ly - 4) << "\" stroke=\"" << color
        << "\" stroke-width=\"1.5\"/>\n";
    out << "<text x=\"" << kRight + 40 << "\" y=\"" << px(ly)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(s.label) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void emit_svg(const std::string& path, const std::vector<SvgSeries>& series,
              const SvgAxes& axes) {
  std::string body = render_svg(series, axes);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::invalid_argument("emit_svg: cannot open " + path);
  out << body;
}

}  // namespace stochot
