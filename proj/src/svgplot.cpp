#include "cltrojan/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "cltrojan/errors.hpp"

namespace clt {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 610, kTop = 50, kBottom = 370;
const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

struct Range {
  double lo = 0, hi = 1;
  double map(double v, double pixLo, double pixHi) const {
    return pixLo + (v - lo) / (hi - lo) * (pixHi - pixLo);
  }
};

Range padRange(double lo, double hi) {
  if (!(lo <= hi)) throw std::invalid_argument("plot: non-finite data range");
  if (lo == hi) {
    const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
    return {lo - pad, hi + pad};
  }
  const double pad = (hi - lo) * 0.05;
  return {lo - pad, hi + pad};
}

void openSvg(std::ofstream& out, const std::string& path, const std::string& title,
             const std::string& xLabel, const std::string& yLabel) {
  out.open(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"28\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << escape(title) << "</text>\n"
      << "<text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << kHeight - 8
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << escape(xLabel) << "</text>\n"
      << "<text x=\"18\" y=\"" << (kTop + kBottom) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
         "transform=\"rotate(-90 18 "
      << (kTop + kBottom) / 2 << ")\">" << escape(yLabel) << "</text>\n"
      << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kRight - kLeft
      << "\" height=\"" << kBottom - kTop << "\" fill=\"none\" stroke=\"black\"/>\n";
}

void drawTicks(std::ofstream& out, const Range& rx, const Range& ry) {
  for (int i = 0; i <= 5; i++) {
    const double fx = rx.lo + (rx.hi - rx.lo) * i / 5.0;
    const double px = rx.map(fx, kLeft, kRight);
    out << "<line x1=\"" << px << "\" y1=\"" << kBottom << "\" x2=\"" << px << "\" y2=\""
        << kBottom + 5 << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << px << "\" y=\"" << kBottom + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << num(fx)
        << "</text>\n";
    const double fy = ry.lo + (ry.hi - ry.lo) * i / 5.0;
    const double py = ry.map(fy, kBottom, kTop);
    out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << py << "\" x2=\"" << kLeft << "\" y2=\""
        << py << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << kLeft - 8 << "\" y=\"" << py + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(fy)
        << "</text>\n";
  }
}

}  // namespace

void writeLinePlot(const std::string& path, const std::string& title, const std::string& xLabel,
                   const std::string& yLabel, const std::vector<PlotSeries>& series) {
  if (series.empty()) throw std::invalid_argument("plot: no series");
  double xLo = 1e300, xHi = -1e300, yLo = 1e300, yHi = -1e300;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size() || s.x.empty())
      throw std::invalid_argument("plot: series '" + s.label + "' is empty or ragged");
    for (std::size_t i = 0; i < s.x.size(); i++) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
        throw std::invalid_argument("plot: non-finite point in '" + s.label + "'");
      xLo = std::min(xLo, s.x[i]);
      xHi = std::max(xHi, s.x[i]);
      yLo = std::min(yLo, s.y[i]);
      yHi = std::max(yHi, s.y[i]);
    }
  }
  const Range rx = padRange(xLo, xHi), ry = padRange(yLo, yHi);

  std::ofstream out;
  openSvg(out, path, title, xLabel, yLabel);
  drawTicks(out, rx, ry);
  for (std::size_t si = 0; si < series.size(); si++) {
    const auto& s = series[si];
    const char* color = kPalette[si % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); i++)
      out << num(rx.map(s.x[i], kLeft, kRight)) << "," << num(ry.map(s.y[i], kBottom, kTop))
          << (i + 1 < s.x.size() ? " " : "");
    out << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); i++)
      out << "<circle cx=\"" << num(rx.map(s.x[i], kLeft, kRight)) << "\" cy=\""
          << num(ry.map(s.y[i], kBottom, kTop)) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    const double ly = kTop + 16 + 18 * (double)si;
    out << "<line x1=\"" << kRight - 120 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kRight - 96
        << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << kRight - 90 << "\" y=\"" << ly
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(s.label) << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw IoError("short write to " + path);
}

void writeBarPlot(const std::string& path, const std::string& title, const std::string& xLabel,
                  const std::string& yLabel, const std::vector<std::string>& labels,
                  const std::vector<double>& values) {
  if (labels.size() != values.size() || labels.empty())
    throw std::invalid_argument("plot: labels and values must match and be non-empty");
  double lo = 0, hi = 0;
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("plot: non-finite bar value");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const Range ry = padRange(lo, hi);

  std::ofstream out;
  openSvg(out, path, title, xLabel, yLabel);
  for (int i = 0; i <= 5; i++) {
    const double fy = ry.lo + (ry.hi - ry.lo) * i / 5.0;
    const double py = ry.map(fy, kBottom, kTop);
    out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << py << "\" x2=\"" << kLeft << "\" y2=\""
        << py << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << kLeft - 8 << "\" y=\"" << py + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(fy)
        << "</text>\n";
  }
  const double slot = (kRight - kLeft) / (double)labels.size();
  const double y0 = ry.map(std::max(0.0, ry.lo), kBottom, kTop);
  for (std::size_t i = 0; i < labels.size(); i++) {
    const double cx = kLeft + slot * ((double)i + 0.5);
    const double yv = ry.map(values[i], kBottom, kTop);
    out << "<rect x=\"" << num(cx - slot * 0.3) << "\" y=\"" << num(std::min(yv, y0))
        << "\" width=\"" << num(slot * 0.6) << "\" height=\"" << num(std::abs(y0 - yv))
        << "\" fill=\"" << kPalette[0] << "\"/>\n"
        << "<text x=\"" << num(cx) << "\" y=\"" << kBottom + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << escape(labels[i]) << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) throw IoError("short write to " + path);
}

}  // namespace clt
