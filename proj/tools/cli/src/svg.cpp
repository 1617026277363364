#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

namespace hmrgeom::cli {

namespace {

constexpr double kWidth = 760.0;
constexpr double kHeight = 460.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 80.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;
constexpr int kTicks = 5;

constexpr const char* kErrorColor = "#a6cee3";  // light blue
constexpr const char* kPaColor = "#6082b6";     // glaucous
constexpr const char* kTruthColor = "#2ca02c";
constexpr const char* kPairColor = "#d62728";

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

std::string px(double v) { return fmt("%.2f", v); }

struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  double from = 0.0;  // screen coordinate of lo
  double to = 1.0;    // screen coordinate of hi

  double map(double v) const { return from + (v - lo) / (hi - lo) * (to - from); }
};

double nice_max(double v, double floor) { return std::max(v * 1.2, floor); }

}  // namespace

std::string ambiguity_svg(const HeightSweepResult& sweep, std::optional<double> true_height) {
  double hmin = sweep.heights.front();
  double hmax = sweep.heights.front();
  double emax = 0.0;
  double pmax = 0.0;
  for (const auto& e : sweep.entries) {
    hmin = std::min(hmin, e.target_height);
    hmax = std::max(hmax, e.target_height);
    if (e.ok()) {
      emax = std::max(emax, e.fit->mean_kp2d_error);
      pmax = std::max(pmax, e.pa_mpjpe_to_reference.value_or(0.0));
    }
  }
  if (true_height) {
    hmin = std::min(hmin, *true_height);
    hmax = std::max(hmax, *true_height);
  }
  const double pad = std::max(0.05 * (hmax - hmin), 0.01);

  const Axis x{hmin - pad, hmax + pad, kLeft, kWidth - kRight};
  const Axis err{0.0, nice_max(emax, 0.5), kHeight - kBottom, kTop};
  const Axis pa{0.0, nice_max(pmax, 1.0), kHeight - kBottom, kTop};

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(kWidth) + "\" height=\"" +
       px(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Frame and ticks.
  s += "<path d=\"M" + px(kLeft) + " " + px(kTop) + " V" + px(kHeight - kBottom) + " H" +
       px(kWidth - kRight) + " V" + px(kTop) + "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= kTicks; ++i) {
    const double t = static_cast<double>(i) / kTicks;
    const double hv = x.lo + t * (x.hi - x.lo);
    const double sx = x.map(hv);
    s += "<path d=\"M" + px(sx) + " " + px(kHeight - kBottom) + " v5\" stroke=\"black\"/>\n";
    s += "<text x=\"" + px(sx) + "\" y=\"" + px(kHeight - kBottom + 20) +
         "\" text-anchor=\"middle\">" + fmt("%.3f", hv) + "</text>\n";

    const double ev = err.lo + t * (err.hi - err.lo);
    const double sy = err.map(ev);
    s += "<path d=\"M" + px(kLeft) + " " + px(sy) + " h-5\" stroke=\"black\"/>\n";
    s += "<text x=\"" + px(kLeft - 8) + "\" y=\"" + px(sy + 4) + "\" text-anchor=\"end\">" +
         fmt("%.3g", ev) + "</text>\n";

    const double pv = pa.lo + t * (pa.hi - pa.lo);
    s += "<path d=\"M" + px(kWidth - kRight) + " " + px(sy) + " h5\" stroke=\"black\"/>\n";
    s += "<text x=\"" + px(kWidth - kRight + 8) + "\" y=\"" + px(sy + 4) + "\">" +
         fmt("%.3g", pv) + "</text>\n";
  }
  s += "<text x=\"" + px(0.5 * (kLeft + kWidth - kRight)) + "\" y=\"" + px(kHeight - 15) +
       "\" text-anchor=\"middle\">body height (m)</text>\n";
  s += "<text transform=\"translate(22 " + px(0.5 * kHeight) +
       ") rotate(-90)\" text-anchor=\"middle\" fill=\"" + std::string(kErrorColor) +
       "\">mean 2D keypoint error (px)</text>\n";
  s += "<text transform=\"translate(" + px(kWidth - 22) + " " + px(0.5 * kHeight) +
       ") rotate(90)\" text-anchor=\"middle\" fill=\"" + std::string(kPaColor) +
       "\">PA-MPJPE to reference (mm)</text>\n";

  if (true_height) {
    const double sx = x.map(*true_height);
    s += "<path d=\"M" + px(sx) + " " + px(kTop) + " V" + px(kHeight - kBottom) +
         "\" stroke=\"" + kTruthColor + "\" stroke-dasharray=\"6 4\"/>\n";
    s += "<text x=\"" + px(sx) + "\" y=\"" + px(kTop - 8) + "\" text-anchor=\"middle\" fill=\"" +
         kTruthColor + "\">true height</text>\n";
  }

  if (sweep.max_pair) {
    const auto& a = sweep.entries[static_cast<std::size_t>(sweep.max_pair->first)];
    const auto& b = sweep.entries[static_cast<std::size_t>(sweep.max_pair->second)];
    s += "<path d=\"M" + px(x.map(a.target_height)) + " " +
         px(pa.map(a.pa_mpjpe_to_reference.value_or(0.0))) + " L" + px(x.map(b.target_height)) +
         " " + px(pa.map(b.pa_mpjpe_to_reference.value_or(0.0))) + "\" stroke=\"" + kPairColor +
         "\" stroke-width=\"2\"/>\n";
    s += "<text x=\"" + px(kLeft + 10) + "\" y=\"" + px(kTop + 16) + "\" fill=\"" + kPairColor +
         "\">max pairwise PA-MPJPE " + fmt("%.3f", sweep.max_pairwise_pa_mpjpe) + " mm</text>\n";
  }

  for (const auto& e : sweep.entries) {
    if (!e.ok()) {
      continue;
    }
    const double sx = x.map(e.target_height);
    s += "<circle cx=\"" + px(sx) + "\" cy=\"" + px(err.map(e.fit->mean_kp2d_error)) +
         "\" r=\"5\" fill=\"" + kErrorColor + "\" stroke=\"black\" stroke-width=\"0.5\"/>\n";
    s += "<circle cx=\"" + px(sx) + "\" cy=\"" + px(pa.map(e.pa_mpjpe_to_reference.value_or(0.0))) +
         "\" r=\"5\" fill=\"" + kPaColor + "\" stroke=\"black\" stroke-width=\"0.5\"/>\n";
  }
  s += "</svg>\n";
  return s;
}

}  // namespace hmrgeom::cli
