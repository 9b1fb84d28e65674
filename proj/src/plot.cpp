#include "plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>

namespace gne::plot {

namespace {

constexpr double kWidth = 640;
constexpr double kPanelHeight = 220;
constexpr double kLeft = 70;
constexpr double kRight = 20;
constexpr double kTop = 40;
constexpr double kGap = 50;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string esc(const std::string& s) {
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

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double exponent) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "1e%d", static_cast<int>(exponent));
  return buf;
}

}  // namespace

std::string convergence_svg(const std::vector<Series>& series, const std::string& title) {
  using Getter = std::function<double(const MetricsRow<double>&)>;
  const std::pair<const char*, Getter> panels[] = {
      {"normalized distance to equilibrium", [](const MetricsRow<double>& r) { return r.rel_dist_to_opt; }},
      {"dual disagreement", [](const MetricsRow<double>& r) { return r.disagreement; }},
      {"constraint violation", [](const MetricsRow<double>& r) { return r.violation; }},
  };
  const double plot_w = kWidth - kLeft - kRight;
  const double height = kTop + 3 * kPanelHeight + 3 * kGap;

  double max_iter = 1;
  for (const auto& s : series)
    for (const auto& r : s.trace->rows) max_iter = std::max(max_iter, static_cast<double>(r.iter));

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << height << "\" viewBox=\"0 0 " << kWidth << ' '
     << height << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << kWidth / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << esc(title) << "</text>\n";

  for (int p = 0; p < 3; ++p) {
    const auto& [label, get] = panels[p];
    const double top = kTop + p * (kPanelHeight + kGap);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& s : series) {
      for (const auto& r : s.trace->rows) {
        const double v = get(r);
        if (std::isfinite(v) && v > 0) {
          lo = std::min(lo, std::log10(v));
          hi = std::max(hi, std::log10(v));
        }
      }
    }
    if (!std::isfinite(lo)) {
      lo = -1;
      hi = 0;
    }
    lo = std::floor(lo);
    hi = std::max(std::ceil(hi), lo + 1);
    const auto ypos = [&](double lv) { return top + kPanelHeight * (hi - lv) / (hi - lo); };
    const auto xpos = [&](double it) { return kLeft + plot_w * it / max_iter; };

    os << "<g class=\"panel\" id=\"panel" << p << "\">\n";
    os << "<rect x=\"" << kLeft << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << kPanelHeight
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << kLeft << "\" y=\"" << num(top - 6) << "\">" << esc(label) << " (log scale)</text>\n";
    const double step = std::max(1.0, std::ceil((hi - lo) / 6));
    for (double e = lo; e <= hi + 1e-9; e += step) {
      const double y = ypos(e);
      os << "<line x1=\"" << kLeft << "\" x2=\"" << kLeft + plot_w << "\" y1=\"" << num(y) << "\" y2=\"" << num(y)
         << "\" stroke=\"#dddddd\"/>\n";
      os << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << tick(e) << "</text>\n";
    }
    os << "<text x=\"" << kLeft + plot_w << "\" y=\"" << num(top + kPanelHeight + 16) << "\" text-anchor=\"end\">epoch (max "
       << static_cast<long long>(max_iter) << ")</text>\n";
    for (std::size_t si = 0; si < series.size(); ++si) {
      os << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << kColors[si % 5] << "\" points=\"";
      bool first = true;
      for (const auto& r : series[si].trace->rows) {
        const double v = get(r);
        if (!(std::isfinite(v) && v > 0)) continue;
        if (!first) os << ' ';
        os << num(xpos(static_cast<double>(r.iter))) << ',' << num(ypos(std::log10(v)));
        first = false;
      }
      os << "\"/>\n";
      if (p == 0) {
        const double ly = top + 14 + 14 * static_cast<double>(si);
        os << "<text x=\"" << kLeft + plot_w - 8 << "\" y=\"" << num(ly) << "\" text-anchor=\"end\" fill=\"" << kColors[si % 5] << "\">"
           << esc(series[si].label) << "</text>\n";
      }
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace gne::plot
