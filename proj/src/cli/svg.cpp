#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "pitdep/cli.hpp"
#include "pitdep/error.hpp"

namespace pitdep::cli {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kMargin = 48.0;

std::string escape_xml(const std::string& s) {
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

}  // namespace

std::vector<Marker> influence_markers(const PitSample& sample, const PointwiseResult& pointwise,
                                      const std::set<std::size_t>& influential) {
  std::vector<double> sorted = sample.values;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  std::vector<Marker> markers;
  for (std::size_t test : influential) {
    if (test >= pointwise.p_values.size()) {
      throw Error(ErrorCode::IndexMismatch, "influential index " + std::to_string(test) +
                                                " outside the pointwise tests");
    }
    double x = 0.0;
    switch (pointwise.method) {
      case Method::PotC: x = pointwise.tested_quantity[test]; break;
      case Method::PritC: x = pointwise.partition[test]; break;
      default: x = sample.values[test]; break;
    }
    const auto count = std::upper_bound(sorted.begin(), sorted.end(), x + 1e-12) - sorted.begin();
    markers.push_back({test, x, static_cast<double>(count) / n - x});
  }
  return markers;
}

std::string render_svg(const std::vector<EcdfPoint>& points, const std::vector<Marker>& markers,
                       const std::string& title) {
  double span = 0.05;
  for (const auto& p : points) span = std::max(span, std::fabs(p.tilted));
  for (const auto& m : markers) span = std::max(span, std::fabs(m.tilted));
  span *= 1.1;
  const double plot_w = kWidth - 2 * kMargin;
  const double plot_h = kHeight - 2 * kMargin;
  auto sx = [&](double x) { return kMargin + x * plot_w; };
  auto sy = [&](double y) { return kMargin + (span - y) / (2 * span) * plot_h; };

  std::string svg = fmt::format(
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\">\n"
      "<title>{2}</title>\n"
      "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n",
      kWidth, kHeight, escape_xml(title));
  svg += fmt::format(
      "<rect x=\"{:.3f}\" y=\"{:.3f}\" width=\"{:.3f}\" height=\"{:.3f}\" fill=\"none\" "
      "stroke=\"#444444\"/>\n",
      kMargin, kMargin, plot_w, plot_h);
  // F(x) = x becomes the zero line after tilting.
  svg += fmt::format(
      "<line class=\"diagonal\" x1=\"{:.3f}\" y1=\"{:.3f}\" x2=\"{:.3f}\" y2=\"{:.3f}\" "
      "stroke=\"#888888\" stroke-dasharray=\"4 3\"/>\n",
      sx(0), sy(0), sx(1), sy(0));
  svg += fmt::format(
      "<text x=\"{:.3f}\" y=\"{:.3f}\" font-size=\"12\" text-anchor=\"middle\">PIT value</text>\n",
      kMargin + plot_w / 2, kHeight - 12.0);
  svg += fmt::format(
      "<text x=\"14\" y=\"{:.3f}\" font-size=\"12\" transform=\"rotate(-90 14 {:.3f})\" "
      "text-anchor=\"middle\">ECDF - x</text>\n",
      kMargin + plot_h / 2, kMargin + plot_h / 2);
  for (double tick : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    svg += fmt::format(
        "<text x=\"{:.3f}\" y=\"{:.3f}\" font-size=\"10\" text-anchor=\"middle\">{:g}</text>\n",
        sx(tick), kHeight - kMargin + 14.0, tick);
  }
  svg += fmt::format(
      "<text x=\"{:.3f}\" y=\"{:.3f}\" font-size=\"10\" text-anchor=\"end\">{:.3g}</text>\n"
      "<text x=\"{:.3f}\" y=\"{:.3f}\" font-size=\"10\" text-anchor=\"end\">{:.3g}</text>\n",
      kMargin - 4, sy(span) + 4, span, kMargin - 4, sy(-span) + 4, -span);

  // Step function of the tilted ECDF.
  std::string path = fmt::format("M{:.3f},{:.3f}", sx(0), sy(0));
  double level = 0.0;
  for (const auto& p : points) {
    path += fmt::format(" L{:.3f},{:.3f} L{:.3f},{:.3f}", sx(p.x), sy(level - p.x), sx(p.x),
                        sy(p.ecdf - p.x));
    level = p.ecdf;
  }
  path += fmt::format(" L{:.3f},{:.3f}", sx(1), sy(level - 1.0));
  svg += fmt::format(
      "<path class=\"ecdf\" d=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\n",
      path);

  for (const auto& m : markers) {
    svg += fmt::format(
        "<circle class=\"influential\" data-test=\"{}\" cx=\"{:.3f}\" cy=\"{:.3f}\" r=\"4\" "
        "fill=\"#d62728\"/>\n",
        m.test_index, sx(m.x), sy(m.tilted));
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace pitdep::cli
