#include "svg.hpp"

#include <algorithm>
#include <sstream>

#include "topolow/csv_io.hpp"

namespace topolow::cli {

namespace {

constexpr double kSize = 480.0;
constexpr double kMargin = 56.0;

std::string f(double v) { return csv::format_number(v, 6); }

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
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

std::string shepard_svg(const ShepardPairs& pairs, const std::string& title) {
  double hi = 0.0;
  for (const auto& p : pairs) hi = std::max({hi, p.truth, p.embedded});
  if (!(hi > 0.0)) hi = 1.0;
  const double plot = kSize - 2.0 * kMargin;
  auto x = [&](double v) { return kMargin + plot * v / hi; };
  auto y = [&](double v) { return kSize - kMargin - plot * v / hi; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize
      << "\" viewBox=\"0 0 " << kSize << ' ' << kSize << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << kSize << "\" height=\"" << kSize << "\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kSize / 2 << "\" y=\"" << kMargin / 2 << "\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(title) << "</text>\n";
  svg << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << plot << "\" height=\"" << plot
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << f(x(0)) << "\" y1=\"" << f(y(0)) << "\" x2=\"" << f(x(hi)) << "\" y2=\"" << f(y(hi))
      << "\" stroke=\"grey\" stroke-dasharray=\"4 3\"/>\n";
  svg << "<g fill=\"steelblue\" fill-opacity=\"0.6\">\n";
  for (const auto& p : pairs)
    svg << "<circle cx=\"" << f(x(p.truth)) << "\" cy=\"" << f(y(p.embedded)) << "\" r=\"2\"/>\n";
  svg << "</g>\n";
  svg << "<text x=\"" << kSize / 2 << "\" y=\"" << kSize - kMargin / 3
      << "\" text-anchor=\"middle\" font-size=\"12\">true dissimilarity</text>\n";
  svg << "<text x=\"" << kMargin / 3 << "\" y=\"" << kSize / 2 << "\" text-anchor=\"middle\" font-size=\"12\" "
      << "transform=\"rotate(-90 " << kMargin / 3 << ' ' << kSize / 2 << ")\">embedded distance</text>\n";
  svg << "<text x=\"" << kMargin << "\" y=\"" << kSize - kMargin + 14 << "\" font-size=\"10\">0</text>\n";
  svg << "<text x=\"" << kSize - kMargin << "\" y=\"" << kSize - kMargin + 14
      << "\" text-anchor=\"end\" font-size=\"10\">" << f(hi) << "</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace topolow::cli
