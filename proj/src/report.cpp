#include "mlmc_seis/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "mlmc_seis/error.hpp"

namespace mlmcseis {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw ConfigError("csv: row width does not match header");
  rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out << (k ? "," : "") << cells[k];
    out << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

void CsvTable::write(const std::filesystem::path& path) const { write_text(path, str()); }

namespace {

std::string esc(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

std::string fixed(double x, int digits = 2) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

std::string tick_label(double decade) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "1e%d", static_cast<int>(decade));
  return buf;
}

}  // namespace

std::string svg_loglog(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                       const std::vector<PlotSeries>& series) {
  constexpr double W = 640, H = 440, ml = 80, mr = 170, mt = 40, mb = 60;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      if (!(s.x[k] > 0.0 && s.y[k] > 0.0)) continue;
      x0 = std::min(x0, std::log10(s.x[k]));
      x1 = std::max(x1, std::log10(s.x[k]));
      y0 = std::min(y0, std::log10(s.y[k]));
      y1 = std::max(y1, std::log10(s.y[k]));
    }
  const bool empty = !std::isfinite(x0);
  if (empty) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  x0 = std::floor(x0), x1 = std::max(std::ceil(x1), x0 + 1);
  y0 = std::floor(y0), y1 = std::max(std::ceil(y1), y0 + 1);
  auto px = [&](double lx) { return ml + (lx - x0) / (x1 - x0) * (W - ml - mr); };
  auto py = [&](double ly) { return H - mb - (ly - y0) / (y1 - y0) * (H - mt - mb); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << fixed(W / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << esc(title) << "</text>\n";
  o << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double d = x0; d <= x1 + 1e-9; d += 1.0) {
    o << "<line x1=\"" << fixed(px(d)) << "\" y1=\"" << fixed(H - mb) << "\" x2=\"" << fixed(px(d)) << "\" y2=\""
      << fixed(mt) << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << fixed(px(d)) << "\" y=\"" << fixed(H - mb + 16) << "\" text-anchor=\"middle\">"
      << tick_label(d) << "</text>\n";
  }
  for (double d = y0; d <= y1 + 1e-9; d += 1.0) {
    o << "<line x1=\"" << fixed(ml) << "\" y1=\"" << fixed(py(d)) << "\" x2=\"" << fixed(W - mr) << "\" y2=\""
      << fixed(py(d)) << "\" stroke=\"#ddd\"/>\n";
    o << "<text x=\"" << fixed(ml - 6) << "\" y=\"" << fixed(py(d) + 4) << "\" text-anchor=\"end\">"
      << tick_label(d) << "</text>\n";
  }
  o << "<text x=\"" << fixed((ml + W - mr) / 2) << "\" y=\"" << fixed(H - 18) << "\" text-anchor=\"middle\">"
    << esc(xlabel) << "</text>\n";
  o << "<text x=\"18\" y=\"" << fixed((mt + H - mb) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << fixed((mt + H - mb) / 2) << ")\">" << esc(ylabel) << "</text>\n";
  int legend = 0;
  for (const auto& s : series) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k)
      if (s.x[k] > 0.0 && s.y[k] > 0.0) pts.emplace_back(px(std::log10(s.x[k])), py(std::log10(s.y[k])));
    if (s.markers_only) {
      for (const auto& [x, y] : pts)
        o << "<circle cx=\"" << fixed(x) << "\" cy=\"" << fixed(y) << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
    } else if (!pts.empty()) {
      o << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
        << (s.dashed ? " stroke-dasharray=\"5,4\"" : "") << " points=\"";
      for (const auto& [x, y] : pts) o << fixed(x) << "," << fixed(y) << " ";
      o << "\"/>\n";
    }
    const double ly = mt + 14 + 18 * legend++;
    o << "<line x1=\"" << fixed(W - mr + 10) << "\" y1=\"" << fixed(ly - 4) << "\" x2=\"" << fixed(W - mr + 30)
      << "\" y2=\"" << fixed(ly - 4) << "\" stroke=\"" << s.color << "\" stroke-width=\"2\""
      << (s.dashed ? " stroke-dasharray=\"5,4\"" : "") << "/>\n";
    o << "<text x=\"" << fixed(W - mr + 35) << "\" y=\"" << fixed(ly) << "\">" << esc(s.label) << "</text>\n";
  }
  if (empty)
    o << "<text x=\"" << fixed((ml + W - mr) / 2) << "\" y=\"" << fixed((mt + H - mb) / 2)
      << "\" text-anchor=\"middle\" fill=\"#888\">no data</text>\n";
  o << "</svg>\n";
  return o.str();
}

}  // namespace mlmcseis
