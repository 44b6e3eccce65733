#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace mlmcseis {

// Minimal CSV table with full-precision numbers.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add_row(std::vector<std::string> cells);
  std::string str() const;
  void write(const std::filesystem::path& path) const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string num(double x);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers_only = false;
  std::string color = "#1f77b4";
  bool dashed = false;
};

// Static log-log line/scatter plot.  Non-positive points are skipped.
std::string svg_loglog(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                       const std::vector<PlotSeries>& series);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace mlmcseis
