#pragma once

#include <string>
#include <vector>

namespace clt {

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;  // same length
};

// Standalone SVG line chart: axes, ticks, point markers, legend. Output is
// deterministic text so plots can be diffed across runs.
void writeLinePlot(const std::string& path, const std::string& title, const std::string& xLabel,
                   const std::string& yLabel, const std::vector<PlotSeries>& series);

// Standalone SVG bar chart, one labeled bar per value.
void writeBarPlot(const std::string& path, const std::string& title, const std::string& xLabel,
                  const std::string& yLabel, const std::vector<std::string>& labels,
                  const std::vector<double>& values);

}  // namespace clt
