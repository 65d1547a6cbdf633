#pragma once

#include "foehn/aggregate.hpp"
#include "foehn/decompose.hpp"
#include "foehn/evaluate.hpp"
#include "foehn/reconstruct.hpp"

#include <string>
#include <vector>

namespace foehn {

/// Standalone SVG documents with axes, labels and a legend. Output is a pure
/// function of the input; empty input raises ValueError.
std::string render_annual_svg(const std::vector<ReconstructionYear>& rows, const std::string& title);
/// Trend with its 95% band (drawn first, beneath the line) over the monthly values.
std::string render_trend_svg(const StrFit& fit, const std::string& title);
std::string render_decade_svg(const DecadeSeasonal& d, const std::string& title);
/// Month x hour heatmap; colors are binned into ten classes and the legend
/// lists the classes that occur.
std::string render_hovmoller_svg(const HovmollerMatrix& m, const std::string& title);
/// Mean test Brier score per station, learner and variable set as bars.
std::string render_brier_svg(const ScoreReport& report, const std::string& title);

} // namespace foehn
