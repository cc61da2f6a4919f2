#pragma once

#include <string>

#include "peerperf/trend.hpp"

namespace peerperf {

// Line chart of a ratio series (in percent) with a dashed fitted-trend
// overlay. Deterministic byte output: exactly two <path> elements, the series
// and the trend line.
std::string render_ratio_svg(const RatioSeries& series, const std::string& title);

void write_ratio_svg(const RatioSeries& series, const std::string& title,
                     const std::string& path);

}  // namespace peerperf
