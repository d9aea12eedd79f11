#pragma once

// Markdown rendering of a results bundle.

#include <string>

#include "vop/pipeline.hpp"

namespace vop {

// Whole-currency display: 4500 -> "$4,500", -7787.4 -> "-$7,787".
std::string format_currency(double value);

std::string render_report(const ResultsBundle& bundle);

}  // namespace vop
