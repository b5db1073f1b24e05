#pragma once

#include <string>

#include "topolow/metrics.hpp"

namespace topolow::cli {

/// Shepard scatter (embedded distance against true dissimilarity) with the
/// identity line and axis labels.
std::string shepard_svg(const ShepardPairs& pairs, const std::string& title);

}  // namespace topolow::cli
