#pragma once

#include <gne/metrics.hpp>

#include <string>
#include <vector>

namespace gne::plot {

struct Series {
  std::string label;
  const MetricsTrace<double>* trace;
};

/// Three stacked panels with log-scale y axes: normalized distance to the
/// equilibrium, dual disagreement, and constraint violation, against epochs.
/// Non-positive and non-finite samples are skipped.
std::string convergence_svg(const std::vector<Series>& series, const std::string& title);

}  // namespace gne::plot
