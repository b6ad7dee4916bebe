#pragma once

#include <vector>

#include "swtex/image.hpp"

namespace swtex {

struct PeriodicityPeak {
  int dy = 0;  ///< in [0, height)
  int dx = 0;  ///< in [0, width)
  double correlation = 0.0;
};

struct PeriodicityReport {
  bool degenerate = false;  ///< zero-variance input; no peaks computed
  double threshold = 0.5;
  std::vector<PeriodicityPeak> peaks;  ///< strongest first

  bool replica_suspected() const { return !degenerate && !peaks.empty(); }
};

/// Circular, variance-normalized autocorrelation of the luminance. Reports
/// off-origin local maxima (3x3, wrap-around) whose correlation exceeds
/// `threshold`, strongest first, at most `max_peaks` of them.
PeriodicityReport periodicity_diagnostic(const Image& img, double threshold = 0.5,
                                         int max_peaks = 16);

}  // namespace swtex
