#include "swtex/periodicity.hpp"

#include <algorithm>
#include <opencv2/core.hpp>

namespace swtex {

PeriodicityReport periodicity_diagnostic(const Image& img, double threshold, int max_peaks) {
  PeriodicityReport report;
  report.threshold = threshold;
  const int h = img.height(), w = img.width();
  cv::Mat lum(h, w, CV_64F);
  double mean = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = 0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) + 0.114 * img.at(y, x, 2);
      lum.at<double>(y, x) = v;
      mean += v;
    }
  }
  mean /= std::max(1, h * w);
  lum -= mean;
  const double var = lum.dot(lum) / std::max(1, h * w);
  if (h * w == 0 || var < 1e-12) {
    report.degenerate = true;
    return report;
  }

  cv::Mat spectrum, power, acf;
  cv::dft(lum, spectrum, cv::DFT_COMPLEX_OUTPUT);
  cv::mulSpectrums(spectrum, spectrum, power, 0, /*conjB=*/true);
  cv::dft(power, acf, cv::DFT_INVERSE | cv::DFT_REAL_OUTPUT | cv::DFT_SCALE);
  acf /= (var * h * w);

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (y == 0 && x == 0) continue;
      const double v = acf.at<double>(y, x);
      if (v <= threshold) continue;
      bool is_max = true;
      for (int dy = -1; dy <= 1 && is_max; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dy == 0 && dx == 0) continue;
          const int ny = (y + dy + h) % h, nx = (x + dx + w) % w;
          if (acf.at<double>(ny, nx) > v) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) report.peaks.push_back({y, x, v});
    }
  }
  std::stable_sort(report.peaks.begin(), report.peaks.end(),
                   [](const auto& a, const auto& b) { return a.correlation > b.correlation; });
  if (static_cast<int>(report.peaks.size()) > max_peaks) report.peaks.resize(max_peaks);
  return report;
}

}  // namespace swtex
