#include "swtex_cli/grid.hpp"

#include <algorithm>
#include <opencv2/imgproc.hpp>

#include "swtex/errors.hpp"

namespace swtex::cli {

Image thumbnail(const Image& img, int size) {
  if (img.height() == size && img.width() == size) return img;
  cv::Mat src(img.height(), img.width(), CV_32FC3,
              const_cast<float*>(img.tensor().data()));
  cv::Mat dst;
  const bool shrink = img.height() > size || img.width() > size;
  cv::resize(src, dst, cv::Size(size, size), 0, 0, shrink ? cv::INTER_AREA : cv::INTER_LINEAR);
  Image out(size, size);
  std::copy(dst.ptr<float>(), dst.ptr<float>() + static_cast<std::size_t>(size) * size * 3,
            out.tensor().data());
  out.clamp_unit();
  return out;
}

Image compose_grid(const std::vector<std::vector<std::optional<Image>>>& rows, int tile,
                   int gutter) {
  if (tile <= 0 || gutter < 0) throw_invalid("compose_grid: bad tile or gutter size");
  std::size_t cols = 0;
  for (const auto& r : rows) cols = std::max(cols, r.size());
  const int cell = tile + gutter;
  Image grid(static_cast<int>(rows.size()) * cell, static_cast<int>(cols) * cell, 1.0f);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (!rows[r][c]) continue;
      const Image t = thumbnail(*rows[r][c], tile);
      for (int y = 0; y < tile; ++y) {
        for (int x = 0; x < tile; ++x) {
          for (int ch = 0; ch < 3; ++ch) {
            grid.at(static_cast<int>(r) * cell + y, static_cast<int>(c) * cell + x, ch) =
                t.at(y, x, ch);
          }
        }
      }
    }
  }
  return grid;
}

}  // namespace swtex::cli
