#pragma once

#include <array>

#include "swtex/tensor.hpp"

namespace swtex {

/// RGB raster with float channels in [0,1], sRGB interpretation.
class Image {
 public:
  static constexpr int kChannels = 3;

  Image() = default;
  Image(int height, int width, float fill = 0.0f)
      : pixels_(height, width, kChannels, fill) {}
  explicit Image(Tensor3f pixels);

  int height() const { return pixels_.height(); }
  int width() const { return pixels_.width(); }
  bool empty() const { return pixels_.empty(); }

  float& at(int y, int x, int c) { return pixels_(y, x, c); }
  float at(int y, int x, int c) const { return pixels_(y, x, c); }

  Tensor3f& tensor() { return pixels_; }
  const Tensor3f& tensor() const { return pixels_; }

  bool same_size(const Image& other) const {
    return height() == other.height() && width() == other.width();
  }

  /// Clamp every channel value into [0,1]; returns the number of values changed.
  std::size_t clamp_unit();

  std::array<double, kChannels> channel_means() const;
  std::array<double, kChannels> channel_stddevs() const;

  /// Axis-aligned sub-image; the rectangle must lie inside the image.
  Image crop(int y0, int x0, int height, int width) const;

  friend bool operator==(const Image& a, const Image& b) {
    return a.pixels_ == b.pixels_;
  }

 private:
  Tensor3f pixels_;
};

}  // namespace swtex
