#include "swtex/image.hpp"

#include <algorithm>
#include <cmath>

namespace swtex {

Image::Image(Tensor3f pixels) : pixels_(std::move(pixels)) {
  if (pixels_.channels() != kChannels) {
    throw_invalid("Image: expected 3 channels, got " +
                  std::to_string(pixels_.channels()));
  }
}

std::size_t Image::clamp_unit() {
  std::size_t changed = 0;
  for (float& v : pixels_.values()) {
    float c = std::clamp(v, 0.0f, 1.0f);
    if (std::isnan(v)) c = 0.0f;
    if (c != v) {
      v = c;
      ++changed;
    }
  }
  return changed;
}

std::array<double, Image::kChannels> Image::channel_means() const {
  std::array<double, kChannels> sum{};
  const auto values = pixels_.values();
  for (std::size_t i = 0; i < values.size(); ++i) sum[i % kChannels] += values[i];
  const double n = std::max(1, pixels_.pixels());
  for (double& s : sum) s /= n;
  return sum;
}

std::array<double, Image::kChannels> Image::channel_stddevs() const {
  const auto mean = channel_means();
  std::array<double, kChannels> acc{};
  const auto values = pixels_.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - mean[i % kChannels];
    acc[i % kChannels] += d * d;
  }
  const double n = std::max(1, pixels_.pixels());
  for (double& a : acc) a = std::sqrt(a / n);
  return acc;
}

Image Image::crop(int y0, int x0, int h, int w) const {
  if (y0 < 0 || x0 < 0 || h <= 0 || w <= 0 || y0 + h > height() ||
      x0 + w > width()) {
    throw_invalid("Image::crop: rectangle outside image");
  }
  Image out(h, w);
  for (int y = 0; y < h; ++y) {
    const float* src = &pixels_(y0 + y, x0, 0);
    std::copy(src, src + static_cast<std::ptrdiff_t>(w) * kChannels, &out.at(y, 0, 0));
  }
  return out;
}

}  // namespace swtex
