#include "swtex/resample.hpp"

#include <cmath>
#include <vector>

#include "swtex/errors.hpp"

namespace swtex {
namespace {

double cubic(double x) {
  constexpr double a = -0.5;
  x = std::abs(x);
  if (x < 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return (((x - 5.0) * x + 8.0) * x - 4.0) * a;
  return 0.0;
}

struct Taps {
  int first = 0;
  std::vector<double> weights;
};

// Normalized filter taps for each output sample of a 1D reduction.
std::vector<Taps> reduction_taps(int in_size, int factor) {
  const int out_size = in_size / factor;
  const double support = 2.0 * factor;
  std::vector<Taps> taps(out_size);
  for (int i = 0; i < out_size; ++i) {
    const double center = (i + 0.5) * factor;
    const int lo = std::max(0, static_cast<int>(std::floor(center - support)));
    const int hi = std::min(in_size - 1, static_cast<int>(std::ceil(center + support)));
    Taps& t = taps[i];
    t.first = lo;
    double sum = 0.0;
    for (int x = lo; x <= hi; ++x) {
      const double w = cubic((x + 0.5 - center) / factor);
      t.weights.push_back(w);
      sum += w;
    }
    for (double& w : t.weights) w /= sum;
  }
  return taps;
}

}  // namespace

Image downsample(const Image& img, int factor) {
  if (factor <= 0 || (factor & (factor - 1)) != 0) {
    throw_invalid("downsample: factor must be a power of two, got " + std::to_string(factor));
  }
  if (img.height() % factor != 0 || img.width() % factor != 0) {
    throw_invalid("downsample: factor " + std::to_string(factor) + " does not divide " +
                  std::to_string(img.height()) + "x" + std::to_string(img.width()));
  }
  if (factor == 1) return img;
  const int h = img.height(), w = img.width();
  const int oh = h / factor, ow = w / factor;
  const auto xt = reduction_taps(w, factor);
  const auto yt = reduction_taps(h, factor);

  std::vector<double> rows(static_cast<std::size_t>(h) * ow * 3, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < ow; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < xt[x].weights.size(); ++k) {
          acc += xt[x].weights[k] * img.at(y, xt[x].first + static_cast<int>(k), c);
        }
        rows[(static_cast<std::size_t>(y) * ow + x) * 3 + c] = acc;
      }
    }
  }
  Image out(oh, ow);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        for (std::size_t k = 0; k < yt[y].weights.size(); ++k) {
          const int sy = yt[y].first + static_cast<int>(k);
          acc += yt[y].weights[k] * rows[(static_cast<std::size_t>(sy) * ow + x) * 3 + c];
        }
        out.at(y, x, c) = static_cast<float>(acc);
      }
    }
  }
  out.clamp_unit();
  return out;
}

Image upsample2x(const Image& img) {
  const int h = img.height(), w = img.width();
  if (h == 0 || w == 0) throw_invalid("upsample2x: empty image");
  Image out(2 * h, 2 * w);
  auto source = [](int i, int n, int& i0, int& i1, double& t) {
    double s = (i + 0.5) / 2.0 - 0.5;
    if (s < 0.0) s = 0.0;
    if (s > n - 1) s = n - 1;
    i0 = static_cast<int>(std::floor(s));
    i1 = std::min(i0 + 1, n - 1);
    t = s - i0;
  };
  for (int y = 0; y < 2 * h; ++y) {
    int y0, y1;
    double ty;
    source(y, h, y0, y1, ty);
    for (int x = 0; x < 2 * w; ++x) {
      int x0, x1;
      double tx;
      source(x, w, x0, x1, tx);
      for (int c = 0; c < 3; ++c) {
        const double top = (1 - tx) * img.at(y0, x0, c) + tx * img.at(y0, x1, c);
        const double bottom = (1 - tx) * img.at(y1, x0, c) + tx * img.at(y1, x1, c);
        out.at(y, x, c) = static_cast<float>((1 - ty) * top + ty * bottom);
      }
    }
  }
  out.clamp_unit();
  return out;
}

}  // namespace swtex
