#include "swtex/embedding.hpp"

#include <algorithm>
#include <cmath>

#include "swtex/errors.hpp"

namespace swtex {
namespace {

constexpr int kPyramidLevels = 4;
constexpr int kOffsets[] = {1, 2, 4, 8, 16, 32};
constexpr int kDirections[4][2] = {{0, 1}, {1, 0}, {1, 1}, {1, -1}};

using Plane = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Plane luminance(const Image& img) {
  Plane out(img.height(), img.width());
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      out(y, x) = 0.299 * img.at(y, x, 0) + 0.587 * img.at(y, x, 1) + 0.114 * img.at(y, x, 2);
    }
  }
  return out;
}

Plane halve(const Plane& p) {
  Plane out(p.rows() / 2, p.cols() / 2);
  for (Eigen::Index y = 0; y < out.rows(); ++y) {
    for (Eigen::Index x = 0; x < out.cols(); ++x) {
      out(y, x) = 0.25 * (p(2 * y, 2 * x) + p(2 * y + 1, 2 * x) + p(2 * y, 2 * x + 1) +
                          p(2 * y + 1, 2 * x + 1));
    }
  }
  return out;
}

// Pearson correlation between the plane and itself shifted by (dy, dx), over
// the overlapping region.
double shifted_correlation(const Plane& p, int dy, int dx) {
  const int h = static_cast<int>(p.rows()), w = static_cast<int>(p.cols());
  const int y0 = 0, y1 = h - dy;
  const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
  if (y1 - y0 < 2 || x1 - x0 < 2) return 0.0;
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  const double n = static_cast<double>(y1 - y0) * (x1 - x0);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) {
      const double a = p(y, x), b = p(y + dy, x + dx);
      sa += a;
      sb += b;
      saa += a * a;
      sbb += b * b;
      sab += a * b;
    }
  }
  const double va = saa / n - (sa / n) * (sa / n);
  const double vb = sbb / n - (sb / n) * (sb / n);
  if (va <= 1e-12 || vb <= 1e-12) return 0.0;
  return (sab / n - (sa / n) * (sb / n)) / std::sqrt(va * vb);
}

}  // namespace

EmbeddingSet EmbeddingBackend::embed_all(const std::vector<Image>& images) const {
  EmbeddingSet set;
  set.backend = id();
  for (std::size_t i = 0; i < images.size(); ++i) {
    Eigen::VectorXd v = embed(images[i]);
    if (i == 0) set.vectors.resize(static_cast<Eigen::Index>(images.size()), v.size());
    set.vectors.row(static_cast<Eigen::Index>(i)) = v.transpose();
  }
  return set;
}

int FilterBankEmbedding::dimension() {
  return 6 + kPyramidLevels * 8 + static_cast<int>(std::size(kOffsets)) * 4;
}

Eigen::VectorXd FilterBankEmbedding::embed(const Image& img) const {
  if (img.height() < 64 || img.width() < 64) {
    throw_invalid("FilterBankEmbedding: image must be at least 64x64");
  }
  Eigen::VectorXd out(dimension());
  int k = 0;
  const auto mean = img.channel_means();
  const auto sd = img.channel_stddevs();
  for (int c = 0; c < 3; ++c) out(k++) = mean[c];
  for (int c = 0; c < 3; ++c) out(k++) = sd[c];

  Plane lum = luminance(img);
  Plane level = lum;
  for (int l = 0; l < kPyramidLevels; ++l) {
    for (const auto& d : kDirections) {
      const int dy = d[0], dx = d[1];
      double s = 0, ss = 0;
      int n = 0;
      for (Eigen::Index y = 0; y + dy < level.rows(); ++y) {
        for (Eigen::Index x = std::max(0, -dx); x < level.cols() && x + dx < level.cols(); ++x) {
          const double r = std::abs(level(y + dy, x + dx) - level(y, x));
          s += r;
          ss += r * r;
          ++n;
        }
      }
      const double m = s / std::max(n, 1);
      out(k++) = m;
      out(k++) = std::sqrt(std::max(0.0, ss / std::max(n, 1) - m * m));
    }
    level = halve(level);
  }
  for (int off : kOffsets) {
    for (const auto& d : kDirections) out(k++) = shifted_correlation(lum, d[0] * off, d[1] * off);
  }
  return out;
}

ExtractorEmbedding::ExtractorEmbedding(const FeatureExtractor& extractor, std::string layer)
    : extractor_(extractor.backbone(), LayerSelection{{layer}, {layer}}), layer_(std::move(layer)) {}

std::string ExtractorEmbedding::id() const {
  return "mean-" + layer_ + "@" + extractor_.backbone_id();
}

Eigen::VectorXd ExtractorEmbedding::embed(const Image& img) const {
  const auto stack = extractor_.extract(img);
  const Tensor3f& f = stack.layers.front().tensor;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(f.channels());
  for (int p = 0; p < f.pixels(); ++p) {
    for (int c = 0; c < f.channels(); ++c) v(c) += f.data()[static_cast<std::size_t>(p) * f.channels() + c];
  }
  return v / std::max(1, f.pixels());
}

ExtractorPerceptual::ExtractorPerceptual(const FeatureExtractor& extractor,
                                         std::vector<std::string> layers)
    : extractor_(extractor.backbone(), LayerSelection{layers, layers}) {}

std::string ExtractorPerceptual::id() const {
  return "lpips-uniform@" + extractor_.backbone_id();
}

double ExtractorPerceptual::distance(const Image& a, const Image& b) const {
  if (!a.same_size(b)) throw_invalid("perceptual distance: images differ in size");
  const auto fa = extractor_.extract(a);
  const auto fb = extractor_.extract(b);
  double total = 0.0;
  for (std::size_t l = 0; l < fa.layers.size(); ++l) {
    const Tensor3f& ta = fa.layers[l].tensor;
    const Tensor3f& tb = fb.layers[l].tensor;
    const int n = ta.channels();
    double layer_sum = 0.0;
    for (int p = 0; p < ta.pixels(); ++p) {
      const float* pa = ta.data() + static_cast<std::size_t>(p) * n;
      const float* pb = tb.data() + static_cast<std::size_t>(p) * n;
      double na = 0, nb = 0;
      for (int c = 0; c < n; ++c) {
        na += double(pa[c]) * pa[c];
        nb += double(pb[c]) * pb[c];
      }
      na = std::sqrt(na) + 1e-10;
      nb = std::sqrt(nb) + 1e-10;
      double d = 0;
      for (int c = 0; c < n; ++c) {
        const double diff = pa[c] / na - pb[c] / nb;
        d += diff * diff;
      }
      layer_sum += d;
    }
    total += layer_sum / std::max(1, ta.pixels());
  }
  return total / static_cast<double>(fa.layers.size());
}

}  // namespace swtex
