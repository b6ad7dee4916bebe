#include "swtex/vgg.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <random>

#include "swtex/errors.hpp"

namespace swtex {
namespace {

using RowMatF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapF = Eigen::Map<RowMatF>;
using ConstMapF = Eigen::Map<const RowMatF>;

constexpr char kMagic[8] = {'S', 'W', 'T', 'X', 'W', '0', '0', '1'};

// im2col band size in floats; keeps the scratch buffer around 16 MB.
constexpr std::size_t kBandFloats = std::size_t{1} << 22;

int rows_per_band(int width, int in_channels) {
  const std::size_t per_row = static_cast<std::size_t>(width) * 9 * in_channels;
  return std::max(1, static_cast<int>(kBandFloats / std::max<std::size_t>(per_row, 1)));
}

// Fills col (band_rows*W x 9*C) for output rows [y0, y0+band_rows).
void im2col(const Tensor3f& in, int y0, int band_rows, std::vector<float>& col) {
  const int h = in.height(), w = in.width(), c = in.channels();
  const std::size_t k = 9 * static_cast<std::size_t>(c);
  col.resize(static_cast<std::size_t>(band_rows) * w * k);
  float* dst = col.data();
  for (int y = y0; y < y0 + band_rows; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int ky = -1; ky <= 1; ++ky) {
        const int sy = y + ky;
        for (int kx = -1; kx <= 1; ++kx) {
          const int sx = x + kx;
          if (sy < 0 || sy >= h || sx < 0 || sx >= w) {
            std::fill(dst, dst + c, 0.0f);
          } else {
            const float* src = in.data() + (static_cast<std::size_t>(sy) * w + sx) * c;
            std::memcpy(dst, src, sizeof(float) * c);
          }
          dst += c;
        }
      }
    }
  }
}

// Scatter-adds col (band_rows*W x 9*C) into grad for output rows [y0, y0+band_rows).
void col2im_add(const std::vector<float>& col, int y0, int band_rows, Tensor3f& grad) {
  const int h = grad.height(), w = grad.width(), c = grad.channels();
  const float* src = col.data();
  for (int y = y0; y < y0 + band_rows; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int ky = -1; ky <= 1; ++ky) {
        const int sy = y + ky;
        for (int kx = -1; kx <= 1; ++kx) {
          const int sx = x + kx;
          if (sy >= 0 && sy < h && sx >= 0 && sx < w) {
            float* dst = grad.data() + (static_cast<std::size_t>(sy) * w + sx) * c;
            for (int i = 0; i < c; ++i) dst[i] += src[i];
          }
          src += c;
        }
      }
    }
  }
}

Tensor3f max_pool(const Tensor3f& in, std::vector<std::uint8_t>& argmax) {
  const int oh = in.height() / 2, ow = in.width() / 2, c = in.channels();
  Tensor3f out(oh, ow, c);
  argmax.assign(out.size(), 0);
  std::size_t o = 0;
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      for (int ch = 0; ch < c; ++ch, ++o) {
        float best = in(2 * y, 2 * x, ch);
        std::uint8_t which = 0;
        const float cand[3] = {in(2 * y, 2 * x + 1, ch), in(2 * y + 1, 2 * x, ch),
                               in(2 * y + 1, 2 * x + 1, ch)};
        for (std::uint8_t k = 0; k < 3; ++k) {
          if (cand[k] > best) {
            best = cand[k];
            which = k + 1;
          }
        }
        out.data()[o] = best;
        argmax[o] = which;
      }
    }
  }
  return out;
}

Tensor3f max_pool_backward(const Tensor3f& grad_out, const std::vector<std::uint8_t>& argmax,
                           int in_h, int in_w) {
  const int c = grad_out.channels();
  Tensor3f grad_in(in_h, in_w, c);
  std::size_t o = 0;
  for (int y = 0; y < grad_out.height(); ++y) {
    for (int x = 0; x < grad_out.width(); ++x) {
      for (int ch = 0; ch < c; ++ch, ++o) {
        const int which = argmax[o];
        grad_in(2 * y + (which >> 1), 2 * x + (which & 1), ch) += grad_out.data()[o];
      }
    }
  }
  return grad_in;
}

void conv_forward(const Tensor3f& in, const std::vector<float>& kernel,
                  const std::vector<float>& bias, int out_channels, Tensor3f& out) {
  const int h = in.height(), w = in.width(), c = in.channels();
  out = Tensor3f(h, w, out_channels);
  ConstMapF wmat(kernel.data(), 9 * c, out_channels);
  Eigen::Map<const Eigen::RowVectorXf> b(bias.data(), out_channels);
  std::vector<float> col;
  const int band = rows_per_band(w, c);
  for (int y0 = 0; y0 < h; y0 += band) {
    const int rows = std::min(band, h - y0);
    im2col(in, y0, rows, col);
    ConstMapF colm(col.data(), static_cast<Eigen::Index>(rows) * w, 9 * c);
    MapF o(out.data() + static_cast<std::size_t>(y0) * w * out_channels,
           static_cast<Eigen::Index>(rows) * w, out_channels);
    o.noalias() = colm * wmat;
    o.rowwise() += b;
  }
  for (float& v : out.values()) v = v > 0.0f ? v : 0.0f;
}

Tensor3f conv_backward(const Tensor3f& grad_out, const std::vector<float>& kernel,
                       int in_channels) {
  const int h = grad_out.height(), w = grad_out.width(), co = grad_out.channels();
  Tensor3f grad_in(h, w, in_channels);
  ConstMapF wmat(kernel.data(), 9 * in_channels, co);
  std::vector<float> col;
  const int band = rows_per_band(w, in_channels);
  for (int y0 = 0; y0 < h; y0 += band) {
    const int rows = std::min(band, h - y0);
    col.resize(static_cast<std::size_t>(rows) * w * 9 * in_channels);
    MapF colm(col.data(), static_cast<Eigen::Index>(rows) * w, 9 * in_channels);
    ConstMapF g(grad_out.data() + static_cast<std::size_t>(y0) * w * co,
                static_cast<Eigen::Index>(rows) * w, co);
    colm.noalias() = g * wmat.transpose();
    col2im_add(col, y0, rows, grad_in);
  }
  return grad_in;
}

template <typename T>
void put(std::vector<std::uint8_t>& buf, const T& v) {
  const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
  buf.insert(buf.end(), p, p + sizeof(T));
}

void put_string(std::vector<std::uint8_t>& buf, const std::string& s) {
  put(buf, static_cast<std::uint32_t>(s.size()));
  buf.insert(buf.end(), s.begin(), s.end());
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    T v;
    take(&v, sizeof(T));
    return v;
  }

  std::string get_string() {
    const auto n = get<std::uint32_t>();
    if (n > 4096) throw ConfigError("weights: implausible string length");
    std::string s(n, '\0');
    take(s.data(), n);
    return s;
  }

  std::vector<float> get_floats(std::size_t n) {
    std::vector<float> v(n);
    take(v.data(), n * sizeof(float));
    return v;
  }

  bool done() const { return pos_ == bytes_.size(); }

 private:
  void take(void* dst, std::size_t n) {
    if (pos_ + n > bytes_.size()) throw ConfigError("weights: truncated checkpoint");
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const std::vector<ConvSpec>& vgg19_topology() {
  static const std::vector<ConvSpec> topo = [] {
    std::vector<ConvSpec> t;
    const int per_block[5] = {2, 2, 4, 4, 4};
    const int width[5] = {64, 128, 256, 512, 512};
    int in = 3;
    for (int b = 0; b < 5; ++b) {
      for (int i = 0; i < per_block[b]; ++i) {
        t.push_back({"conv" + std::to_string(b + 1) + "_" + std::to_string(i + 1), b + 1, in,
                     width[b]});
        in = width[b];
      }
    }
    return t;
  }();
  return topo;
}

std::string fnv1a_hex(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[i] = digits[h & 0xf];
  return out;
}

int Vgg19::conv_index(std::string_view tag) {
  const auto& topo = vgg19_topology();
  for (std::size_t i = 0; i < topo.size(); ++i) {
    if (topo[i].tag == tag) return static_cast<int>(i);
  }
  return -1;
}

Vgg19::Conv Vgg19::make_conv(int in_channels, int out_channels, std::vector<float> raw,
                             std::vector<float> bias) {
  Conv c;
  c.in_channels = in_channels;
  c.out_channels = out_channels;
  c.kernel.resize(static_cast<std::size_t>(9) * in_channels * out_channels);
  for (int o = 0; o < out_channels; ++o) {
    for (int i = 0; i < in_channels; ++i) {
      for (int k = 0; k < 9; ++k) {
        const std::size_t src = (static_cast<std::size_t>(o) * in_channels + i) * 9 + k;
        const std::size_t row = static_cast<std::size_t>(k) * in_channels + i;
        c.kernel[row * out_channels + o] = raw[src];
      }
    }
  }
  c.bias = std::move(bias);
  return c;
}

Vgg19 Vgg19::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open weights file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw ConfigError("weights: " + path.string() + " is not a swtw checkpoint");
  }
  Reader r(std::span<const std::uint8_t>(bytes).subspan(sizeof(kMagic)));
  Vgg19 net;
  net.id_ = r.get_string();
  const auto& topo = vgg19_topology();
  const auto count = r.get<std::uint32_t>();
  if (count != topo.size()) {
    throw ConfigError("weights: expected " + std::to_string(topo.size()) +
                      " convolutions, found " + std::to_string(count));
  }
  for (const ConvSpec& spec : topo) {
    const std::string tag = r.get_string();
    const auto out_c = r.get<std::uint32_t>();
    const auto in_c = r.get<std::uint32_t>();
    const auto kh = r.get<std::uint32_t>();
    const auto kw = r.get<std::uint32_t>();
    if (tag != spec.tag || static_cast<int>(out_c) != spec.out_channels ||
        static_cast<int>(in_c) != spec.in_channels || kh != 3 || kw != 3) {
      throw ConfigError("weights: layer " + tag + " (" + std::to_string(out_c) + "x" +
                        std::to_string(in_c) + "x" + std::to_string(kh) + "x" +
                        std::to_string(kw) + ") does not match VGG19 " + spec.tag);
    }
    auto raw = r.get_floats(static_cast<std::size_t>(out_c) * in_c * 9);
    auto bias = r.get_floats(out_c);
    for (float v : raw) {
      if (!std::isfinite(v)) throw ConfigError("weights: non-finite value in " + tag);
    }
    net.convs_.push_back(make_conv(spec.in_channels, spec.out_channels, std::move(raw),
                                   std::move(bias)));
  }
  if (!r.done()) throw ConfigError("weights: trailing bytes after last convolution");
  net.checksum_ = fnv1a_hex(bytes);
  return net;
}

Vgg19 Vgg19::random_he(std::uint64_t seed) {
  Vgg19 net;
  net.id_ = "vgg19-random-he-seed" + std::to_string(seed);
  std::mt19937_64 rng(seed);
  for (const ConvSpec& spec : vgg19_topology()) {
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / (9.0 * spec.in_channels)));
    std::vector<float> raw(static_cast<std::size_t>(spec.out_channels) * spec.in_channels * 9);
    for (float& v : raw) v = static_cast<float>(normal(rng));
    net.convs_.push_back(make_conv(spec.in_channels, spec.out_channels, std::move(raw),
                                   std::vector<float>(spec.out_channels, 0.0f)));
  }
  return net;
}

std::string Vgg19::write(const std::filesystem::path& path) const {
  std::vector<std::uint8_t> buf(std::begin(kMagic), std::end(kMagic));
  put_string(buf, id_);
  const auto& topo = vgg19_topology();
  put(buf, static_cast<std::uint32_t>(topo.size()));
  for (std::size_t i = 0; i < topo.size(); ++i) {
    const Conv& c = convs_[i];
    put_string(buf, topo[i].tag);
    for (std::uint32_t v : {static_cast<std::uint32_t>(c.out_channels),
                            static_cast<std::uint32_t>(c.in_channels), 3u, 3u}) {
      put(buf, v);
    }
    std::vector<float> raw(c.kernel.size());
    for (int o = 0; o < c.out_channels; ++o) {
      for (int in = 0; in < c.in_channels; ++in) {
        for (int k = 0; k < 9; ++k) {
          const std::size_t row = static_cast<std::size_t>(k) * c.in_channels + in;
          raw[(static_cast<std::size_t>(o) * c.in_channels + in) * 9 + k] =
              c.kernel[row * c.out_channels + o];
        }
      }
    }
    const auto* w = reinterpret_cast<const std::uint8_t*>(raw.data());
    buf.insert(buf.end(), w, w + raw.size() * sizeof(float));
    const auto* b = reinterpret_cast<const std::uint8_t*>(c.bias.data());
    buf.insert(buf.end(), b, b + c.bias.size() * sizeof(float));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write weights file " + path.string());
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("short write to " + path.string());
  return fnv1a_hex(buf);
}

void Vgg19::forward(const Tensor3f& input, int last, Tape& tape) const {
  const auto& topo = vgg19_topology();
  if (last < 0 || last >= static_cast<int>(topo.size())) throw_invalid("Vgg19: bad layer index");
  if (input.channels() != 3) throw_invalid("Vgg19: input must have 3 channels");
  tape.last = last;
  tape.outputs.assign(last + 1, Tensor3f());
  tape.argmax.assign(last + 1, {});
  const Tensor3f* current = &input;
  Tensor3f pooled;
  for (int i = 0; i <= last; ++i) {
    if (i > 0 && topo[i].block != topo[i - 1].block) {
      pooled = max_pool(*current, tape.argmax[i]);
      current = &pooled;
    }
    conv_forward(*current, convs_[i].kernel, convs_[i].bias, convs_[i].out_channels,
                 tape.outputs[i]);
    current = &tape.outputs[i];
  }
}

Tensor3f Vgg19::backward(const Tape& tape, std::span<const Tensor3f> output_grads,
                         int input_height, int input_width) const {
  const auto& topo = vgg19_topology();
  if (static_cast<int>(output_grads.size()) != tape.last + 1) {
    throw_invalid("Vgg19::backward: one gradient slot per conv expected");
  }
  Tensor3f grad;  // w.r.t. post-ReLU output of conv i
  for (int i = tape.last; i >= 0; --i) {
    const Tensor3f& out = tape.outputs[i];
    if (grad.empty()) grad = Tensor3f(out.height(), out.width(), out.channels());
    if (!output_grads[i].empty()) {
      if (!output_grads[i].same_shape(out)) {
        throw_invalid("Vgg19::backward: gradient shape mismatch at " + topo[i].tag);
      }
      auto g = grad.values();
      auto extra = output_grads[i].values();
      for (std::size_t k = 0; k < g.size(); ++k) g[k] += extra[k];
    }
    {
      auto g = grad.values();
      auto o = out.values();
      for (std::size_t k = 0; k < g.size(); ++k) {
        if (o[k] <= 0.0f) g[k] = 0.0f;
      }
    }
    grad = conv_backward(grad, convs_[i].kernel, convs_[i].in_channels);
    if (i > 0 && topo[i].block != topo[i - 1].block) {
      const Tensor3f& below = tape.outputs[i - 1];
      grad = max_pool_backward(grad, tape.argmax[i], below.height(), below.width());
    }
  }
  if (grad.height() != input_height || grad.width() != input_width) {
    throw_invalid("Vgg19::backward: input size mismatch");
  }
  return grad;
}

}  // namespace swtex
