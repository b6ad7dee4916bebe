#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "swtex/tensor.hpp"

namespace swtex {

/// One 3x3 same-padded convolution of the VGG19 feature stack.
struct ConvSpec {
  std::string tag;  // "conv<block>_<index>"
  int block = 0;    // 1-based; a 2x2 max-pool precedes every block after the first
  int in_channels = 0;
  int out_channels = 0;
};

/// The 16 convolutions of VGG19 in depth order (2, 2, 4, 4, 4 per block).
const std::vector<ConvSpec>& vgg19_topology();

/// Convolutional part of VGG19 with frozen weights, evaluated on the CPU in
/// H x W x C layout. Every convolution is followed by ReLU.
///
/// Checkpoint format (`.swtw`, little-endian):
///   char[8]  magic "SWTXW001"
///   u32      id length, then id bytes (free-form backbone identifier)
///   u32      convolution count (16)
///   per convolution, in depth order:
///     u32 tag length, tag bytes
///     u32 out_channels, in_channels, kernel_h, kernel_w   (3x3)
///     f32 weights[out][in][kh][kw]
///     f32 bias[out]
/// The checksum is the FNV-1a 64-bit hash of the whole file, as 16 hex digits.
class Vgg19 {
 public:
  /// Reads a checkpoint; IoError if unreadable, ConfigError on any
  /// architecture mismatch.
  static Vgg19 read(const std::filesystem::path& path);

  /// He-normal weights and zero biases, deterministic in `seed`.
  static Vgg19 random_he(std::uint64_t seed);

  /// Writes a checkpoint and returns its checksum.
  std::string write(const std::filesystem::path& path) const;

  const std::string& id() const { return id_; }
  const std::string& checksum() const { return checksum_; }

  /// Index into vgg19_topology(), or -1.
  static int conv_index(std::string_view tag);

  /// Activations kept for the backward pass.
  struct Tape {
    int last = -1;
    std::vector<Tensor3f> outputs;                  // post-ReLU output of every conv <= last
    std::vector<std::vector<std::uint8_t>> argmax;  // per conv: pool argmax feeding it (blocks > 1)
  };

  /// Runs convolutions 0..last inclusive on a normalized H x W x 3 input.
  void forward(const Tensor3f& input, int last, Tape& tape) const;

  /// Gradient with respect to the network input. `output_grads[i]` is either
  /// empty or the loss gradient with respect to conv i's post-ReLU output.
  Tensor3f backward(const Tape& tape, std::span<const Tensor3f> output_grads, int input_height,
                    int input_width) const;

 private:
  struct Conv {
    int in_channels = 0;
    int out_channels = 0;
    std::vector<float> kernel;  // (9 * in) x out, rows ordered (ky, kx, in)
    std::vector<float> bias;
  };

  std::string id_;
  std::string checksum_;
  std::vector<Conv> convs_;

  static Conv make_conv(int in_channels, int out_channels, std::vector<float> raw,
                        std::vector<float> bias);
};

/// FNV-1a 64-bit over a byte range, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::span<const std::uint8_t> bytes);

}  // namespace swtex
