#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "swtex/image.hpp"
#include "swtex/sw_loss.hpp"
#include "swtex/vgg.hpp"

namespace swtex {

/// Which VGG19 layers feed each slicing term. Activations are taken after ReLU.
struct LayerSelection {
  std::vector<std::string> channel_layers;
  std::vector<std::string> height_layers;

  /// Channel term: the first 12 convolutions (blocks 1-4).
  /// Height term: the first two convolutions of each of the five blocks.
  static LayerSelection standard();

  /// Union of both lists in network-depth order.
  std::vector<std::string> all_layers() const;

  /// ConfigError if a list is empty or names a layer VGG19 does not have.
  void validate() const;

  bool operator==(const LayerSelection&) const = default;
};

/// Per-channel input normalization of the backbone.
struct Normalization {
  std::array<float, 3> mean{0.485f, 0.456f, 0.406f};
  std::array<float, 3> stddev{0.229f, 0.224f, 0.225f};
};

/// (clamp(img) - mean) / stddev per channel. Values outside [0,1] are clamped
/// first; the number of clamped values is added to `clamped` when given.
Tensor3f preprocess(const Image& img, const Normalization& norm,
                    std::size_t* clamped = nullptr);

/// Inverse of preprocess (no clamping).
Image inverse_preprocess(const Tensor3f& normalized, const Normalization& norm);

/// Frozen backbone + layer selection. Cheap to copy; copies share the weights.
class FeatureExtractor {
 public:
  using Tape = Vgg19::Tape;

  FeatureExtractor(std::shared_ptr<const Vgg19> net, LayerSelection selection,
                   Normalization norm = {});

  const std::string& backbone_id() const { return net_->id(); }
  const std::shared_ptr<const Vgg19>& backbone() const { return net_; }
  const std::string& weights_checksum() const { return net_->checksum(); }
  const LayerSelection& selection() const { return selection_; }
  const Normalization& normalization() const { return norm_; }

  /// preprocess + forward. Throws InvalidArgument if the image is too small.
  FeatureStack<float> extract(const Image& img) const;

  /// Forward pass on an already-normalized input. When `tape` is given it
  /// keeps what backward() needs.
  FeatureStack<float> extract_normalized(const Tensor3f& input, Tape* tape = nullptr) const;

  /// d loss / d normalized input, given d loss / d each selected layer.
  Tensor3f backward(const Tape& tape, const FeatureStack<float>& grad, int input_height,
                    int input_width) const;

  /// Spatial size of `tag` for an input of the given size.
  static std::pair<int, int> layer_size(const std::string& tag, int height, int width);

  /// InvalidArgument naming the first selected layer whose spatial size would
  /// drop below 2 in either axis.
  void check_input_size(int height, int width) const;

  /// Out-of-range pixel values clamped by extract() so far.
  std::size_t clamp_warnings() const { return clamp_count_->load(); }

 private:
  std::shared_ptr<const Vgg19> net_;
  LayerSelection selection_;
  Normalization norm_;
  std::vector<std::string> tags_;
  std::vector<int> indices_;
  int deepest_ = -1;
  std::shared_ptr<std::atomic<std::size_t>> clamp_count_;
};

/// Reads a checkpoint and binds it to `selection`. IoError for a missing
/// file; ConfigError for architecture, checksum or selection problems.
FeatureExtractor load_extractor(const std::filesystem::path& weights_path,
                                const LayerSelection& selection = LayerSelection::standard(),
                                const std::optional<std::string>& expected_checksum = {});

}  // namespace swtex
