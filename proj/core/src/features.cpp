#include "swtex/features.hpp"

#include <algorithm>
#include <set>

#include "swtex/errors.hpp"

namespace swtex {

LayerSelection LayerSelection::standard() {
  LayerSelection s;
  for (const ConvSpec& c : vgg19_topology()) {
    if (c.block <= 4) s.channel_layers.push_back(c.tag);
    if (c.tag.ends_with("_1") || c.tag.ends_with("_2")) s.height_layers.push_back(c.tag);
  }
  return s;
}

std::vector<std::string> LayerSelection::all_layers() const {
  std::set<std::string> wanted(channel_layers.begin(), channel_layers.end());
  wanted.insert(height_layers.begin(), height_layers.end());
  std::vector<std::string> out;
  for (const ConvSpec& c : vgg19_topology()) {
    if (wanted.count(c.tag)) out.push_back(c.tag);
  }
  return out;
}

void LayerSelection::validate() const {
  if (channel_layers.empty() || height_layers.empty()) {
    throw ConfigError("layer selection: channel and height layer lists must be nonempty");
  }
  for (const auto* list : {&channel_layers, &height_layers}) {
    std::set<std::string> seen;
    for (const auto& tag : *list) {
      if (Vgg19::conv_index(tag) < 0) throw ConfigError("layer selection: unknown layer " + tag);
      if (!seen.insert(tag).second) throw ConfigError("layer selection: duplicate layer " + tag);
    }
  }
}

Tensor3f preprocess(const Image& img, const Normalization& norm, std::size_t* clamped) {
  Tensor3f out(img.height(), img.width(), 3);
  const auto src = img.tensor().values();
  auto dst = out.values();
  std::size_t n_clamped = 0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    float v = src[i];
    if (!(v >= 0.0f && v <= 1.0f)) {
      v = v > 1.0f ? 1.0f : 0.0f;
      ++n_clamped;
    }
    const int c = static_cast<int>(i % 3);
    dst[i] = (v - norm.mean[c]) / norm.stddev[c];
  }
  if (clamped != nullptr) *clamped += n_clamped;
  return out;
}

Image inverse_preprocess(const Tensor3f& normalized, const Normalization& norm) {
  Tensor3f out(normalized.height(), normalized.width(), 3);
  const auto src = normalized.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) {
    const int c = static_cast<int>(i % 3);
    dst[i] = src[i] * norm.stddev[c] + norm.mean[c];
  }
  return Image(std::move(out));
}

FeatureExtractor::FeatureExtractor(std::shared_ptr<const Vgg19> net, LayerSelection selection,
                                   Normalization norm)
    : net_(std::move(net)),
      selection_(std::move(selection)),
      norm_(norm),
      clamp_count_(std::make_shared<std::atomic<std::size_t>>(0)) {
  if (!net_) throw ConfigError("feature extractor: no backbone");
  selection_.validate();
  tags_ = selection_.all_layers();
  for (const auto& t : tags_) indices_.push_back(Vgg19::conv_index(t));
  deepest_ = indices_.back();
}

std::pair<int, int> FeatureExtractor::layer_size(const std::string& tag, int height, int width) {
  const int idx = Vgg19::conv_index(tag);
  if (idx < 0) throw ConfigError("unknown layer " + tag);
  for (int b = 1; b < vgg19_topology()[idx].block; ++b) {
    height /= 2;
    width /= 2;
  }
  return {height, width};
}

void FeatureExtractor::check_input_size(int height, int width) const {
  for (const auto& tag : tags_) {
    const auto [h, w] = layer_size(tag, height, width);
    if (h < 2 || w < 2) {
      throw InvalidArgument("input " + std::to_string(height) + "x" + std::to_string(width) +
                            " too small: layer " + tag + " would be " + std::to_string(h) +
                            "x" + std::to_string(w) + " (needs at least 2x2)");
    }
  }
}

FeatureStack<float> FeatureExtractor::extract(const Image& img) const {
  check_input_size(img.height(), img.width());
  std::size_t clamped = 0;
  Tensor3f input = preprocess(img, norm_, &clamped);
  if (clamped > 0) clamp_count_->fetch_add(clamped);
  return extract_normalized(input);
}

FeatureStack<float> FeatureExtractor::extract_normalized(const Tensor3f& input,
                                                         Tape* tape) const {
  check_input_size(input.height(), input.width());
  Tape local;
  Tape& t = tape != nullptr ? *tape : local;
  net_->forward(input, deepest_, t);
  FeatureStack<float> out;
  out.layers.reserve(tags_.size());
  for (std::size_t i = 0; i < tags_.size(); ++i) {
    out.layers.push_back({tags_[i], t.outputs[indices_[i]]});
  }
  return out;
}

Tensor3f FeatureExtractor::backward(const Tape& tape, const FeatureStack<float>& grad,
                                    int input_height, int input_width) const {
  if (grad.layers.size() != tags_.size()) {
    throw_invalid("FeatureExtractor::backward: gradient stack does not match selection");
  }
  std::vector<Tensor3f> slots(deepest_ + 1);
  for (std::size_t i = 0; i < tags_.size(); ++i) {
    if (grad.layers[i].tag != tags_[i]) {
      throw_invalid("FeatureExtractor::backward: unexpected tag " + grad.layers[i].tag);
    }
    slots[indices_[i]] = grad.layers[i].tensor;
  }
  return net_->backward(tape, slots, input_height, input_width);
}

FeatureExtractor load_extractor(const std::filesystem::path& weights_path,
                                const LayerSelection& selection,
                                const std::optional<std::string>& expected_checksum) {
  if (!std::filesystem::exists(weights_path)) {
    throw IoError("weights file not found: " + weights_path.string());
  }
  selection.validate();
  auto net = std::make_shared<const Vgg19>(Vgg19::read(weights_path));
  if (expected_checksum && !expected_checksum->empty() && *expected_checksum != net->checksum()) {
    throw ConfigError("weights checksum mismatch: expected " + *expected_checksum + ", got " +
                      net->checksum());
  }
  return FeatureExtractor(std::move(net), selection);
}

}  // namespace swtex
