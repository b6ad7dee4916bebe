#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "swtex/features.hpp"
#include "swtex/image.hpp"

namespace swtex {

/// n x d matrix of image embeddings (one row per image) tagged with the
/// backend that produced it.
struct EmbeddingSet {
  Eigen::MatrixXd vectors;
  std::string backend;

  int size() const { return static_cast<int>(vectors.rows()); }
  int dim() const { return static_cast<int>(vectors.cols()); }
};

/// Maps an image to a fixed-length descriptor for distributional metrics.
class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual std::string id() const = 0;
  virtual Eigen::VectorXd embed(const Image& img) const = 0;

  EmbeddingSet embed_all(const std::vector<Image>& images) const;
};

/// Hand-crafted texture descriptor, independent of any learned network:
/// colour moments, multi-scale oriented gradient energies and normalized
/// luminance autocorrelation at dyadic offsets up to 32 pixels.
/// Needs images of at least 64x64.
class FilterBankEmbedding final : public EmbeddingBackend {
 public:
  std::string id() const override { return "filterbank-v1"; }
  Eigen::VectorXd embed(const Image& img) const override;

  static int dimension();
};

/// Spatial mean of one backbone layer's activations (a pool-style embedding).
class ExtractorEmbedding final : public EmbeddingBackend {
 public:
  ExtractorEmbedding(const FeatureExtractor& extractor, std::string layer);

  std::string id() const override;
  Eigen::VectorXd embed(const Image& img) const override;

 private:
  FeatureExtractor extractor_;
  std::string layer_;
};

/// Perceptual distance between two equally sized images.
class PerceptualBackend {
 public:
  virtual ~PerceptualBackend() = default;
  virtual std::string id() const = 0;
  virtual double distance(const Image& a, const Image& b) const = 0;
};

/// LPIPS-style distance: per-pixel unit-normalized backbone features, squared
/// differences summed over channels, averaged over pixels and then over
/// layers (uniform layer weights; no learned calibration).
class ExtractorPerceptual final : public PerceptualBackend {
 public:
  explicit ExtractorPerceptual(const FeatureExtractor& extractor,
                               std::vector<std::string> layers = {"conv1_2", "conv2_2", "conv3_2",
                                                                  "conv4_2", "conv5_2"});

  std::string id() const override;
  double distance(const Image& a, const Image& b) const override;

 private:
  FeatureExtractor extractor_;
};

}  // namespace swtex
