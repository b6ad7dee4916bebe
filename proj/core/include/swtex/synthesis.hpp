#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "swtex/features.hpp"
#include "swtex/image.hpp"
#include "swtex/rng.hpp"
#include "swtex/sw_loss.hpp"

namespace swtex {

struct SynthesisConfig {
  int scales = 1;        ///< K: the coarsest level is the reference downsampled by 2^K
  int iterations = 100;  ///< optimizer steps per scale
  double learning_rate = 1.0;
  LossWeights weights = LossWeights::uniform(LayerSelection::standard().channel_layers,
                                             LayerSelection::standard().height_layers);
  SliceCounts slices;  ///< unset counts use N_l (channel) and H_l (height) directions
  std::uint64_t seed = 0;
  /// Mirror the height term along the width axis (experimental, off by default).
  bool width_term = false;
  /// Extract the reference once per scale instead of once per optimizer step.
  bool cache_reference_features = true;
  /// Redraw slice directions between optimizer steps; false keeps one draw per scale.
  bool resample_directions = true;
  int lbfgs_history = 20;
  SampleMatching matching = SampleMatching::kStrict;

  /// Weights actually used: `weights`, plus width weights equal to the height
  /// weights when `width_term` is set.
  LossWeights effective_weights() const;

  /// Drop the height term (the plain sliced-Wasserstein baseline).
  void disable_height_term();

  /// InvalidArgument unless 2^scales divides both dimensions and the coarsest
  /// level keeps every selected layer at least 2x2.
  void validate(int height, int width, const FeatureExtractor& extractor) const;
};

struct ScaleTrace {
  int level = 0;  ///< downsampling exponent of this scale (K at the coarsest)
  int height = 0;
  int width = 0;
  std::vector<double> losses;   ///< objective at the start of each step
  std::vector<double> elapsed;  ///< seconds since the scale started, after each step
  double initial_loss = 0.0;
  double final_loss = 0.0;  ///< objective after the last accepted step
  double seconds = 0.0;
  int evaluations = 0;
  Image result;
};

struct SynthesisTrace {
  std::vector<ScaleTrace> scales;

  double total_seconds() const;

  /// Whitespace-separated table: iteration, scale, loss, elapsed_seconds.
  void write_table(std::ostream& out) const;
};

/// Gaussian noise with the reference's per-channel mean and standard
/// deviation, clamped to [0,1].
Image init_noise(const Image& ref, Rng& rng);

/// Optimizes `init` toward the slicing statistics of `ref` with L-BFGS.
/// Direction draws come from (cfg.seed, Stream::kDirections, stream_index).
/// If no step is ever accepted the returned image is `init` unchanged.
std::pair<Image, SynthesisTrace> synthesize_single_scale(const Image& ref, const Image& init,
                                                         const FeatureExtractor& extractor,
                                                         const SynthesisConfig& cfg,
                                                         int stream_index = 0);

/// Coarse-to-fine synthesis: noise at ref/2^K, then one single-scale run per
/// level, 2x upsampling between levels. The result has the reference's size.
std::pair<Image, SynthesisTrace> synthesize_multiscale(const Image& ref,
                                                       const FeatureExtractor& extractor,
                                                       const SynthesisConfig& cfg);

}  // namespace swtex
