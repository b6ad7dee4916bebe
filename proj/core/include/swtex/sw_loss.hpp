#pragma once

// Sliced-Wasserstein statistics over deep feature distributions.
//
// A layer's activations F (H x W x N) are read two ways:
//   * channel slicing: the H*W pixel feature vectors (length N) are projected
//     onto random unit directions in R^N;
//   * height slicing: the W*N "columns" (entry n of every height slice, a
//     vector of length H) are projected onto random unit directions in R^H.
// Each projected set is compared to the reference's by sorting, and the
// per-direction 1D losses are averaged into a Monte Carlo estimate of the
// sliced Wasserstein distance. Layer terms are summed with per-layer weights.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "swtex/rng.hpp"
#include "swtex/tensor.hpp"

namespace swtex {

template <typename T>
struct FeatureLayer {
  std::string tag;
  Tensor3<T> tensor;
};

/// Activations of the selected layers, ordered by network depth.
template <typename T>
class FeatureStack {
 public:
  std::vector<FeatureLayer<T>> layers;

  const FeatureLayer<T>* find(std::string_view tag) const;
  FeatureLayer<T>* find(std::string_view tag);

  /// Throws InvalidArgument on duplicate tags or non-finite activations.
  void validate() const;

  /// Same tags and shapes, all zeros.
  FeatureStack zeros_like() const;

  template <typename U>
  FeatureStack<U> cast() const {
    FeatureStack<U> out;
    out.layers.reserve(layers.size());
    for (const auto& l : layers) out.layers.push_back({l.tag, l.tensor.template cast<U>()});
    return out;
  }
};

/// `count` unit vectors of length `dim`, stored row-major.
template <typename T>
struct DirectionSet {
  int dim = 0;
  int count = 0;
  std::vector<T> vectors;

  std::span<const T> row(int d) const {
    return std::span<const T>(vectors).subspan(static_cast<std::size_t>(d) * dim, dim);
  }
};

/// One row per direction, one column per projected sample.
template <typename T>
struct ProjectionBatch {
  int count = 0;
  int samples = 0;
  std::vector<T> values;

  std::span<const T> row(int d) const {
    return std::span<const T>(values).subspan(static_cast<std::size_t>(d) * samples,
                                              samples);
  }
  std::span<T> row(int d) {
    return std::span<T>(values).subspan(static_cast<std::size_t>(d) * samples, samples);
  }
};

/// Isotropic Gaussian draws normalized to unit length.
template <typename T>
DirectionSet<T> sample_directions(int count, int dim, Rng& rng);

/// values[d][m] = <F_m, V_d>, m over pixels in raster order.
template <typename T>
ProjectionBatch<T> project_channelwise(const Tensor3<T>& features, const DirectionSet<T>& dirs);

/// values[d][w*N + n] = sum_h V_d[h] * F(h, w, n).
///
/// Identical to project_channelwise on the tensor permuted to W x N x H.
template <typename T>
ProjectionBatch<T> project_heightwise(const Tensor3<T>& features, const DirectionSet<T>& dirs);

/// values[d][h*N + n] = sum_w V_d[w] * F(h, w, n). Experimental mirror of the
/// height term; only evaluated when width weights are set.
template <typename T>
ProjectionBatch<T> project_widthwise(const Tensor3<T>& features, const DirectionSet<T>& dirs);

/// How two projected sets of different sizes are compared.
enum class SampleMatching {
  kStrict,    ///< sizes must agree
  kQuantile,  ///< the shorter sorted vector is linearly resampled to the longer length
};

/// (1/len) * ||sort(p) - sort(q)||^2.
template <typename T>
double sw1d(std::span<const T> p, std::span<const T> q,
            SampleMatching matching = SampleMatching::kStrict);

/// Mean of sw1d over matched direction rows.
template <typename T>
double layer_loss(const ProjectionBatch<T>& a, const ProjectionBatch<T>& b,
                  SampleMatching matching = SampleMatching::kStrict);

enum class SliceTerm { kChannel, kHeight, kWidth };

const char* to_string(SliceTerm term);

/// Per-layer weights of each slicing term. Layers absent from a map weigh 0.
struct LossWeights {
  std::map<std::string, double> channel_weights;
  std::map<std::string, double> height_weights;
  std::map<std::string, double> width_weights;

  double weight(SliceTerm term, const std::string& tag) const;
  const std::map<std::string, double>& map(SliceTerm term) const;
  std::map<std::string, double>& map(SliceTerm term);

  /// Weight 1 on every listed layer.
  static LossWeights uniform(const std::vector<std::string>& channel_layers,
                             const std::vector<std::string>& height_layers);

  bool operator==(const LossWeights&) const = default;
};

/// Direction counts per term. Unset means the per-layer default: N_l for the
/// channel term, H_l for the height term, W_l for the width term.
struct SliceCounts {
  std::optional<int> channel;
  std::optional<int> height;
  std::optional<int> width;

  bool operator==(const SliceCounts&) const = default;
};

template <typename T>
struct TermDirections {
  std::string tag;
  SliceTerm term = SliceTerm::kChannel;
  double weight = 0.0;
  DirectionSet<T> dirs;
};

/// Directions for every (layer, term) pair with nonzero weight. Shared by both
/// inputs of a loss evaluation.
template <typename T>
struct SliceDirections {
  std::vector<TermDirections<T>> terms;
};

/// Draws channel directions for every weighted layer, then height, then width,
/// in stack order. `shapes` only supplies tensor dimensions.
template <typename T>
SliceDirections<T> draw_directions(const FeatureStack<T>& shapes, const LossWeights& weights,
                                   const SliceCounts& counts, Rng& rng,
                                   std::span<const SliceTerm> terms);

template <typename T>
SliceDirections<T> draw_directions(const FeatureStack<T>& shapes, const LossWeights& weights,
                                   const SliceCounts& counts, Rng& rng);

/// Reference side of a slicing loss with frozen directions: the reference
/// projections are computed and sorted once, then any number of candidate
/// stacks can be scored (with gradients) against them.
template <typename T>
class SortedTarget {
 public:
  SortedTarget(const FeatureStack<T>& reference, SliceDirections<T> directions,
               SampleMatching matching = SampleMatching::kStrict);

  /// Weighted sum of the layer losses. When `grad` is non-null it receives
  /// d loss / d candidate (same tags and shapes as the candidate).
  double evaluate(const FeatureStack<T>& candidate, FeatureStack<T>* grad = nullptr) const;

  /// Per-term breakdown of the last-evaluated kind, summed over layers.
  struct Breakdown {
    double channel = 0.0;
    double height = 0.0;
    double width = 0.0;
  };
  Breakdown evaluate_terms(const FeatureStack<T>& candidate) const;

  const SliceDirections<T>& directions() const { return directions_; }

 private:
  struct Term {
    std::size_t layer_index;
    int height;
    int width;
    int channels;
    std::vector<T> sorted;  // count x samples, each row sorted ascending
    int samples;
  };

  double evaluate_impl(const FeatureStack<T>& candidate, FeatureStack<T>* grad,
                       Breakdown* breakdown) const;

  SliceDirections<T> directions_;
  SampleMatching matching_;
  std::vector<Term> terms_;
  std::vector<std::string> tags_;
};

/// Fixed-direction slicing loss (all terms in `directions`).
template <typename T>
double slicing_loss(const FeatureStack<T>& a, const FeatureStack<T>& b,
                    const SliceDirections<T>& directions,
                    SampleMatching matching = SampleMatching::kStrict,
                    FeatureStack<T>* grad_a = nullptr);

/// Channel term with fresh directions drawn from `rng`.
template <typename T>
double channel_slice_loss(const FeatureStack<T>& a, const FeatureStack<T>& b,
                          const LossWeights& weights, Rng& rng, const SliceCounts& counts = {},
                          SampleMatching matching = SampleMatching::kStrict);

/// Height term with fresh directions drawn from `rng`.
template <typename T>
double height_slice_loss(const FeatureStack<T>& a, const FeatureStack<T>& b,
                         const LossWeights& weights, Rng& rng, const SliceCounts& counts = {},
                         SampleMatching matching = SampleMatching::kStrict);

/// Channel + height (+ width when weighted) terms, each drawn independently.
template <typename T>
double slicing_loss(const FeatureStack<T>& a, const FeatureStack<T>& b,
                    const LossWeights& weights, Rng& rng, const SliceCounts& counts = {},
                    SampleMatching matching = SampleMatching::kStrict);

}  // namespace swtex
