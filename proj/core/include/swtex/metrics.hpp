#pragma once

#include <cstdint>
#include <vector>

#include "swtex/embedding.hpp"
#include "swtex/image.hpp"

namespace swtex {

/// Crop-based evaluation: `crop_count` square crops of side `crop_size` at
/// seeded uniform offsets. In ground-truth mode the second set is taken from
/// the reference itself with a disjoint seed stream.
struct CropProtocol {
  int crop_count = 64;
  int crop_size = 128;
  std::uint64_t seed = 0;
  bool ground_truth = false;
};

/// Crops drawn from (proto.seed, Stream::kCrops).
std::vector<Image> extract_crops(const Image& img, const CropProtocol& proto);

/// Crops drawn from an explicit generator.
std::vector<Image> extract_crops(const Image& img, int count, int size, Rng& rng);

/// ||mu_a - mu_b||^2 + tr(S_a + S_b - 2 (S_a S_b)^{1/2}) with sample
/// covariances (n - 1 normalization). The cross term is evaluated as
/// tr sqrt(S_a^{1/2} S_b S_a^{1/2}) with eigenvalues floored at 1e-10.
double frechet_distance(const EmbeddingSet& a, const EmbeddingSet& b);

/// Unbiased MMD^2 with the cubic polynomial kernel k(x, y) = (x.y / d + 1)^3.
/// Can be negative.
double kid(const EmbeddingSet& a, const EmbeddingSet& b);

enum class CropMetric { kFid, kKid };

/// Metric between reference crops and synthesis crops (same offsets when the
/// sizes agree), or between two disjoint crop sets of the reference in
/// ground-truth mode (`syn` unused).
double crop_metric(const Image& ref, const Image& syn, const CropProtocol& proto, CropMetric which,
                   const EmbeddingBackend& backend);

/// Backend distance; FeatureDisabled when no backend is configured.
double perceptual_score(const Image& ref, const Image& syn, const PerceptualBackend* backend);

}  // namespace swtex
