#pragma once

#include "swtex/image.hpp"

namespace swtex {

/// Antialiased bicubic reduction (Keys kernel, a = -0.5, support scaled by
/// the factor). `factor` must be a power of two dividing both dimensions.
/// Output is clamped to [0,1].
Image downsample(const Image& img, int factor);

/// 2x bilinear enlargement with half-pixel centers; output clamped to [0,1].
Image upsample2x(const Image& img);

}  // namespace swtex
