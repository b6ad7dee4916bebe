#pragma once

#include <optional>
#include <vector>

#include "swtex/image.hpp"

namespace swtex::cli {

/// Comparison figure: one row per texture, one column per method. Each cell is
/// a tile x tile thumbnail followed by a white gutter on its right and bottom,
/// so the grid is rows*(tile+gutter) high and cols*(tile+gutter) wide.
/// Missing cells stay white.
Image compose_grid(const std::vector<std::vector<std::optional<Image>>>& rows, int tile = 128,
                   int gutter = 4);

/// Area/bilinear resize to size x size.
Image thumbnail(const Image& img, int size);

}  // namespace swtex::cli
