#pragma once

#include <filesystem>

#include "swtex/image.hpp"

namespace swtex {

/// Decodes an 8-bit PNG or JPEG (grayscale inputs are expanded to RGB).
/// Throws IoError when the file is missing or cannot be decoded.
Image read_image(const std::filesystem::path& path);

/// Writes an 8-bit RGB PNG; values are clamped to [0,1] and rounded.
void write_png(const std::filesystem::path& path, const Image& img);

}  // namespace swtex
