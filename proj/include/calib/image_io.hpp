#pragma once

#include <filesystem>

#include "calib/image.hpp"

namespace calib {

/// Loads a PNG or JPEG file (sniffed from the leading bytes) as 8-bit RGB.
/// Grayscale and paletted inputs are expanded; alpha is dropped.
Image load_image(const std::filesystem::path& path);

/// Writes 8-bit RGB (or grayscale) PNG with fixed encoder settings, so the
/// same raster always produces the same bytes.
void save_png(const Image& image, const std::filesystem::path& path);

void save_jpeg(const Image& image, const std::filesystem::path& path, int quality = 95);

} // namespace calib
