#pragma once

#include <cstdint>
#include <vector>

namespace calib {

/// Interleaved 8-bit raster, row-major, top row first.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> data;

    static Image make(int width, int height, int channels) {
        Image img;
        img.width = width;
        img.height = height;
        img.channels = channels;
        img.data.assign(static_cast<std::size_t>(width) * height * channels, 0);
        return img;
    }

    std::uint8_t& at(int x, int y, int c) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t at(int x, int y, int c) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    bool empty() const { return data.empty(); }
};

} // namespace calib
