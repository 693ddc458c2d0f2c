#pragma once

#include <stdexcept>
#include <vector>

namespace hald {

/// Square grayscale image, row-major, values nominally in [0, 1].
struct Image {
    int side = 0;
    std::vector<float> pixels;

    float at(int y, int x) const {
        return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(side) +
                      static_cast<std::size_t>(x)];
    }
    float& at(int y, int x) {
        return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(side) +
                      static_cast<std::size_t>(x)];
    }

    static Image zeros(int side) {
        if (side < 1) throw std::invalid_argument("Image: side must be positive");
        Image img;
        img.side = side;
        img.pixels.assign(static_cast<std::size_t>(side) * static_cast<std::size_t>(side), 0.0f);
        return img;
    }
};

}  // namespace hald
