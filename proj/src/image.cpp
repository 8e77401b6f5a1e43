#include "mattekit/image.hpp"

#include <algorithm>
#include <cmath>

namespace mattekit {

namespace {

void check_dims(int width, int height) {
    if (width < 1 || height < 1) {
        throw DimensionError("image dimensions must be at least 1x1, got " +
                             std::to_string(width) + "x" + std::to_string(height));
    }
}

}  // namespace

Gray8::Gray8(int width, int height, std::uint8_t fill)
    : width_(width), height_(height) {
    check_dims(width, height);
    values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

Gray8::Gray8(int width, int height, std::vector<std::uint8_t> values)
    : width_(width), height_(height), values_(std::move(values)) {
    check_dims(width, height);
    if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw DimensionError("grid has " + std::to_string(values_.size()) +
                             " values, expected " + std::to_string(width) + "x" +
                             std::to_string(height));
    }
}

InverseAlpha::InverseAlpha(int width, int height, std::vector<std::uint8_t> values)
    : InverseAlpha(Gray8(width, height, std::move(values))) {}

InverseAlpha::InverseAlpha(Gray8 g) : Gray8(std::move(g)) {
    for (auto v : values()) {
        if (v != 0 && v != 255) {
            throw std::invalid_argument("inverse alpha values must be 0 or 255");
        }
    }
}

RgbImage::RgbImage(int width, int height, Rgb fill) : width_(width), height_(height) {
    check_dims(width, height);
    pixels_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

std::uint8_t quantize8(double value) noexcept {
    // std::round is half-away-from-zero.
    const double r = std::round(value);
    return static_cast<std::uint8_t>(std::clamp(r, 0.0, 255.0));
}

}  // namespace mattekit
