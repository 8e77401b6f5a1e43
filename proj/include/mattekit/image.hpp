#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mattekit {

class DimensionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Point {
    int row = 0;
    int col = 0;

    friend bool operator==(const Point&, const Point&) = default;
    friend auto operator<=>(const Point&, const Point&) = default;
};

/// Row-major single-channel 8-bit grid. Base for AlphaMatte, InverseAlpha,
/// Trimap and plain binary masks; the wrappers below add their own value
/// invariants on top.
class Gray8 {
public:
    Gray8() = default;
    Gray8(int width, int height, std::uint8_t fill = 0);
    Gray8(int width, int height, std::vector<std::uint8_t> values);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    std::uint8_t operator()(int row, int col) const { return values_[index(row, col)]; }
    std::uint8_t& operator()(int row, int col) { return values_[index(row, col)]; }
    std::uint8_t operator[](std::size_t i) const { return values_[i]; }
    std::uint8_t& operator[](std::size_t i) { return values_[i]; }

    bool in_bounds(int row, int col) const noexcept {
        return row >= 0 && col >= 0 && row < height_ && col < width_;
    }
    std::size_t index(int row, int col) const noexcept {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(col);
    }

    std::span<const std::uint8_t> values() const noexcept { return values_; }
    std::span<std::uint8_t> values() noexcept { return values_; }

    bool same_shape(const Gray8& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const Gray8&, const Gray8&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> values_;
};

/// Transparency per pixel: 0 background, 255 opaque foreground.
class AlphaMatte : public Gray8 {
public:
    using Gray8::Gray8;
    explicit AlphaMatte(Gray8 g) : Gray8(std::move(g)) {}
};

/// Binary map of the semi-transparent pixels of a matte; values are 0 or 255.
class InverseAlpha : public Gray8 {
public:
    InverseAlpha() = default;
    InverseAlpha(int width, int height, std::vector<std::uint8_t> values);
    explicit InverseAlpha(Gray8 g);
};

/// Generic binary mask (0 / 255). Nonzero counts as set on input.
using BinaryMask = Gray8;

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    std::uint8_t operator[](int c) const { return c == 0 ? r : (c == 1 ? g : b); }
    std::uint8_t& operator[](int c) { return c == 0 ? r : (c == 1 ? g : b); }

    friend bool operator==(const Rgb&, const Rgb&) = default;
};

using KeyColor = Rgb;

class RgbImage {
public:
    RgbImage() = default;
    RgbImage(int width, int height, Rgb fill = {});

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept { return pixels_.size(); }

    Rgb operator()(int row, int col) const { return pixels_[index(row, col)]; }
    Rgb& operator()(int row, int col) { return pixels_[index(row, col)]; }
    Rgb operator[](std::size_t i) const { return pixels_[i]; }
    Rgb& operator[](std::size_t i) { return pixels_[i]; }

    std::size_t index(int row, int col) const noexcept {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(col);
    }

    std::span<const Rgb> pixels() const noexcept { return pixels_; }

    template <class Grid>
    bool same_shape(const Grid& other) const noexcept {
        return width_ == other.width() && height_ == other.height();
    }

    friend bool operator==(const RgbImage&, const RgbImage&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<Rgb> pixels_;
};

/// Quantizes a value already scaled to [0,255] with half-away-from-zero
/// rounding and clamping.
std::uint8_t quantize8(double value) noexcept;

/// Throws DimensionError unless all grids share width and height.
template <class A, class B>
void require_same_shape(const A& a, const B& b, const char* what) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw DimensionError(std::string(what) + ": dimension mismatch (" +
                             std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                             " vs " + std::to_string(b.width()) + "x" +
                             std::to_string(b.height()) + ")");
    }
}

}  // namespace mattekit
