#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mattekit/image.hpp"

namespace mattekit {

/// Unreadable file or a PNG flavor we do not ingest (16-bit, paletted,
/// sub-byte gray, wrong channel layout).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class PngColor { gray, rgb, rgba };

/// Color image as ingested; RGBA files split their alpha into `alpha`.
struct ColorPng {
    RgbImage rgb;
    std::optional<AlphaMatte> alpha;
};

PngColor probe_png(const std::filesystem::path& path);

Gray8 read_gray_png(const std::filesystem::path& path);
AlphaMatte read_alpha_png(const std::filesystem::path& path);
ColorPng read_color_png(const std::filesystem::path& path);

void write_gray_png(const std::filesystem::path& path, const Gray8& image);
void write_rgb_png(const std::filesystem::path& path, const RgbImage& image);
/// 16-bit grayscale, used for region label dumps.
void write_gray16_png(const std::filesystem::path& path, int width, int height,
                      const std::vector<std::uint16_t>& values);

}  // namespace mattekit
