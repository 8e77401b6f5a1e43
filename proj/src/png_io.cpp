#include "mattekit/png_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <memory>

namespace mattekit {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const noexcept {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) {
        throw FormatError("cannot open " + path.string());
    }
    return f;
}

struct RawPng {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<std::uint8_t> data;
};

void on_png_error(png_structp png, png_const_charp msg) {
    auto* text = static_cast<std::string*>(png_get_error_ptr(png));
    if (text) *text = msg;
    png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

// Classic libpng reader: the simplified API converts 16-bit and paletted
// input silently, and those must be rejected here.
RawPng read_raw(const std::filesystem::path& path) {
    auto file = open_file(path, "rb");
    unsigned char sig[8];
    if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
        throw FormatError(path.string() + ": not a PNG file");
    }

    std::string error_text;
    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, &error_text, on_png_error, on_png_warning);
    if (!png) throw FormatError("libpng: out of memory");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw FormatError("libpng: out of memory");
    }

    RawPng out;
    std::string reject;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError(path.string() + ": " + error_text);
    }

    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);
    if (bit_depth != 8) {
        reject = "unsupported bit depth " + std::to_string(bit_depth) + " (8-bit only)";
    } else if (color_type == PNG_COLOR_TYPE_PALETTE) {
        reject = "paletted PNG is not supported";
    } else if (color_type == PNG_COLOR_TYPE_GRAY) {
        out.channels = 1;
    } else if (color_type == PNG_COLOR_TYPE_RGB) {
        out.channels = 3;
    } else if (color_type == PNG_COLOR_TYPE_RGB_ALPHA) {
        out.channels = 4;
    } else {
        reject = "gray+alpha PNG is not supported";
    }
    if (!reject.empty()) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError(path.string() + ": " + reject);
    }

    out.width = static_cast<int>(png_get_image_width(png, info));
    out.height = static_cast<int>(png_get_image_height(png, info));
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    const std::size_t stride = static_cast<std::size_t>(out.width) * out.channels;
    out.data.resize(stride * static_cast<std::size_t>(out.height));
    rows.resize(static_cast<std::size_t>(out.height));
    for (int y = 0; y < out.height; ++y) {
        rows[static_cast<std::size_t>(y)] = out.data.data() + stride * static_cast<std::size_t>(y);
    }
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

void write_raw(const std::filesystem::path& path, int width, int height, int color_type,
               int bit_depth, const std::uint8_t* data, std::size_t stride) {
    auto file = open_file(path, "wb");
    std::string error_text;
    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, &error_text, on_png_error, on_png_warning);
    if (!png) throw FormatError("libpng: out of memory");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw FormatError("libpng: out of memory");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw FormatError(path.string() + ": " + error_text);
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
                 bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    if (bit_depth == 16) png_set_swap(png);
    for (int y = 0; y < height; ++y) {
        png_write_row(png, data + stride * static_cast<std::size_t>(y));
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    if (std::fflush(file.get()) != 0) {
        throw FormatError("write failed: " + path.string());
    }
}

}  // namespace

PngColor probe_png(const std::filesystem::path& path) {
    const auto raw = read_raw(path);
    switch (raw.channels) {
        case 1: return PngColor::gray;
        case 3: return PngColor::rgb;
        default: return PngColor::rgba;
    }
}

Gray8 read_gray_png(const std::filesystem::path& path) {
    auto raw = read_raw(path);
    if (raw.channels != 1) {
        throw FormatError(path.string() + ": expected 8-bit grayscale PNG");
    }
    return Gray8(raw.width, raw.height, std::move(raw.data));
}

AlphaMatte read_alpha_png(const std::filesystem::path& path) {
    return AlphaMatte(read_gray_png(path));
}

ColorPng read_color_png(const std::filesystem::path& path) {
    const auto raw = read_raw(path);
    if (raw.channels != 3 && raw.channels != 4) {
        throw FormatError(path.string() + ": expected 8-bit RGB or RGBA PNG");
    }
    ColorPng out;
    out.rgb = RgbImage(raw.width, raw.height);
    if (raw.channels == 4) out.alpha = AlphaMatte(raw.width, raw.height);
    const std::size_t n = out.rgb.pixel_count();
    for (std::size_t i = 0; i < n; ++i) {
        const auto* px = raw.data.data() + i * static_cast<std::size_t>(raw.channels);
        out.rgb[i] = Rgb{px[0], px[1], px[2]};
        if (out.alpha) (*out.alpha)[i] = px[3];
    }
    return out;
}

void write_gray_png(const std::filesystem::path& path, const Gray8& image) {
    write_raw(path, image.width(), image.height(), PNG_COLOR_TYPE_GRAY, 8, image.values().data(),
              static_cast<std::size_t>(image.width()));
}

void write_rgb_png(const std::filesystem::path& path, const RgbImage& image) {
    static_assert(sizeof(Rgb) == 3);
    write_raw(path, image.width(), image.height(), PNG_COLOR_TYPE_RGB, 8,
              reinterpret_cast<const std::uint8_t*>(image.pixels().data()),
              static_cast<std::size_t>(image.width()) * 3);
}

void write_gray16_png(const std::filesystem::path& path, int width, int height,
                      const std::vector<std::uint16_t>& values) {
    if (values.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw DimensionError("label map size does not match dimensions");
    }
    write_raw(path, width, height, PNG_COLOR_TYPE_GRAY, 16,
              reinterpret_cast<const std::uint8_t*>(values.data()),
              static_cast<std::size_t>(width) * 2);
}

}  // namespace mattekit
