#include "mattekit/matte.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace mattekit {

InverseAlpha invert_alpha(const AlphaMatte& alpha) {
    std::vector<std::uint8_t> out(alpha.size());
    const auto in = alpha.values();
    for (std::size_t i = 0; i < in.size(); ++i) {
        out[i] = (in[i] == 0 || in[i] == 255) ? 0 : 255;
    }
    return InverseAlpha(alpha.width(), alpha.height(), std::move(out));
}

RgbImage composite(const RgbImage& fg, const AlphaMatte& alpha, const RgbImage& bg) {
    require_same_shape(fg, alpha, "composite(fg, alpha)");
    require_same_shape(fg, bg, "composite(fg, bg)");
    RgbImage out(fg.width(), fg.height());
    for (std::size_t i = 0; i < out.pixel_count(); ++i) {
        const std::uint8_t a8 = alpha[i];
        if (a8 == 255) {
            out[i] = fg[i];
            continue;
        }
        if (a8 == 0) {
            out[i] = bg[i];
            continue;
        }
        const double a = a8 / 255.0;
        for (int c = 0; c < 3; ++c) {
            out[i][c] = quantize8(a * fg[i][c] + (1.0 - a) * bg[i][c]);
        }
    }
    return out;
}

RgbImage solid_background(KeyColor color, int width, int height) {
    return RgbImage(width, height, color);
}

ChromaResult chroma_extract(const RgbImage& image, KeyColor key, const ChromaOptions& options) {
    const int ramp = std::max(1, options.opaque_distance);
    ChromaResult out{AlphaMatte(image.width(), image.height()),
                     RgbImage(image.width(), image.height())};

    for (std::size_t i = 0; i < image.pixel_count(); ++i) {
        const Rgb px = image[i];
        double minimal = 0.0;
        int distance = 0;
        for (int c = 0; c < 3; ++c) {
            const int diff = int(px[c]) - int(key[c]);
            distance = std::max(distance, std::abs(diff));
            // Room between the key and the channel extreme on the side the
            // pixel lies; zero room implies diff == 0.
            const int room = diff >= 0 ? 255 - key[c] : key[c];
            if (room > 0) minimal = std::max(minimal, std::abs(diff) / double(room));
        }
        const double ramped = std::min(1.0, distance / double(ramp));
        const double a = std::clamp(std::max(minimal, ramped), 0.0, 1.0);
        const std::uint8_t a8 = quantize8(a * 255.0);
        out.alpha[i] = a8;

        if (a8 == 0) {
            out.foreground[i] = px;
            continue;
        }
        const double aq = a8 / 255.0;
        Rgb f;
        for (int c = 0; c < 3; ++c) {
            f[c] = quantize8((px[c] - (1.0 - aq) * key[c]) / aq);
        }
        out.foreground[i] = f;
    }
    return out;
}

int max_channel_error(const RgbImage& a, const RgbImage& b) {
    require_same_shape(a, b, "max_channel_error");
    int worst = 0;
    for (std::size_t i = 0; i < a.pixel_count(); ++i) {
        for (int c = 0; c < 3; ++c) {
            worst = std::max(worst, std::abs(int(a[i][c]) - int(b[i][c])));
        }
    }
    return worst;
}

}  // namespace mattekit
