#include "mattekit/trimap.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mattekit {

namespace {

struct Offset {
    int dr;
    int dc;
};

std::vector<Offset> disc(int radius) {
    std::vector<Offset> out;
    for (int dr = -radius; dr <= radius; ++dr) {
        for (int dc = -radius; dc <= radius; ++dc) {
            if (dr * dr + dc * dc <= radius * radius) out.push_back({dr, dc});
        }
    }
    return out;
}

void check_radius(int radius) {
    if (radius < 0) throw std::invalid_argument("morphology radius must be >= 0");
}

BinaryMask binarize(const BinaryMask& mask) {
    BinaryMask out(mask.width(), mask.height());
    for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] ? 255 : 0;
    return out;
}

}  // namespace

Trimap::Trimap(Gray8 g) : Gray8(std::move(g)) {
    for (auto v : values()) {
        if (v != kTrimapBackground && v != kTrimapUnknown && v != kTrimapForeground) {
            throw std::invalid_argument("trimap values must be 0, 128 or 255");
        }
    }
}

BinaryMask Trimap::unknown_mask() const {
    BinaryMask out(width(), height());
    for (std::size_t i = 0; i < size(); ++i) out[i] = unknown(i) ? 255 : 0;
    return out;
}

BinaryMask erode(const BinaryMask& mask, int radius, Border border) {
    check_radius(radius);
    if (radius == 0) return binarize(mask);
    const auto element = disc(radius);
    const bool outside = border == Border::outside_set;
    BinaryMask out(mask.width(), mask.height());
    for (int r = 0; r < mask.height(); ++r) {
        for (int c = 0; c < mask.width(); ++c) {
            if (!mask(r, c)) continue;
            bool keep = true;
            for (const auto& o : element) {
                const int rr = r + o.dr;
                const int cc = c + o.dc;
                const bool set = mask.in_bounds(rr, cc) ? mask(rr, cc) != 0 : outside;
                if (!set) {
                    keep = false;
                    break;
                }
            }
            out(r, c) = keep ? 255 : 0;
        }
    }
    return out;
}

BinaryMask dilate(const BinaryMask& mask, int radius) {
    check_radius(radius);
    if (radius == 0) return binarize(mask);
    const auto element = disc(radius);
    BinaryMask out(mask.width(), mask.height());
    for (int r = 0; r < mask.height(); ++r) {
        for (int c = 0; c < mask.width(); ++c) {
            if (!mask(r, c)) continue;
            for (const auto& o : element) {
                const int rr = r + o.dr;
                const int cc = c + o.dc;
                if (mask.in_bounds(rr, cc)) out(rr, cc) = 255;
            }
        }
    }
    return out;
}

BinaryMask complement(const BinaryMask& mask) {
    BinaryMask out(mask.width(), mask.height());
    for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] ? 0 : 255;
    return out;
}

namespace {

Trimap assemble(const BinaryMask& fg, const BinaryMask& bg) {
    Gray8 out(fg.width(), fg.height(), kTrimapUnknown);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (fg[i]) {
            out[i] = kTrimapForeground;
        } else if (bg[i]) {
            out[i] = kTrimapBackground;
        }
    }
    return Trimap(std::move(out));
}

}  // namespace

Trimap trimap_from_alpha(const AlphaMatte& alpha, int fg_radius, int bg_radius) {
    BinaryMask opaque(alpha.width(), alpha.height());
    BinaryMask clear(alpha.width(), alpha.height());
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        opaque[i] = alpha[i] == 255 ? 255 : 0;
        clear[i] = alpha[i] == 0 ? 255 : 0;
    }
    return assemble(erode(opaque, fg_radius, Border::outside_unset),
                    erode(clear, bg_radius, Border::outside_set));
}

Trimap trimap_from_mask(const BinaryMask& mask, int band) {
    if (band < 1) throw std::invalid_argument("trimap band must be >= 1");
    return assemble(erode(mask, band, Border::outside_unset),
                    erode(complement(mask), band, Border::outside_set));
}

int scaled_band(int width, int height, int base_radius) {
    const int short_side = std::min(width, height);
    const long scaled = std::lround(base_radius * short_side / 512.0);
    return static_cast<int>(std::max(1L, scaled));
}

}  // namespace mattekit
