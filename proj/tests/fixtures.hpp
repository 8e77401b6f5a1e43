#pragma once

// Deterministic synthetic inputs shared by unit and acceptance tests.

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "mattekit/image.hpp"

namespace fixtures {

using Rng = std::mt19937_64;

inline int uniform(Rng& rng, int lo, int hi) {  // inclusive
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

inline mattekit::AlphaMatte from_rows(const std::vector<std::vector<int>>& rows) {
    const int h = static_cast<int>(rows.size());
    const int w = static_cast<int>(rows.front().size());
    mattekit::AlphaMatte m(w, h);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) m(r, c) = static_cast<std::uint8_t>(rows[r][c]);
    return m;
}

/// 6x6: columns 0-1 background, column 2 a 128 edge band, columns 3-5
/// opaque; noise 64 at (2,0) in the background and 128 at (4,4) inside the
/// foreground.
inline mattekit::AlphaMatte refine_fixture() {
    return from_rows({
        {0, 0, 128, 255, 255, 255},
        {0, 0, 128, 255, 255, 255},
        {64, 0, 128, 255, 255, 255},
        {0, 0, 128, 255, 255, 255},
        {0, 0, 128, 255, 128, 255},
        {0, 0, 128, 255, 255, 255},
    });
}

/// Scales a matte up by an integer factor (nearest neighbor).
inline mattekit::AlphaMatte upscale(const mattekit::AlphaMatte& m, int factor) {
    mattekit::AlphaMatte out(m.width() * factor, m.height() * factor);
    for (int r = 0; r < out.height(); ++r)
        for (int c = 0; c < out.width(); ++c) out(r, c) = m(r / factor, c / factor);
    return out;
}

/// Random matte built from painted rectangles of 0, 255 and semi values, so
/// that regions, bands and islands of every kind occur.
inline mattekit::AlphaMatte random_matte(Rng& rng, int w, int h) {
    mattekit::AlphaMatte m(w, h, 0);
    const int strokes = uniform(rng, 3, 14);
    for (int s = 0; s < strokes; ++s) {
        const int r0 = uniform(rng, 0, h - 1), c0 = uniform(rng, 0, w - 1);
        const int r1 = std::min(h - 1, r0 + uniform(rng, 0, h / 2));
        const int c1 = std::min(w - 1, c0 + uniform(rng, 0, w / 2));
        const int kind = uniform(rng, 0, 3);
        for (int r = r0; r <= r1; ++r) {
            for (int c = c0; c <= c1; ++c) {
                switch (kind) {
                    case 0: m(r, c) = 0; break;
                    case 1: m(r, c) = 255; break;
                    case 2: m(r, c) = static_cast<std::uint8_t>(uniform(rng, 1, 254)); break;
                    default: m(r, c) = static_cast<std::uint8_t>(uniform(rng, 0, 3) == 0 ? uniform(rng, 0, 255) : m(r, c));
                }
            }
        }
    }
    // Sprinkle isolated noise.
    const int specks = uniform(rng, 0, w * h / 20);
    for (int s = 0; s < specks; ++s) {
        m(uniform(rng, 0, h - 1), uniform(rng, 0, w - 1)) =
            static_cast<std::uint8_t>(uniform(rng, 0, 255));
    }
    if (std::all_of(m.values().begin(), m.values().end(), [](auto v) { return v == 0; })) {
        m(h / 2, w / 2) = 200;
    }
    return m;
}

inline mattekit::RgbImage random_rgb(Rng& rng, int w, int h) {
    mattekit::RgbImage img(w, h);
    for (std::size_t i = 0; i < img.pixel_count(); ++i) {
        img[i] = {static_cast<std::uint8_t>(rng() & 0xff), static_cast<std::uint8_t>(rng() & 0xff),
                  static_cast<std::uint8_t>(rng() & 0xff)};
    }
    return img;
}

/// (pred, gt): gt has a guaranteed opaque core and a soft surround; pred is
/// gt with random edits, some of which detach or punch the core. One core
/// pixel stays opaque in both, so Conn is always defined.
inline std::pair<mattekit::AlphaMatte, mattekit::AlphaMatte> metric_pair(Rng& rng, int w, int h) {
    mattekit::AlphaMatte gt = random_matte(rng, w, h);
    for (int r = h / 4; r < h / 2; ++r)
        for (int c = w / 4; c < w / 2; ++c) gt(r, c) = 255;
    mattekit::AlphaMatte pred = gt;
    const int edits = uniform(rng, 1, w * h / 4);
    for (int e = 0; e < edits; ++e) {
        const int r = uniform(rng, 0, h - 1), c = uniform(rng, 0, w - 1);
        if (r == h / 4 && c == w / 4) continue;
        pred(r, c) = static_cast<std::uint8_t>(uniform(rng, 0, 3) == 0 ? 255 : uniform(rng, 0, 255));
    }
    return {pred, gt};
}

/// A noisy generated matte together with the clean matte refinement must
/// recover from it.
struct NoisyPortrait {
    mattekit::AlphaMatte noisy;
    mattekit::AlphaMatte clean;
    int background_blobs = 0;
    int interior_blobs = 0;
    int opaque_islands = 0;
};

/// Elliptical opaque body with a semi-transparent edge band, then noise:
/// semi blobs in the background, semi blobs deep inside the body, and
/// detached opaque islands (optionally with their own soft rim). Every
/// injected item keeps at least one clear pixel between itself and the
/// body, and interior blobs are surrounded by opaque pixels.
NoisyPortrait noisy_portrait(Rng& rng, int w, int h);

}  // namespace fixtures
