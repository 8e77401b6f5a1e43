#include "fixtures.hpp"

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"

namespace fixtures {

using mattekit::AlphaMatte;

namespace {

struct Blob {
    int row, col, height, width;
};

// No pixel of `occupied` within Chebyshev distance `margin` of the box.
bool clear_around(const std::vector<bool>& occupied, int w, int h, const Blob& b, int margin) {
    for (int r = b.row - margin; r < b.row + b.height + margin; ++r) {
        for (int c = b.col - margin; c < b.col + b.width + margin; ++c) {
            if (r < 0 || c < 0 || r >= h || c >= w) continue;
            if (occupied[static_cast<std::size_t>(r * w + c)]) return false;
        }
    }
    return true;
}

void mark(std::vector<bool>& occupied, int w, const Blob& b) {
    for (int r = b.row; r < b.row + b.height; ++r)
        for (int c = b.col; c < b.col + b.width; ++c) occupied[static_cast<std::size_t>(r * w + c)] = true;
}

AlphaMatte clean_body(Rng& rng, int w, int h) {
    AlphaMatte m(w, h, 0);
    const double cy = h / 2.0 + uniform(rng, -2, 2);
    const double cx = w / 2.0 + uniform(rng, -2, 2);
    const double ry = h * (0.18 + 0.12 * (uniform(rng, 0, 100) / 100.0));
    const double rx = w * (0.18 + 0.12 * (uniform(rng, 0, 100) / 100.0));
    const double band = 0.12 + 0.25 * (uniform(rng, 0, 100) / 100.0);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const double d = std::hypot((r - cy) / ry, (c - cx) / rx);
            if (d <= 1.0) {
                m(r, c) = 255;
            } else if (d <= 1.0 + band) {
                const double t = 1.0 - (d - 1.0) / band;
                m(r, c) = static_cast<std::uint8_t>(std::clamp(std::lround(254 * t), 1L, 254L));
            }
        }
    }
    // A few 4-connected staircase strands of soft hair leaving the band.
    const int strands = uniform(rng, 0, 4);
    for (int s = 0; s < strands; ++s) {
        int r = static_cast<int>(cy - ry * (1.0 + band)) + 1;
        int c = static_cast<int>(cx) + uniform(rng, -3, 3);
        const int dir = uniform(rng, 0, 1) ? 1 : -1;
        const int len = uniform(rng, 2, 6);
        for (int k = 0; k < len; ++k) {
            (k % 2 ? c : r) += (k % 2 ? dir : -1);
            if (r < 1 || c < 1 || r >= h - 1 || c >= w - 1) break;
            if (m(r, c) == 0) m(r, c) = static_cast<std::uint8_t>(uniform(rng, 20, 200));
        }
    }
    return m;
}

}  // namespace

NoisyPortrait noisy_portrait(Rng& rng, int w, int h) {
    for (int attempt = 0; attempt < 100; ++attempt) {
        NoisyPortrait out;
        out.clean = clean_body(rng, w, h);
        if (oracle::refine(out.clean) != out.clean) continue;  // not a fixed point; redraw

        out.noisy = out.clean;
        const std::size_t n = out.clean.size();
        std::vector<bool> body(n), placed(n, false);
        for (std::size_t i = 0; i < n; ++i) body[i] = out.clean[i] > 0;

        const int want_bg = uniform(rng, 1, 5);
        const int want_interior = uniform(rng, 1, 4);
        const int want_islands = uniform(rng, 1, 3);

        for (int tries = 0; tries < 400 && out.background_blobs < want_bg; ++tries) {
            const Blob b{uniform(rng, 0, h - 3), uniform(rng, 0, w - 3), uniform(rng, 1, 3),
                         uniform(rng, 1, 3)};
            if (!clear_around(body, w, h, b, 2) || !clear_around(placed, w, h, b, 2)) continue;
            for (int r = b.row; r < b.row + b.height; ++r)
                for (int c = b.col; c < b.col + b.width; ++c)
                    out.noisy(r, c) = static_cast<std::uint8_t>(uniform(rng, 1, 254));
            mark(placed, w, b);
            ++out.background_blobs;
        }

        for (int tries = 0; tries < 400 && out.opaque_islands < want_islands; ++tries) {
            const Blob b{uniform(rng, 0, h - 4), uniform(rng, 0, w - 4), uniform(rng, 1, 4),
                         uniform(rng, 1, 4)};
            if (!clear_around(body, w, h, b, 2) || !clear_around(placed, w, h, b, 2)) continue;
            const bool soft_rim = b.height >= 3 && b.width >= 3 && uniform(rng, 0, 1);
            for (int r = b.row; r < b.row + b.height; ++r) {
                for (int c = b.col; c < b.col + b.width; ++c) {
                    const bool rim = r == b.row || c == b.col || r == b.row + b.height - 1 ||
                                     c == b.col + b.width - 1;
                    out.noisy(r, c) = (soft_rim && rim)
                                          ? static_cast<std::uint8_t>(uniform(rng, 1, 254))
                                          : 255;
                }
            }
            mark(placed, w, b);
            ++out.opaque_islands;
        }

        for (int tries = 0; tries < 400 && out.interior_blobs < want_interior; ++tries) {
            const Blob b{uniform(rng, 0, h - 3), uniform(rng, 0, w - 3), uniform(rng, 1, 2),
                         uniform(rng, 1, 2)};
            // Blob and its one-pixel ring must be opaque in the clean matte.
            bool ok = true;
            for (int r = b.row - 1; ok && r <= b.row + b.height; ++r)
                for (int c = b.col - 1; ok && c <= b.col + b.width; ++c)
                    ok = out.clean.in_bounds(r, c) && out.clean(r, c) == 255;
            if (!ok) continue;
            for (int r = b.row; r < b.row + b.height; ++r)
                for (int c = b.col; c < b.col + b.width; ++c)
                    out.noisy(r, c) = static_cast<std::uint8_t>(uniform(rng, 1, 254));
            ++out.interior_blobs;
        }

        if (out.background_blobs > 0 && out.interior_blobs > 0 && out.opaque_islands > 0) {
            return out;
        }
    }
    throw std::runtime_error("noisy_portrait: could not place noise; image too small");
}

}  // namespace fixtures
