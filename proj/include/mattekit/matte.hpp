#pragma once

#include "mattekit/image.hpp"

namespace mattekit {

/// Marks every strictly semi-transparent pixel (0 < a < 255) with 255.
InverseAlpha invert_alpha(const AlphaMatte& alpha);

/// I = a*F + (1-a)*B per channel, a = alpha/255, rounded half away from zero.
RgbImage composite(const RgbImage& fg, const AlphaMatte& alpha, const RgbImage& bg);

RgbImage solid_background(KeyColor color, int width, int height);

struct ChromaOptions {
    /// Max-channel distance (8-bit units) from the key at or beyond which a
    /// pixel is treated as fully opaque foreground.
    int opaque_distance = 64;
};

struct ChromaResult {
    AlphaMatte alpha;
    RgbImage foreground;
};

/// Recovers a (alpha, foreground) pair from a composite over a solid key.
///
/// Alpha is the larger of two estimates: the smallest alpha for which the
/// unmixed foreground stays inside [0,255] on every channel, and a linear
/// ramp on the max-channel distance to the key that saturates at
/// `opaque_distance`. The foreground is then unmixed as
/// F = (I - (1-a)K) / a, or F = I where a quantizes to 0.
/// Re-compositing the result over the key reproduces the input to within
/// one code value per channel.
ChromaResult chroma_extract(const RgbImage& composite_image, KeyColor key,
                            const ChromaOptions& options = {});

/// Largest per-channel absolute difference between two equally sized images.
int max_channel_error(const RgbImage& a, const RgbImage& b);

}  // namespace mattekit
