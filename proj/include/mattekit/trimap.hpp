#pragma once

#include "mattekit/image.hpp"

namespace mattekit {

inline constexpr std::uint8_t kTrimapBackground = 0;
inline constexpr std::uint8_t kTrimapUnknown = 128;
inline constexpr std::uint8_t kTrimapForeground = 255;

/// Values are exactly 0 (background), 128 (unknown) or 255 (foreground).
class Trimap : public Gray8 {
public:
    Trimap() = default;
    explicit Trimap(Gray8 g);

    bool unknown(std::size_t i) const { return (*this)[i] == kTrimapUnknown; }
    /// 255 where unknown, 0 elsewhere.
    BinaryMask unknown_mask() const;
};

/// What lies beyond the image edge during erosion. Erosion of a region
/// shrinks away from the border unless the outside counts as inside.
enum class Border { outside_unset, outside_set };

/// Binary morphology with a disc structuring element {dx^2 + dy^2 <= r^2}.
/// Output is 0/255; input nonzero counts as set. Radius 0 is the identity.
BinaryMask erode(const BinaryMask& mask, int radius, Border border = Border::outside_unset);
BinaryMask dilate(const BinaryMask& mask, int radius);

BinaryMask complement(const BinaryMask& mask);

/// fg = erode({a == 255}, fg_radius); bg = erode({a == 0}, bg_radius);
/// everything else unknown. The world beyond the image counts as background.
Trimap trimap_from_alpha(const AlphaMatte& alpha, int fg_radius, int bg_radius);

/// fg = erode(mask, band); bg = erode(complement(mask), band); rest unknown.
Trimap trimap_from_mask(const BinaryMask& mask, int band);

/// Band radius scaled from `base_radius` at a 512-pixel short side.
int scaled_band(int width, int height, int base_radius = 10);

}  // namespace mattekit
