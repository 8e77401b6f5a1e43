#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "mattekit/image.hpp"

namespace mattekit {

class InvalidSeedError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised by refine when the matte has no pixel with alpha > 0.
class EmptyForegroundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Connectivity { four = 4, eight = 8 };

/// Labeled connected regions. Label 0 means unlabeled; labels 1..count are
/// assigned in row-major order of each region's first pixel unless a
/// producer documents otherwise.
struct RegionSet {
    int width = 0;
    int height = 0;
    Connectivity connectivity = Connectivity::four;
    std::vector<std::uint32_t> labels;
    /// sizes[k] is the pixel count of label k+1.
    std::vector<std::size_t> sizes;

    std::size_t count() const noexcept { return sizes.size(); }
    std::uint32_t label(int row, int col) const {
        return labels[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                      static_cast<std::size_t>(col)];
    }
    bool labeled(std::size_t i) const { return labels[i] != 0; }
    std::size_t labeled_pixels() const noexcept;
};

struct SeedSet {
    std::vector<Point> points;

    bool empty() const noexcept { return points.empty(); }
    std::size_t size() const noexcept { return points.size(); }
};

/// Components of the nonzero pixels of `mask`.
RegionSet connected_components(const Gray8& mask, Connectivity connectivity);

/// 4-connected components of the alpha == 0 pixels.
RegionSet background_regions(const AlphaMatte& alpha);

/// Every semi-transparent pixel 8-adjacent to a labeled background pixel,
/// in row-major order.
SeedSet edge_seed_points(const InverseAlpha& inverse, const RegionSet& background);

/// 8-connected semi-transparent components reachable from the seeds. Labels
/// follow the order in which seeds first reach a component.
RegionSet grow_semitransparent(const InverseAlpha& inverse, const SeedSet& seeds);

/// Every intermediate of one refinement pass, for screening and debugging.
struct RefineTrace {
    AlphaMatte refined;
    InverseAlpha inverse;
    RegionSet background;
    SeedSet seeds;
    RegionSet retained_semi;
    /// {alpha > 0} components after the non-retained semi-transparent pixels
    /// were forced to 255; `kept_label` is the surviving one.
    RegionSet foreground;
    std::uint32_t kept_label = 0;
};

/// Connectivity-aware refinement:
///  1. background regions = 4-connected {alpha == 0};
///  2. seeds = semi-transparent pixels touching the background (8-adjacency);
///  3. retained = 8-connected semi-transparent pixels grown from the seeds;
///  4. other semi-transparent pixels become 255, then everything outside the
///     largest 4-connected {alpha > 0} component becomes 0.
/// Largest is by pixel count, then alpha sum, then earliest first pixel.
AlphaMatte refine(const AlphaMatte& alpha);
RefineTrace refine_traced(const AlphaMatte& alpha);

struct ScreeningStats {
    /// Semi-transparent pixels over all pixels.
    double semi_fraction = 0.0;
    /// Semi-transparent pixels in retained components that touch no opaque
    /// pixel, over all semi-transparent pixels.
    double attached_noise_fraction = 0.0;
    /// Semi-transparent pixels whose value refine changes, over all
    /// semi-transparent pixels.
    double removed_fraction = 0.0;

    friend bool operator==(const ScreeningStats&, const ScreeningStats&) = default;
};

ScreeningStats screening_stats(const AlphaMatte& alpha);
ScreeningStats screening_stats(const AlphaMatte& alpha, const RefineTrace& trace);

struct ScreeningThresholds {
    double semi_fraction = 0.25;
    double attached_noise_fraction = 0.05;
    double removed_fraction = 0.30;
};

enum class ScreenVerdict { pass, flag };

/// Flags when any statistic strictly exceeds its threshold.
ScreenVerdict auto_screen(const ScreeningStats& stats, const ScreeningThresholds& thresholds);

/// Writes labels as 16-bit grayscale (saturating at 65535).
void write_label_map(const std::filesystem::path& path, const RegionSet& regions);

}  // namespace mattekit
