#include "mattekit/connectivity.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <string>

#include "mattekit/matte.hpp"
#include "mattekit/png_io.hpp"

namespace mattekit {

namespace {

constexpr std::array<Point, 4> kOffsets4{{{-1, 0}, {0, -1}, {0, 1}, {1, 0}}};
constexpr std::array<Point, 8> kOffsets8{
    {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}}};

std::span<const Point> offsets(Connectivity c) {
    if (c == Connectivity::four) return kOffsets4;
    return kOffsets8;
}

/// Breadth-first fill over pixels where member[i] is true and labels[i] is 0.
/// Uses `frontier` as scratch; returns the number of pixels labeled.
std::size_t flood(int width, int height, const std::vector<std::uint8_t>& member,
                  std::vector<std::uint32_t>& labels, std::size_t start, std::uint32_t label,
                  Connectivity connectivity, std::vector<std::size_t>& frontier) {
    const auto nbrs = offsets(connectivity);
    frontier.clear();
    frontier.push_back(start);
    labels[start] = label;
    std::size_t head = 0;
    while (head < frontier.size()) {
        const std::size_t idx = frontier[head++];
        const int row = static_cast<int>(idx / static_cast<std::size_t>(width));
        const int col = static_cast<int>(idx % static_cast<std::size_t>(width));
        for (const auto& d : nbrs) {
            const int r = row + d.row;
            const int c = col + d.col;
            if (r < 0 || c < 0 || r >= height || c >= width) continue;
            const std::size_t n = static_cast<std::size_t>(r) * static_cast<std::size_t>(width) +
                                  static_cast<std::size_t>(c);
            if (member[n] && labels[n] == 0) {
                labels[n] = label;
                frontier.push_back(n);
            }
        }
    }
    return frontier.size();
}

RegionSet label_members(int width, int height, const std::vector<std::uint8_t>& member,
                        Connectivity connectivity) {
    RegionSet out;
    out.width = width;
    out.height = height;
    out.connectivity = connectivity;
    out.labels.assign(member.size(), 0);
    std::vector<std::size_t> frontier;
    for (std::size_t i = 0; i < member.size(); ++i) {
        if (member[i] && out.labels[i] == 0) {
            const auto label = static_cast<std::uint32_t>(out.sizes.size() + 1);
            out.sizes.push_back(flood(width, height, member, out.labels, i, label, connectivity,
                                      frontier));
        }
    }
    return out;
}

}  // namespace

std::size_t RegionSet::labeled_pixels() const noexcept {
    return std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
}

RegionSet connected_components(const Gray8& mask, Connectivity connectivity) {
    std::vector<std::uint8_t> member(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) member[i] = mask[i] != 0;
    return label_members(mask.width(), mask.height(), member, connectivity);
}

RegionSet background_regions(const AlphaMatte& alpha) {
    std::vector<std::uint8_t> member(alpha.size());
    for (std::size_t i = 0; i < alpha.size(); ++i) member[i] = alpha[i] == 0;
    return label_members(alpha.width(), alpha.height(), member, Connectivity::four);
}

SeedSet edge_seed_points(const InverseAlpha& inverse, const RegionSet& background) {
    if (inverse.width() != background.width || inverse.height() != background.height) {
        throw DimensionError("edge_seed_points: inverse alpha and background regions differ in size");
    }
    SeedSet seeds;
    for (int row = 0; row < inverse.height(); ++row) {
        for (int col = 0; col < inverse.width(); ++col) {
            if (inverse(row, col) == 0) continue;
            for (const auto& d : kOffsets8) {
                const int r = row + d.row;
                const int c = col + d.col;
                if (inverse.in_bounds(r, c) && background.label(r, c) != 0) {
                    seeds.points.push_back({row, col});
                    break;
                }
            }
        }
    }
    return seeds;
}

RegionSet grow_semitransparent(const InverseAlpha& inverse, const SeedSet& seeds) {
    RegionSet out;
    out.width = inverse.width();
    out.height = inverse.height();
    out.connectivity = Connectivity::eight;
    out.labels.assign(inverse.size(), 0);

    std::vector<std::uint8_t> member(inverse.size());
    for (std::size_t i = 0; i < inverse.size(); ++i) member[i] = inverse[i] != 0;

    std::vector<std::size_t> frontier;
    for (const auto& p : seeds.points) {
        if (!inverse.in_bounds(p.row, p.col) || inverse(p.row, p.col) == 0) {
            throw InvalidSeedError("seed (" + std::to_string(p.row) + ", " +
                                   std::to_string(p.col) +
                                   ") is not a semi-transparent pixel");
        }
        const std::size_t idx = inverse.index(p.row, p.col);
        if (out.labels[idx] != 0) continue;
        const auto label = static_cast<std::uint32_t>(out.sizes.size() + 1);
        out.sizes.push_back(flood(out.width, out.height, member, out.labels, idx, label,
                                  Connectivity::eight, frontier));
    }
    return out;
}

RefineTrace refine_traced(const AlphaMatte& alpha) {
    RefineTrace t;
    t.inverse = invert_alpha(alpha);
    t.background = background_regions(alpha);
    t.seeds = edge_seed_points(t.inverse, t.background);
    t.retained_semi = grow_semitransparent(t.inverse, t.seeds);

    AlphaMatte work = alpha;
    for (std::size_t i = 0; i < work.size(); ++i) {
        if (t.inverse[i] != 0 && !t.retained_semi.labeled(i)) work[i] = 255;
    }

    t.foreground = connected_components(work, Connectivity::four);
    if (t.foreground.count() == 0) {
        throw EmptyForegroundError("matte has no pixel with alpha > 0");
    }

    // Pick the surviving component: size, then alpha mass, then lowest label
    // (labels follow row-major first-pixel order).
    std::vector<std::uint64_t> mass(t.foreground.count(), 0);
    for (std::size_t i = 0; i < work.size(); ++i) {
        if (const auto l = t.foreground.labels[i]) mass[l - 1] += work[i];
    }
    std::uint32_t best = 1;
    for (std::uint32_t l = 2; l <= t.foreground.count(); ++l) {
        const auto& sz = t.foreground.sizes;
        if (sz[l - 1] > sz[best - 1] ||
            (sz[l - 1] == sz[best - 1] && mass[l - 1] > mass[best - 1])) {
            best = l;
        }
    }
    t.kept_label = best;

    for (std::size_t i = 0; i < work.size(); ++i) {
        if (t.foreground.labels[i] != best) work[i] = 0;
    }
    t.refined = std::move(work);
    return t;
}

AlphaMatte refine(const AlphaMatte& alpha) { return refine_traced(alpha).refined; }

ScreeningStats screening_stats(const AlphaMatte& alpha) {
    bool any_foreground = std::any_of(alpha.values().begin(), alpha.values().end(),
                                      [](std::uint8_t v) { return v != 0; });
    if (!any_foreground) return {};
    return screening_stats(alpha, refine_traced(alpha));
}

ScreeningStats screening_stats(const AlphaMatte& alpha, const RefineTrace& trace) {
    ScreeningStats s;
    const std::size_t total = alpha.size();
    std::size_t semi = 0;
    std::size_t changed = 0;
    for (std::size_t i = 0; i < total; ++i) {
        if (trace.inverse[i] == 0) continue;
        ++semi;
        if (trace.refined[i] != alpha[i]) ++changed;
    }
    if (semi == 0) return s;

    // A retained component is noise when none of its pixels touches an opaque
    // pixel of the input.
    const auto& semi_regions = trace.retained_semi;
    std::vector<std::uint8_t> touches_opaque(semi_regions.count(), 0);
    for (int row = 0; row < alpha.height(); ++row) {
        for (int col = 0; col < alpha.width(); ++col) {
            const auto l = semi_regions.label(row, col);
            if (l == 0 || touches_opaque[l - 1]) continue;
            for (const auto& d : kOffsets8) {
                const int r = row + d.row;
                const int c = col + d.col;
                if (alpha.in_bounds(r, c) && alpha(r, c) == 255) {
                    touches_opaque[l - 1] = 1;
                    break;
                }
            }
        }
    }
    std::size_t noise = 0;
    for (std::size_t k = 0; k < semi_regions.count(); ++k) {
        if (!touches_opaque[k]) noise += semi_regions.sizes[k];
    }

    s.semi_fraction = double(semi) / double(total);
    s.attached_noise_fraction = double(noise) / double(semi);
    s.removed_fraction = double(changed) / double(semi);
    return s;
}

ScreenVerdict auto_screen(const ScreeningStats& stats, const ScreeningThresholds& thresholds) {
    const bool flag = stats.semi_fraction > thresholds.semi_fraction ||
                      stats.attached_noise_fraction > thresholds.attached_noise_fraction ||
                      stats.removed_fraction > thresholds.removed_fraction;
    return flag ? ScreenVerdict::flag : ScreenVerdict::pass;
}

void write_label_map(const std::filesystem::path& path, const RegionSet& regions) {
    std::vector<std::uint16_t> values(regions.labels.size());
    std::transform(regions.labels.begin(), regions.labels.end(), values.begin(),
                   [](std::uint32_t l) { return static_cast<std::uint16_t>(std::min<std::uint32_t>(l, 65535)); });
    write_gray16_png(path, regions.width, regions.height, values);
}

}  // namespace mattekit
