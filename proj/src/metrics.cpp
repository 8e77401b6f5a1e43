#include "mattekit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "mattekit/connectivity.hpp"

namespace mattekit {

namespace {

void check_inputs(const AlphaMatte& pred, const AlphaMatte& gt, RegionMask mask,
                  const char* what) {
    require_same_shape(pred, gt, what);
    if (mask) {
        require_same_shape(pred, *mask, what);
        if (std::none_of(mask->values().begin(), mask->values().end(),
                         [](std::uint8_t v) { return v != 0; })) {
            throw EmptyMaskError(std::string(what) + ": evaluation mask is empty");
        }
    }
}

bool selected(RegionMask mask, std::size_t i) { return !mask || (*mask)[i] != 0; }

std::size_t selected_count(const AlphaMatte& ref, RegionMask mask) {
    if (!mask) return ref.size();
    return static_cast<std::size_t>(std::count_if(
        mask->values().begin(), mask->values().end(), [](std::uint8_t v) { return v != 0; }));
}

double reduce(double total, std::size_t count, Reduction reduction) {
    return reduction == Reduction::mean ? total / double(count) : total;
}

// Symmetric reflection: -1 -> 0, n -> n-1, repeated for tiny images.
int reflect(int i, int n) {
    const int period = 2 * n;
    int m = i % period;
    if (m < 0) m += period;
    return m < n ? m : period - 1 - m;
}

}  // namespace

double mad(const AlphaMatte& pred, const AlphaMatte& gt, RegionMask mask) {
    check_inputs(pred, gt, mask, "mad");
    double total = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (selected(mask, i)) total += std::abs(pred[i] / 255.0 - gt[i] / 255.0);
    }
    return total / double(selected_count(pred, mask)) * kMadScale;
}

double mse(const AlphaMatte& pred, const AlphaMatte& gt, RegionMask mask) {
    check_inputs(pred, gt, mask, "mse");
    double total = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (!selected(mask, i)) continue;
        const double d = pred[i] / 255.0 - gt[i] / 255.0;
        total += d * d;
    }
    return total / double(selected_count(pred, mask)) * kMseScale;
}

GaussianDerivativeKernel gaussian_derivative_kernel(double sigma) {
    GaussianDerivativeKernel k;
    k.radius = static_cast<int>(std::ceil(3.0 * sigma));
    const int n = 2 * k.radius + 1;
    k.smooth.resize(static_cast<std::size_t>(n));
    k.derivative.resize(static_cast<std::size_t>(n));
    double smooth_sq = 0.0;
    double deriv_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = i - k.radius;
        const double g = std::exp(-x * x / (2.0 * sigma * sigma)) /
                         (std::sqrt(2.0 * std::numbers::pi) * sigma);
        const double dg = -x / (sigma * sigma) * g;
        k.smooth[static_cast<std::size_t>(i)] = g;
        k.derivative[static_cast<std::size_t>(i)] = dg;
        smooth_sq += g * g;
        deriv_sq += dg * dg;
    }
    // Unit L2 norm of the 2-D filter, which factors into the two 1-D norms.
    for (auto& v : k.smooth) v /= std::sqrt(smooth_sq);
    for (auto& v : k.derivative) v /= std::sqrt(deriv_sq);
    return k;
}

std::vector<double> gradient_magnitude(const AlphaMatte& alpha, double sigma) {
    const auto k = gaussian_derivative_kernel(sigma);
    const int w = alpha.width();
    const int h = alpha.height();
    const auto at = [w](int r, int c) {
        return static_cast<std::size_t>(r) * static_cast<std::size_t>(w) +
               static_cast<std::size_t>(c);
    };

    std::vector<double> src(alpha.size());
    for (std::size_t i = 0; i < src.size(); ++i) src[i] = alpha[i] / 255.0;

    // Separable correlation: along columns first, then along rows.
    std::vector<double> row_smooth(src.size()), row_deriv(src.size());
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double s = 0.0, d = 0.0;
            for (int t = -k.radius; t <= k.radius; ++t) {
                const double v = src[at(r, reflect(c + t, w))];
                s += k.smooth[static_cast<std::size_t>(t + k.radius)] * v;
                d += k.derivative[static_cast<std::size_t>(t + k.radius)] * v;
            }
            row_smooth[at(r, c)] = s;
            row_deriv[at(r, c)] = d;
        }
    }

    std::vector<double> mag(src.size());
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            double gx = 0.0, gy = 0.0;
            for (int t = -k.radius; t <= k.radius; ++t) {
                const std::size_t rr = at(reflect(r + t, h), c);
                gx += k.smooth[static_cast<std::size_t>(t + k.radius)] * row_deriv[rr];
                gy += k.derivative[static_cast<std::size_t>(t + k.radius)] * row_smooth[rr];
            }
            mag[at(r, c)] = std::sqrt(gx * gx + gy * gy);
        }
    }
    return mag;
}

double grad(const AlphaMatte& pred, const AlphaMatte& gt, RegionMask mask, Reduction reduction) {
    check_inputs(pred, gt, mask, "grad");
    const auto pm = gradient_magnitude(pred);
    const auto gm = gradient_magnitude(gt);
    double total = 0.0;
    for (std::size_t i = 0; i < pm.size(); ++i) {
        if (!selected(mask, i)) continue;
        const double d = pm[i] - gm[i];
        total += d * d;
    }
    return reduce(total, selected_count(pred, mask), reduction) * kGradScale;
}

double conn(const AlphaMatte& pred, const AlphaMatte& gt, RegionMask mask, Reduction reduction) {
    check_inputs(pred, gt, mask, "conn");
    const int w = pred.width();
    const std::size_t n = pred.size();

    // Source region: largest 4-connected area opaque in both mattes.
    Gray8 both_opaque(pred.width(), pred.height());
    for (std::size_t i = 0; i < n; ++i) both_opaque[i] = (pred[i] == 255 && gt[i] == 255) ? 255 : 0;
    const auto opaque = connected_components(both_opaque, Connectivity::four);
    if (opaque.count() == 0) {
        throw ConnUndefinedError("conn: no pixel is opaque in both mattes");
    }
    const auto largest = static_cast<std::uint32_t>(
        std::max_element(opaque.sizes.begin(), opaque.sizes.end()) - opaque.sizes.begin() + 1);

    // level[i] = number of threshold steps at which pixel i is still connected
    // to the source. Reachability only shrinks as the threshold rises.
    const int steps = static_cast<int>(std::lround(1.0 / kConnStep));
    std::vector<int> level(n, 0);
    std::vector<std::uint8_t> seen(n);
    std::vector<std::size_t> frontier;
    for (int k = 1; k <= steps; ++k) {
        // alpha/255 >= k/steps, in integers.
        const auto above = [&](std::size_t i) {
            return pred[i] * steps >= 255 * k && gt[i] * steps >= 255 * k;
        };
        std::fill(seen.begin(), seen.end(), 0);
        frontier.clear();
        for (std::size_t i = 0; i < n; ++i) {
            if (opaque.labels[i] == largest) {
                seen[i] = 1;
                frontier.push_back(i);
            }
        }
        for (std::size_t head = 0; head < frontier.size(); ++head) {
            const std::size_t i = frontier[head];
            const int r = static_cast<int>(i / static_cast<std::size_t>(w));
            const int c = static_cast<int>(i % static_cast<std::size_t>(w));
            const Point nbrs[4] = {{r - 1, c}, {r + 1, c}, {r, c - 1}, {r, c + 1}};
            for (const auto& p : nbrs) {
                if (!pred.in_bounds(p.row, p.col)) continue;
                const std::size_t j = pred.index(p.row, p.col);
                if (!seen[j] && above(j)) {
                    seen[j] = 1;
                    frontier.push_back(j);
                }
            }
        }
        for (const auto i : frontier) level[i] = k;
    }

    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!selected(mask, i)) continue;
        const double l = level[i] / double(steps);
        const double dp = pred[i] / 255.0 - l;
        const double dg = gt[i] / 255.0 - l;
        const double phi_p = 1.0 - (dp >= kConnDelta ? dp : 0.0);
        const double phi_g = 1.0 - (dg >= kConnDelta ? dg : 0.0);
        total += std::abs(phi_p - phi_g);
    }
    return reduce(total, selected_count(pred, mask), reduction) * kConnScale;
}

double dtssd(std::span<const AlphaMatte> pred_frames, std::span<const AlphaMatte> gt_frames) {
    if (pred_frames.size() != gt_frames.size()) {
        throw SequenceError("dtssd: sequences differ in length (" +
                            std::to_string(pred_frames.size()) + " vs " +
                            std::to_string(gt_frames.size()) + ")");
    }
    if (pred_frames.size() < 2) throw SequenceError("dtssd: needs at least 2 frames");
    for (std::size_t f = 0; f < pred_frames.size(); ++f) {
        require_same_shape(pred_frames[f], pred_frames[0], "dtssd");
        require_same_shape(gt_frames[f], pred_frames[0], "dtssd");
    }

    double total = 0.0;
    const std::size_t n = pred_frames[0].size();
    for (std::size_t f = 1; f < pred_frames.size(); ++f) {
        double ssd = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dp = (pred_frames[f][i] - pred_frames[f - 1][i]) / 255.0;
            const double dg = (gt_frames[f][i] - gt_frames[f - 1][i]) / 255.0;
            ssd += (dp - dg) * (dp - dg);
        }
        total += std::sqrt(ssd / double(n));
    }
    return total / double(pred_frames.size() - 1) * kDtssdScale;
}

MetricReport evaluate_pair(const AlphaMatte& pred, const AlphaMatte& gt,
                           const EvalOptions& options) {
    if (!options.trimap) {
        MetricReport r;
        r.mad = mad(pred, gt);
        r.mse = mse(pred, gt);
        r.grad = grad(pred, gt, nullptr, options.reduction);
        r.conn = conn(pred, gt, nullptr, options.reduction);
        return r;
    }

    // Known trimap regions are taken as given: the prediction is pinned to
    // them, so only the unknown region can influence any field.
    const Trimap& trimap = *options.trimap;
    require_same_shape(pred, trimap, "evaluate_pair(trimap)");
    AlphaMatte pinned = pred;
    for (std::size_t i = 0; i < pinned.size(); ++i) {
        if (trimap[i] == kTrimapForeground) pinned[i] = 255;
        if (trimap[i] == kTrimapBackground) pinned[i] = 0;
    }
    const BinaryMask unknown = trimap.unknown_mask();
    MetricReport r;
    r.mad = mad(pinned, gt, &unknown);
    r.mse = mse(pinned, gt, &unknown);
    r.grad = grad(pinned, gt, &unknown, options.reduction);
    r.conn = conn(pinned, gt, &unknown, options.reduction);
    r.unknown_region_only = options.trimap != nullptr;
    return r;
}

VideoMetricReport evaluate_sequence(std::span<const AlphaMatte> pred_frames,
                                    std::span<const AlphaMatte> gt_frames,
                                    std::span<const Trimap> trimaps, Reduction reduction) {
    VideoMetricReport out;
    out.dtssd = dtssd(pred_frames, gt_frames);
    if (!trimaps.empty() && trimaps.size() != pred_frames.size()) {
        throw SequenceError("evaluate_sequence: one trimap per frame required");
    }
    for (std::size_t f = 0; f < pred_frames.size(); ++f) {
        EvalOptions opts;
        opts.reduction = reduction;
        if (!trimaps.empty()) opts.trimap = &trimaps[f];
        out.frames.push_back(evaluate_pair(pred_frames[f], gt_frames[f], opts));
    }
    return out;
}

MetricReport mean_report(std::span<const MetricReport> reports) {
    MetricReport m;
    if (reports.empty()) return m;
    for (const auto& r : reports) {
        m.mad += r.mad;
        m.mse += r.mse;
        m.grad += r.grad;
        m.conn += r.conn;
    }
    const double n = double(reports.size());
    m.mad /= n;
    m.mse /= n;
    m.grad /= n;
    m.conn /= n;
    m.unknown_region_only = reports.front().unknown_region_only;
    return m;
}

}  // namespace mattekit
