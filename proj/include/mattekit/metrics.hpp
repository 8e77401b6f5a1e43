#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mattekit/image.hpp"
#include "mattekit/trimap.hpp"

namespace mattekit {

class EmptyMaskError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Conn needs a region opaque in both mattes to measure connectivity from.
class ConnUndefinedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SequenceError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Reporting scale factors.
inline constexpr double kMadScale = 1e3;
inline constexpr double kMseScale = 1e3;
inline constexpr double kGradScale = 1e-3;
inline constexpr double kConnScale = 1e-3;
inline constexpr double kDtssdScale = 1e2;

inline constexpr double kGradSigma = 1.4;
inline constexpr double kConnStep = 0.1;
inline constexpr double kConnDelta = 0.15;

/// Grad and Conn are raw sums by convention; `mean` divides by the number of
/// evaluated pixels instead.
enum class Reduction { sum, mean };

/// Optional evaluation region: nonzero pixels are evaluated. nullptr means
/// the whole image.
using RegionMask = const BinaryMask*;

double mad(const AlphaMatte& pred, const AlphaMatte& gt, RegionMask mask = nullptr);
double mse(const AlphaMatte& pred, const AlphaMatte& gt, RegionMask mask = nullptr);
double grad(const AlphaMatte& pred, const AlphaMatte& gt, RegionMask mask = nullptr,
            Reduction reduction = Reduction::sum);
double conn(const AlphaMatte& pred, const AlphaMatte& gt, RegionMask mask = nullptr,
            Reduction reduction = Reduction::sum);
double dtssd(std::span<const AlphaMatte> pred_frames, std::span<const AlphaMatte> gt_frames);

/// Gaussian derivative kernels: `smooth` is the normalized Gaussian and
/// `derivative` its normalized first derivative, both of radius ceil(3*sigma).
/// The 2-D x-derivative filter is smooth(row) * derivative(col).
struct GaussianDerivativeKernel {
    std::vector<double> smooth;
    std::vector<double> derivative;
    int radius = 0;
};
GaussianDerivativeKernel gaussian_derivative_kernel(double sigma);

/// Per-pixel gradient magnitude of alpha/255, symmetric border reflection.
std::vector<double> gradient_magnitude(const AlphaMatte& alpha, double sigma = kGradSigma);

struct MetricReport {
    double mad = 0.0;
    double mse = 0.0;
    double grad = 0.0;
    double conn = 0.0;
    bool unknown_region_only = false;

    friend bool operator==(const MetricReport&, const MetricReport&) = default;
};

struct VideoMetricReport {
    std::vector<MetricReport> frames;
    double dtssd = 0.0;
};

struct EvalOptions {
    /// When set, every metric is restricted to the trimap's unknown region.
    const Trimap* trimap = nullptr;
    Reduction reduction = Reduction::sum;
};

MetricReport evaluate_pair(const AlphaMatte& pred, const AlphaMatte& gt,
                           const EvalOptions& options = {});

/// `trimaps`, when non-empty, supplies one unknown-region mask per frame.
VideoMetricReport evaluate_sequence(std::span<const AlphaMatte> pred_frames,
                                    std::span<const AlphaMatte> gt_frames,
                                    std::span<const Trimap> trimaps = {},
                                    Reduction reduction = Reduction::sum);

/// Field-wise arithmetic mean; empty input gives an all-zero report.
MetricReport mean_report(std::span<const MetricReport> reports);

}  // namespace mattekit
