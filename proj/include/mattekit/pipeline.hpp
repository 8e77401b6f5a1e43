#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mattekit/config.hpp"
#include "mattekit/image.hpp"
#include "mattekit/manifest.hpp"
#include "mattekit/metrics.hpp"

namespace mattekit {

class PipelineError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Where the manifest lives and the settings a batch runs with. Sample files
/// go under `<manifest dir>/work/<id>/`.
struct PipelineContext {
    std::filesystem::path manifest_path;
    Config config;

    std::filesystem::path root() const;
    std::filesystem::path resolve(const std::string& relative) const;
    std::string relative(const std::filesystem::path& p) const;
    std::filesystem::path work_dir(const std::string& id) const;
};

struct BatchSummary {
    std::size_t processed = 0;
    std::size_t succeeded = 0;
    std::vector<std::pair<std::string, std::string>> errors;  // (id, message)
};

/// Runs fn(0..n-1) on up to `workers` threads pulling from a shared counter.
/// fn must not throw.
template <class Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
    std::atomic<std::size_t> next{0};
    auto body = [&] {
        for (std::size_t i = next++; i < n; i = next++) fn(i);
    };
    const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), n);
    if (threads <= 1) {
        body();
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(body);
}

/// Pairs `<id>_rgb.png` with `<id>_alpha.png`, or takes `<id>.png` as RGBA.
/// New samples get inverse alpha and screening stats, then land as pending or
/// flagged. Ids already in the manifest are skipped. Per-sample failures go to
/// manifest.ingest_errors.
BatchSummary ingest(const std::filesystem::path& dir, DatasetManifest& manifest, const PipelineContext& ctx);

struct ScreenOptions {
    bool accept_pending = false;
    std::vector<std::pair<std::string, SampleStatus>> decisions;  // human decisions
};

/// Re-screens pending samples with the context thresholds (pending -> flagged),
/// then applies human decisions, then optionally accepts what is still pending.
BatchSummary screen(DatasetManifest& manifest, const PipelineContext& ctx, const ScreenOptions& options);

/// Refines every accepted sample. Outputs do not depend on the worker count.
BatchSummary refine_batch(DatasetManifest& manifest, const PipelineContext& ctx);

/// Bilinear scale-to-cover followed by a center crop to width x height.
RgbImage fit_background(const RgbImage& background, int width, int height);

/// Background indices for one sample: successive seeded shuffles of
/// [0, background_count), concatenated until `per_sample` are drawn.
std::vector<std::size_t> assign_backgrounds(std::uint64_t seed, const std::string& id,
                                            std::size_t background_count, int per_sample);

BatchSummary composite_batch(DatasetManifest& manifest, const PipelineContext& ctx,
                             const std::filesystem::path& backgrounds_dir, int per_sample, std::uint64_t seed);

BatchSummary chroma_batch(DatasetManifest& manifest, const PipelineContext& ctx, KeyColor key);

/// `band` overrides the per-sample radius scaled from config.trimap_band.
BatchSummary trimap_batch(DatasetManifest& manifest, const PipelineContext& ctx, std::optional<int> band);

struct SampleEvaluation {
    std::string id;
    std::optional<MetricReport> report;
    std::optional<std::string> error;
};

struct EvalReport {
    std::vector<SampleEvaluation> samples;
    std::vector<std::string> unpaired;
    MetricReport mean;                 // over samples without errors
    std::size_t evaluated = 0;
    std::optional<double> dtssd;       // sequence mode only
    bool unknown_region_only = false;
    Reduction reduction = Reduction::sum;
};

enum class MaskMode { none, trimap };

struct EvalDirOptions {
    MaskMode mask = MaskMode::none;
    /// Trimaps named `<stem>.png`. Empty means derive them from the ground
    /// truth with the scaled default band.
    std::filesystem::path trimap_dir;
    int band = 10;
    Reduction reduction = Reduction::sum;
    bool video = false;  // treat stems, sorted, as frames of one sequence
    int workers = 1;
};

/// Compares `<stem>.png` in pred_dir against the same stem in gt_dir.
EvalReport evaluate_dirs(const std::filesystem::path& pred_dir, const std::filesystem::path& gt_dir,
                         const EvalDirOptions& options);

/// For samples with a chroma extraction: extracted alpha against the refined
/// alpha. Stores each MetricReport in its record.
EvalReport evaluate_manifest(DatasetManifest& manifest, const PipelineContext& ctx, const EvalDirOptions& options);

}  // namespace mattekit
