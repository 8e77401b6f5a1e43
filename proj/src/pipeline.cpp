#include "mattekit/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "mattekit/connectivity.hpp"
#include "mattekit/matte.hpp"
#include "mattekit/png_io.hpp"
#include "mattekit/trimap.hpp"

namespace mattekit {

namespace fs = std::filesystem;

fs::path PipelineContext::root() const {
    const auto parent = fs::absolute(manifest_path).lexically_normal().parent_path();
    return parent;
}

fs::path PipelineContext::resolve(const std::string& relative) const {
    return (root() / relative).lexically_normal();
}

std::string PipelineContext::relative(const fs::path& p) const {
    return fs::absolute(p).lexically_normal().lexically_relative(root()).generic_string();
}

fs::path PipelineContext::work_dir(const std::string& id) const { return root() / "work" / id; }

namespace {

std::string describe(const std::exception& e) { return e.what(); }

std::vector<fs::path> list_pngs(const fs::path& dir) {
    if (!fs::is_directory(dir)) throw PipelineError("not a directory: " + dir.string());
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".png") out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

struct IngestSource {
    std::string id;
    fs::path rgb;
    fs::path alpha;
    fs::path rgba;
    std::optional<std::string> problem;
};

std::vector<IngestSource> pair_sources(const std::vector<fs::path>& files) {
    std::map<std::string, IngestSource> by_id;
    for (const auto& f : files) {
        const std::string stem = f.stem().string();
        if (ends_with(stem, "_rgb")) {
            auto& s = by_id[stem.substr(0, stem.size() - 4)];
            s.rgb = f;
        } else if (ends_with(stem, "_alpha")) {
            auto& s = by_id[stem.substr(0, stem.size() - 6)];
            s.alpha = f;
        } else {
            by_id[stem].rgba = f;
        }
    }
    std::vector<IngestSource> out;
    for (auto& [id, s] : by_id) {
        s.id = id;
        const bool pair = !s.rgb.empty() || !s.alpha.empty();
        if (pair && !s.rgba.empty()) {
            s.problem = "both a pair and a single RGBA file use id '" + id + "'";
        } else if (pair && s.rgb.empty()) {
            s.problem = "unpaired file " + s.alpha.filename().string() + " (missing " + id + "_rgb.png)";
        } else if (pair && s.alpha.empty()) {
            s.problem = "unpaired file " + s.rgb.filename().string() + " (missing " + id + "_alpha.png)";
        }
        out.push_back(std::move(s));
    }
    return out;
}

struct IngestResult {
    std::optional<SampleRecord> record;
    std::optional<std::string> error;
};

IngestResult ingest_one(const IngestSource& src, const PipelineContext& ctx, const std::string& now) {
    if (src.problem) return {std::nullopt, src.problem};
    try {
        SampleRecord r;
        r.id = src.id;
        const fs::path work = ctx.work_dir(src.id);
        AlphaMatte alpha;
        if (!src.rgba.empty()) {
            auto png = read_color_png(src.rgba);
            if (!png.alpha) throw FormatError(src.rgba.filename().string() + " has no alpha channel; expected RGBA or an _rgb/_alpha pair");
            fs::create_directories(work);
            write_rgb_png(work / "rgb.png", png.rgb);
            write_gray_png(work / "alpha.png", *png.alpha);
            r.paths.rgb = ctx.relative(work / "rgb.png");
            r.paths.alpha = ctx.relative(work / "alpha.png");
            alpha = std::move(*png.alpha);
        } else {
            const auto rgb = read_color_png(src.rgb);
            alpha = read_alpha_png(src.alpha);
            if (!rgb.rgb.same_shape(alpha)) {
                throw DimensionError("dimension mismatch: " + src.rgb.filename().string() + " is " +
                                     std::to_string(rgb.rgb.width()) + "x" + std::to_string(rgb.rgb.height()) + ", " +
                                     src.alpha.filename().string() + " is " + std::to_string(alpha.width()) + "x" +
                                     std::to_string(alpha.height()));
            }
            fs::create_directories(work);
            r.paths.rgb = ctx.relative(src.rgb);
            r.paths.alpha = ctx.relative(src.alpha);
        }
        write_gray_png(work / "inverse.png", invert_alpha(alpha));
        r.paths.inverse = ctx.relative(work / "inverse.png");
        r.screening = screening_stats(alpha);
        if (auto_screen(r.screening, ctx.config.thresholds) == ScreenVerdict::flag) {
            r.status = SampleStatus::flagged;
            r.decided_by = DecidedBy::automatic;
        }
        r.created_at = now;
        r.updated_at = now;
        return {std::move(r), std::nullopt};
    } catch (const std::exception& e) {
        return {std::nullopt, describe(e)};
    }
}

std::vector<SampleRecord*> with_status(DatasetManifest& m, SampleStatus s) {
    std::vector<SampleRecord*> out;
    for (auto& r : m.samples)
        if (r.status == s) out.push_back(&r);
    return out;
}

// Runs work(i) for each target on the pool, then merges in id order (targets
// are already id-sorted because manifest samples are).
template <class Result, class Work, class Merge>
BatchSummary run_batch(const std::vector<SampleRecord*>& targets, int workers, Work&& work, Merge&& merge) {
    std::vector<Result> results(targets.size());
    parallel_for(targets.size(), workers, [&](std::size_t i) { results[i] = work(*targets[i]); });
    BatchSummary summary;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        ++summary.processed;
        if (auto err = merge(*targets[i], results[i])) {
            summary.errors.emplace_back(targets[i]->id, *err);
        } else {
            ++summary.succeeded;
        }
    }
    return summary;
}

}  // namespace

BatchSummary ingest(const fs::path& dir, DatasetManifest& manifest, const PipelineContext& ctx) {
    const auto sources = pair_sources(list_pngs(dir));
    std::vector<const IngestSource*> fresh;
    for (const auto& s : sources)
        if (!manifest.find(s.id)) fresh.push_back(&s);

    const std::string now = timestamp_now();
    std::vector<IngestResult> results(fresh.size());
    parallel_for(fresh.size(), ctx.config.workers, [&](std::size_t i) { results[i] = ingest_one(*fresh[i], ctx, now); });

    BatchSummary summary;
    for (std::size_t i = 0; i < fresh.size(); ++i) {
        ++summary.processed;
        const auto& id = fresh[i]->id;
        std::erase_if(manifest.ingest_errors, [&](const IngestIssue& e) { return e.id == id; });
        if (results[i].record) {
            manifest.insert(std::move(*results[i].record));
            ++summary.succeeded;
        } else {
            manifest.ingest_errors.push_back({id, *results[i].error});
            summary.errors.emplace_back(id, *results[i].error);
        }
    }
    std::sort(manifest.ingest_errors.begin(), manifest.ingest_errors.end(),
              [](const IngestIssue& a, const IngestIssue& b) { return a.id < b.id; });
    return summary;
}

BatchSummary screen(DatasetManifest& manifest, const PipelineContext& ctx, const ScreenOptions& options) {
    BatchSummary summary;
    const std::string now = timestamp_now();
    for (auto* r : with_status(manifest, SampleStatus::pending)) {
        ++summary.processed;
        ++summary.succeeded;
        if (auto_screen(r->screening, ctx.config.thresholds) == ScreenVerdict::flag) {
            transition(*r, SampleStatus::flagged, DecidedBy::automatic, now);
        }
    }
    for (const auto& [id, to] : options.decisions) {
        ++summary.processed;
        auto* r = manifest.find(id);
        if (!r) {
            summary.errors.emplace_back(id, "no such sample");
            continue;
        }
        try {
            transition(*r, to, DecidedBy::human, now);
            ++summary.succeeded;
        } catch (const TransitionError& e) {
            summary.errors.emplace_back(id, e.what());
        }
    }
    if (options.accept_pending) {
        for (auto* r : with_status(manifest, SampleStatus::pending)) {
            ++summary.processed;
            ++summary.succeeded;
            transition(*r, SampleStatus::accepted, DecidedBy::automatic, now);
        }
    }
    return summary;
}

BatchSummary refine_batch(DatasetManifest& manifest, const PipelineContext& ctx) {
    struct Result {
        std::string refined;
        std::optional<std::string> error;
    };
    const std::string now = timestamp_now();
    return run_batch<Result>(
        with_status(manifest, SampleStatus::accepted), ctx.config.workers,
        [&](const SampleRecord& r) -> Result {
            try {
                const auto refined = refine(read_alpha_png(ctx.resolve(r.paths.alpha)));
                const auto out = ctx.work_dir(r.id) / "refined.png";
                fs::create_directories(out.parent_path());
                write_gray_png(out, refined);
                return {ctx.relative(out), std::nullopt};
            } catch (const std::exception& e) {
                return {{}, describe(e)};
            }
        },
        [&](SampleRecord& r, Result& res) -> std::optional<std::string> {
            if (res.error) {
                r.error = res.error;
                r.updated_at = now;
                return res.error;
            }
            r.paths.refined = res.refined;
            r.error.reset();
            transition(r, SampleStatus::refined, DecidedBy::automatic, now);
            return std::nullopt;
        });
}

RgbImage fit_background(const RgbImage& bg, int width, int height) {
    if (bg.width() < 1 || bg.height() < 1) throw DimensionError("empty background");
    RgbImage out(width, height);
    const double s = std::max(double(width) / bg.width(), double(height) / bg.height());
    const double ox = (bg.width() * s - width) / 2.0;
    const double oy = (bg.height() * s - height) / 2.0;
    auto source = [&](int i, double offset, int extent) {
        const double v = (i + offset + 0.5) / s - 0.5;
        return std::clamp(v, 0.0, double(extent - 1));
    };
    for (int y = 0; y < height; ++y) {
        const double sy = source(y, oy, bg.height());
        const int y0 = static_cast<int>(sy);
        const int y1 = std::min(y0 + 1, bg.height() - 1);
        const double fy = sy - y0;
        for (int x = 0; x < width; ++x) {
            const double sx = source(x, ox, bg.width());
            const int x0 = static_cast<int>(sx);
            const int x1 = std::min(x0 + 1, bg.width() - 1);
            const double fx = sx - x0;
            Rgb px;
            for (int c = 0; c < 3; ++c) {
                const double top = bg(y0, x0)[c] * (1 - fx) + bg(y0, x1)[c] * fx;
                const double bot = bg(y1, x0)[c] * (1 - fx) + bg(y1, x1)[c] * fx;
                px[c] = quantize8(top * (1 - fy) + bot * fy);
            }
            out(y, x) = px;
        }
    }
    return out;
}

std::vector<std::size_t> assign_backgrounds(std::uint64_t seed, const std::string& id, std::size_t background_count,
                                            int per_sample) {
    std::vector<std::size_t> out;
    if (per_sample <= 0) return out;
    if (background_count == 0) throw PipelineError("no background images");
    PipelineRng rng(derive_seed(seed, "composite:" + id));
    std::vector<std::size_t> order(background_count);
    while (out.size() < static_cast<std::size_t>(per_sample)) {
        for (std::size_t i = 0; i < background_count; ++i) order[i] = i;
        for (std::size_t i = background_count; i > 1; --i) std::swap(order[i - 1], order[bounded(rng, i)]);
        for (std::size_t i = 0; i < background_count && out.size() < static_cast<std::size_t>(per_sample); ++i) {
            out.push_back(order[i]);
        }
    }
    return out;
}

BatchSummary composite_batch(DatasetManifest& manifest, const PipelineContext& ctx, const fs::path& backgrounds_dir,
                             int per_sample, std::uint64_t seed) {
    if (per_sample < 0) throw std::invalid_argument("per_sample must be >= 0");
    const auto targets = with_status(manifest, SampleStatus::refined);
    if (per_sample == 0 || targets.empty()) return {};
    const auto backgrounds = list_pngs(backgrounds_dir);
    if (backgrounds.empty()) throw PipelineError("empty background directory " + backgrounds_dir.string());

    struct Result {
        std::vector<CompositeEntry> entries;
        std::optional<std::string> error;
    };
    const std::string now = timestamp_now();
    return run_batch<Result>(
        targets, ctx.config.workers,
        [&](const SampleRecord& r) -> Result {
            try {
                const auto fg = read_color_png(ctx.resolve(r.paths.rgb)).rgb;
                const auto alpha = read_alpha_png(ctx.resolve(r.paths.refined));
                require_same_shape(fg, alpha, "composite");
                Result res;
                const auto picks = assign_backgrounds(seed, r.id, backgrounds.size(), per_sample);
                for (std::size_t k = 0; k < picks.size(); ++k) {
                    const auto& bg_path = backgrounds[picks[k]];
                    const auto bg = fit_background(read_color_png(bg_path).rgb, fg.width(), fg.height());
                    const auto out = ctx.work_dir(r.id) / ("composite_" + std::to_string(k) + ".png");
                    write_rgb_png(out, composite(fg, alpha, bg));
                    res.entries.push_back({bg_path.filename().string(), ctx.relative(out)});
                }
                return res;
            } catch (const std::exception& e) {
                return {{}, describe(e)};
            }
        },
        [&](SampleRecord& r, Result& res) -> std::optional<std::string> {
            r.updated_at = now;
            if (res.error) {
                r.error = res.error;
                return res.error;
            }
            r.error.reset();
            r.paths.composites = std::move(res.entries);
            return std::nullopt;
        });
}

BatchSummary chroma_batch(DatasetManifest& manifest, const PipelineContext& ctx, KeyColor key) {
    struct Result {
        ChromaRecord chroma;
        std::optional<std::string> error;
    };
    const std::string now = timestamp_now();
    ChromaOptions opts;
    opts.opaque_distance = ctx.config.opaque_distance;
    return run_batch<Result>(
        with_status(manifest, SampleStatus::refined), ctx.config.workers,
        [&](const SampleRecord& r) -> Result {
            try {
                const auto fg = read_color_png(ctx.resolve(r.paths.rgb)).rgb;
                const auto alpha = read_alpha_png(ctx.resolve(r.paths.refined));
                require_same_shape(fg, alpha, "chroma");
                const auto backdrop = solid_background(key, fg.width(), fg.height());
                const auto keyed = composite(fg, alpha, backdrop);
                const auto extracted = chroma_extract(keyed, key, opts);
                const auto recomposed = composite(extracted.foreground, extracted.alpha, backdrop);

                const auto dir = ctx.work_dir(r.id);
                write_rgb_png(dir / "chroma_composite.png", keyed);
                write_gray_png(dir / "chroma_alpha.png", extracted.alpha);
                write_rgb_png(dir / "chroma_fg.png", extracted.foreground);
                Result res;
                res.chroma.composite = ctx.relative(dir / "chroma_composite.png");
                res.chroma.alpha = ctx.relative(dir / "chroma_alpha.png");
                res.chroma.foreground = ctx.relative(dir / "chroma_fg.png");
                res.chroma.roundtrip_max_error = max_channel_error(recomposed, keyed);
                res.chroma.mad = mad(extracted.alpha, alpha);
                return res;
            } catch (const std::exception& e) {
                return {{}, describe(e)};
            }
        },
        [&](SampleRecord& r, Result& res) -> std::optional<std::string> {
            r.updated_at = now;
            if (res.error) {
                r.error = res.error;
                return res.error;
            }
            r.error.reset();
            r.chroma = res.chroma;
            return std::nullopt;
        });
}

BatchSummary trimap_batch(DatasetManifest& manifest, const PipelineContext& ctx, std::optional<int> band) {
    if (band && *band < 0) throw std::invalid_argument("band must be >= 0");
    struct Result {
        std::string path;
        std::optional<std::string> error;
    };
    const std::string now = timestamp_now();
    return run_batch<Result>(
        with_status(manifest, SampleStatus::refined), ctx.config.workers,
        [&](const SampleRecord& r) -> Result {
            try {
                const auto alpha = read_alpha_png(ctx.resolve(r.paths.refined));
                const int radius = band ? *band : scaled_band(alpha.width(), alpha.height(), ctx.config.trimap_band);
                const auto out = ctx.work_dir(r.id) / "trimap.png";
                write_gray_png(out, trimap_from_alpha(alpha, radius, radius));
                return {ctx.relative(out), std::nullopt};
            } catch (const std::exception& e) {
                return {{}, describe(e)};
            }
        },
        [&](SampleRecord& r, Result& res) -> std::optional<std::string> {
            r.updated_at = now;
            if (res.error) {
                r.error = res.error;
                return res.error;
            }
            r.error.reset();
            r.paths.trimap = res.path;
            return std::nullopt;
        });
}

namespace {

struct EvalInput {
    std::string id;
    fs::path pred;
    fs::path gt;
    fs::path trimap;  // empty: derive from gt when masking
};

Trimap load_or_derive_trimap(const EvalInput& in, const AlphaMatte& gt, const EvalDirOptions& options) {
    if (!in.trimap.empty()) {
        const Trimap t(read_gray_png(in.trimap));
        require_same_shape(t, gt, "trimap");
        return t;
    }
    return trimap_from_alpha(gt, scaled_band(gt.width(), gt.height(), options.band),
                             scaled_band(gt.width(), gt.height(), options.band));
}

void finish(EvalReport& report) {
    std::vector<MetricReport> ok;
    for (const auto& s : report.samples)
        if (s.report) ok.push_back(*s.report);
    report.evaluated = ok.size();
    report.mean = mean_report(ok);
    report.mean.unknown_region_only = report.unknown_region_only;
}

EvalReport evaluate_inputs(const std::vector<EvalInput>& inputs, const EvalDirOptions& options) {
    EvalReport report;
    report.unknown_region_only = options.mask == MaskMode::trimap;
    report.reduction = options.reduction;
    report.samples.resize(inputs.size());

    if (options.video) {
        std::vector<AlphaMatte> preds, gts;
        std::vector<Trimap> trimaps;
        try {
            for (const auto& in : inputs) {
                preds.push_back(read_alpha_png(in.pred));
                gts.push_back(read_alpha_png(in.gt));
                if (report.unknown_region_only) trimaps.push_back(load_or_derive_trimap(in, gts.back(), options));
            }
            const auto seq = evaluate_sequence(preds, gts, trimaps, options.reduction);
            for (std::size_t i = 0; i < inputs.size(); ++i) report.samples[i] = {inputs[i].id, seq.frames[i], std::nullopt};
            report.dtssd = seq.dtssd;
        } catch (const std::exception& e) {
            for (std::size_t i = 0; i < inputs.size(); ++i) report.samples[i] = {inputs[i].id, std::nullopt, describe(e)};
        }
        finish(report);
        return report;
    }

    parallel_for(inputs.size(), options.workers, [&](std::size_t i) {
        const auto& in = inputs[i];
        auto& out = report.samples[i];
        out.id = in.id;
        try {
            const auto pred = read_alpha_png(in.pred);
            const auto gt = read_alpha_png(in.gt);
            std::optional<Trimap> trimap;
            if (report.unknown_region_only) trimap = load_or_derive_trimap(in, gt, options);
            EvalOptions eo;
            eo.trimap = trimap ? &*trimap : nullptr;
            eo.reduction = options.reduction;
            out.report = evaluate_pair(pred, gt, eo);
        } catch (const std::exception& e) {
            out.error = describe(e);
        }
    });
    finish(report);
    return report;
}

}  // namespace

EvalReport evaluate_dirs(const fs::path& pred_dir, const fs::path& gt_dir, const EvalDirOptions& options) {
    std::map<std::string, fs::path> preds, gts;
    for (const auto& p : list_pngs(pred_dir)) preds[p.stem().string()] = p;
    for (const auto& p : list_pngs(gt_dir)) gts[p.stem().string()] = p;

    std::vector<EvalInput> inputs;
    std::vector<std::string> unpaired;
    for (const auto& [stem, p] : preds) {
        auto it = gts.find(stem);
        if (it == gts.end()) {
            unpaired.push_back(p.filename().string() + " (no ground truth)");
            continue;
        }
        EvalInput in{stem, p, it->second, {}};
        if (options.mask == MaskMode::trimap && !options.trimap_dir.empty()) in.trimap = options.trimap_dir / (stem + ".png");
        inputs.push_back(std::move(in));
    }
    for (const auto& [stem, p] : gts)
        if (!preds.count(stem)) unpaired.push_back(p.filename().string() + " (no prediction)");

    auto report = evaluate_inputs(inputs, options);
    report.unpaired = std::move(unpaired);
    return report;
}

EvalReport evaluate_manifest(DatasetManifest& manifest, const PipelineContext& ctx, const EvalDirOptions& options) {
    std::vector<EvalInput> inputs;
    std::vector<SampleRecord*> records;
    std::vector<std::string> skipped;
    for (auto* r : with_status(manifest, SampleStatus::refined)) {
        if (!r->chroma) {
            skipped.push_back(r->id + " (no chroma extraction)");
            continue;
        }
        EvalInput in{r->id, ctx.resolve(r->chroma->alpha), ctx.resolve(r->paths.refined), {}};
        if (options.mask == MaskMode::trimap && !r->paths.trimap.empty()) in.trimap = ctx.resolve(r->paths.trimap);
        inputs.push_back(std::move(in));
        records.push_back(r);
    }
    auto report = evaluate_inputs(inputs, options);
    report.unpaired = std::move(skipped);
    const std::string now = timestamp_now();
    for (std::size_t i = 0; i < records.size(); ++i) {
        records[i]->metrics = report.samples[i].report;
        records[i]->updated_at = now;
    }
    return report;
}

}  // namespace mattekit
