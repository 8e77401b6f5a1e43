// mattekit: dataset pipeline and review service for alpha mattes.

#include <signal.h>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "mattekit/config.hpp"
#include "mattekit/manifest.hpp"
#include "mattekit/pipeline.hpp"
#include "mattekit/png_io.hpp"
#include "mattekit/prompts.hpp"
#include "mattekit/report.hpp"
#include "mattekit/server.hpp"
#include "mattekit/trimap.hpp"

using namespace mattekit;
namespace fs = std::filesystem;

namespace {

// Exit status when the batch ran but some samples failed.
constexpr int kPartialFailure = 3;

struct GlobalOptions {
    fs::path manifest = "manifest.json";
    fs::path config;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<double> threshold_semi;
    std::optional<double> threshold_noise;
    std::optional<double> threshold_removed;
    std::string key_color;
    std::optional<int> band;
    std::string mask = "none";
};

// Defaults, then the manifest's stored snapshot, then --config, then flags.
Config resolve_config(const GlobalOptions& g, const DatasetManifest& m) {
    Config c;
    if (!g.config.empty()) {
        c = load_config(g.config);
    } else if (!m.config.empty()) {
        c = Config::from_json(m.config);
    }
    if (g.seed) c.seed = *g.seed;
    if (g.workers) c.workers = *g.workers;
    if (g.threshold_semi) c.thresholds.semi_fraction = *g.threshold_semi;
    if (g.threshold_noise) c.thresholds.attached_noise_fraction = *g.threshold_noise;
    if (g.threshold_removed) c.thresholds.removed_fraction = *g.threshold_removed;
    if (!g.key_color.empty()) c.key_color = parse_key_color(g.key_color);
    if (g.band) c.trimap_band = *g.band;
    return c;
}

int report_summary(const char* what, const BatchSummary& s) {
    std::cerr << what << ": " << s.succeeded << " of " << s.processed << " samples ok\n";
    for (const auto& [id, msg] : s.errors) std::cerr << "  " << id << ": " << msg << "\n";
    return s.errors.empty() ? 0 : kPartialFailure;
}

// Locks, loads, runs `body`, stores the config snapshot and saves.
template <class Body>
int with_manifest(const GlobalOptions& g, Body&& body) {
    ManifestLock lock(g.manifest);
    auto manifest = load_manifest(g.manifest);
    PipelineContext ctx{g.manifest, resolve_config(g, manifest)};
    const int rc = body(manifest, ctx);
    manifest.config = ctx.config.to_json();
    save_manifest(g.manifest, manifest);
    return rc;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

int serve(const GlobalOptions& g, const std::string& bind_address, const fs::path& assets) {
    ServeOptions opts;
    opts.assets = assets;
    const auto colon = bind_address.rfind(':');
    if (colon == std::string::npos) throw CLI::ValidationError("--bind", "expected HOST:PORT");
    opts.host = bind_address.substr(0, colon);
    opts.port = std::stoi(bind_address.substr(colon + 1));

    // Signals are taken synchronously by one thread so the server can stop
    // cleanly; handlers already running finish before run() returns.
    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);

    ReviewServer server(g.manifest, opts);
    const int port = server.bind();
    std::cout << "listening on http://" << opts.host << ":" << port << std::endl;
    std::jthread waiter([&] {
        int sig = 0;
        sigwait(&set, &sig);
        std::cerr << "signal " << sig << ", shutting down\n";
        server.stop();
    });
    server.run();
    // Wake the waiter if the server stopped for another reason.
    pthread_kill(waiter.native_handle(), SIGTERM);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mattekit: alpha matte dataset pipeline"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--manifest", g.manifest, "Manifest JSON path")->capture_default_str();
    app.add_option("--config", g.config, "Config file (TOML subset)")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "64-bit seed for prompt sampling and background assignment");
    app.add_option("--workers", g.workers, "Worker threads for batch commands")->check(CLI::PositiveNumber);
    app.add_option("--threshold-semi", g.threshold_semi, "Flag when semi_fraction exceeds this")->check(CLI::Range(0.0, 1.0));
    app.add_option("--threshold-noise", g.threshold_noise, "Flag when attached_noise_fraction exceeds this")->check(CLI::Range(0.0, 1.0));
    app.add_option("--threshold-removed", g.threshold_removed, "Flag when removed_fraction exceeds this")->check(CLI::Range(0.0, 1.0));
    app.add_option("--key-color", g.key_color, "Chroma key as R,G,B");
    app.add_option("--band", g.band, "Trimap band radius in pixels")->check(CLI::NonNegativeNumber);
    app.add_option("--mask", g.mask, "Evaluation region")->check(CLI::IsMember({"none", "trimap"}))->capture_default_str();

    auto* prompts = app.add_subcommand("prompts", "Generate prompts by traversing attribute lists");
    fs::path spec_path, prompts_out;
    std::uint64_t limit = 100;
    prompts->add_option("--spec", spec_path, "Prompt spec JSON ({\"template\", \"attributes\"})")->check(CLI::ExistingFile);
    prompts->add_option("--limit", limit, "Maximum number of prompts")->check(CLI::PositiveNumber)->capture_default_str();
    prompts->add_option("--out", prompts_out, "Write prompts here instead of stdout");

    auto* ingest_cmd = app.add_subcommand("ingest", "Ingest <id>_rgb.png + <id>_alpha.png pairs or <id>.png RGBA files");
    fs::path ingest_dir;
    ingest_cmd->add_option("dir", ingest_dir, "Input directory")->required()->check(CLI::ExistingDirectory);

    auto* screen_cmd = app.add_subcommand("screen", "Re-screen pending samples and record decisions");
    bool accept_pending = false;
    std::vector<std::string> decide;
    screen_cmd->add_flag("--accept-pending", accept_pending, "Accept every sample still pending");
    screen_cmd->add_option("--decide", decide, "Human decision ID=accept|reject (repeatable)");

    auto* refine_cmd = app.add_subcommand("refine", "Refine accepted samples");

    auto* composite_cmd = app.add_subcommand("composite", "Composite refined samples over backgrounds");
    fs::path backgrounds;
    std::optional<int> per_sample;
    composite_cmd->add_option("--backgrounds", backgrounds, "Background PNG directory")->required()->check(CLI::ExistingDirectory);
    composite_cmd->add_option("--per-sample", per_sample, "Backgrounds per sample")->check(CLI::NonNegativeNumber);

    auto* chroma_cmd = app.add_subcommand("chroma", "Key refined samples over a solid color and extract them again");

    auto* trimap_cmd = app.add_subcommand("trimap", "Trimaps for refined samples, or for one file with --input");
    fs::path trimap_in, trimap_out;
    bool from_mask = false;
    trimap_cmd->add_option("--input", trimap_in, "Alpha matte or binary mask PNG")->check(CLI::ExistingFile);
    trimap_cmd->add_option("--output", trimap_out, "Trimap PNG to write");
    trimap_cmd->add_flag("--from-mask", from_mask, "Treat the input as a binary mask (nonzero = foreground)");

    auto* eval_cmd = app.add_subcommand("eval", "Evaluate predicted mattes against ground truth");
    fs::path pred_dir, gt_dir, trimap_dir, json_out;
    bool video = false;
    std::string reduction;
    eval_cmd->add_option("--pred", pred_dir, "Predicted mattes directory")->check(CLI::ExistingDirectory);
    eval_cmd->add_option("--gt", gt_dir, "Ground-truth mattes directory")->check(CLI::ExistingDirectory);
    eval_cmd->add_option("--trimap-dir", trimap_dir, "Trimaps named <stem>.png (default: derived from ground truth)")
        ->check(CLI::ExistingDirectory);
    eval_cmd->add_flag("--video", video, "Treat sorted stems as one sequence and report dtSSD");
    eval_cmd->add_option("--reduction", reduction, "Grad/Conn reduction")->check(CLI::IsMember({"sum", "mean"}));
    eval_cmd->add_option("--json", json_out, "Write the JSON report here");

    auto* serve_cmd = app.add_subcommand("serve", "Serve the review API over the manifest");
    std::string bind_address = "127.0.0.1:8080";
    fs::path assets;
    serve_cmd->add_option("--bind", bind_address, "HOST:PORT (port 0 picks a free one)")->capture_default_str();
    serve_cmd->add_option("--assets", assets, "Static UI bundle directory")->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*prompts) {
            PromptSpec spec = spec_path.empty() ? default_prompt_spec() : load_prompt_spec(spec_path);
            DatasetManifest probe;
            if (fs::exists(g.manifest)) probe = load_manifest(g.manifest);
            const auto cfg = resolve_config(g, probe);
            const auto lines = generate_prompts(spec, limit, cfg.seed);
            std::string text;
            for (const auto& l : lines) text += l + "\n";
            if (prompts_out.empty()) {
                std::cout << text;
            } else {
                write_text(prompts_out, text);
            }
            if (app.get_option("--manifest")->count() > 0) {
                return with_manifest(g, [&](DatasetManifest& m, PipelineContext&) {
                    m.vocabulary = spec.to_json();
                    return 0;
                });
            }
            return 0;
        }
        if (*ingest_cmd) {
            return with_manifest(g, [&](DatasetManifest& m, PipelineContext& ctx) {
                return report_summary("ingest", ingest(ingest_dir, m, ctx));
            });
        }
        if (*screen_cmd) {
            ScreenOptions opts;
            opts.accept_pending = accept_pending;
            for (const auto& d : decide) {
                const auto eq = d.find('=');
                const auto verb = eq == std::string::npos ? "" : d.substr(eq + 1);
                if (verb != "accept" && verb != "reject") throw CLI::ValidationError("--decide", "expected ID=accept|reject, got " + d);
                opts.decisions.emplace_back(d.substr(0, eq), verb == "accept" ? SampleStatus::accepted : SampleStatus::rejected);
            }
            return with_manifest(g, [&](DatasetManifest& m, PipelineContext& ctx) {
                const int rc = report_summary("screen", screen(m, ctx, opts));
                std::cerr << "pending " << m.count(SampleStatus::pending) << ", flagged " << m.count(SampleStatus::flagged)
                          << ", accepted " << m.count(SampleStatus::accepted) << ", rejected "
                          << m.count(SampleStatus::rejected) << "\n";
                return rc;
            });
        }
        if (*refine_cmd) {
            return with_manifest(g, [&](DatasetManifest& m, PipelineContext& ctx) {
                return report_summary("refine", refine_batch(m, ctx));
            });
        }
        if (*composite_cmd) {
            return with_manifest(g, [&](DatasetManifest& m, PipelineContext& ctx) {
                if (per_sample) ctx.config.per_sample = *per_sample;
                return report_summary("composite",
                                      composite_batch(m, ctx, backgrounds, ctx.config.per_sample, ctx.config.seed));
            });
        }
        if (*chroma_cmd) {
            return with_manifest(g, [&](DatasetManifest& m, PipelineContext& ctx) {
                return report_summary("chroma", chroma_batch(m, ctx, ctx.config.key_color));
            });
        }
        if (*trimap_cmd) {
            if (!trimap_in.empty()) {
                if (trimap_out.empty()) throw CLI::ValidationError("--output", "required with --input");
                const auto img = read_gray_png(trimap_in);
                const int radius = g.band ? *g.band : scaled_band(img.width(), img.height());
                const Trimap t = from_mask ? trimap_from_mask(img, std::max(radius, 1))
                                           : trimap_from_alpha(AlphaMatte(img), radius, radius);
                write_gray_png(trimap_out, t);
                return 0;
            }
            return with_manifest(g, [&](DatasetManifest& m, PipelineContext& ctx) {
                return report_summary("trimap", trimap_batch(m, ctx, g.band));
            });
        }
        if (*eval_cmd) {
            auto run = [&](const Config& cfg, auto&& evaluate) {
                EvalDirOptions opts;
                opts.mask = g.mask == "trimap" ? MaskMode::trimap : MaskMode::none;
                opts.trimap_dir = trimap_dir;
                opts.band = cfg.trimap_band;
                opts.reduction = reduction.empty() ? cfg.reduction : (reduction == "mean" ? Reduction::mean : Reduction::sum);
                opts.video = video;
                opts.workers = cfg.workers;
                const EvalReport report = evaluate(opts);
                std::cout << format_table(report);
                if (!json_out.empty()) write_text(json_out, to_json(report).dump(2) + "\n");
                const bool failures = report.evaluated != report.samples.size() || !report.unpaired.empty();
                return failures ? kPartialFailure : 0;
            };
            if (!pred_dir.empty() || !gt_dir.empty()) {
                if (pred_dir.empty() || gt_dir.empty()) throw CLI::ValidationError("eval", "--pred and --gt go together");
                DatasetManifest none;
                return run(resolve_config(g, none),
                           [&](const EvalDirOptions& o) { return evaluate_dirs(pred_dir, gt_dir, o); });
            }
            return with_manifest(g, [&](DatasetManifest& m, PipelineContext& ctx) {
                return run(ctx.config, [&](const EvalDirOptions& o) { return evaluate_manifest(m, ctx, o); });
            });
        }
        if (*serve_cmd) return serve(g, bind_address, assets);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "mattekit: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
