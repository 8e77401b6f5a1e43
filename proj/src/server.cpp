#include "mattekit/server.hpp"

#include <httplib.h>

#include <atomic>
#include <charconv>
#include <chrono>
#include <thread>
#include <fstream>
#include <mutex>
#include <sstream>

#include "mattekit/manifest.hpp"
#include "mattekit/pipeline.hpp"

namespace mattekit {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

void send_json(httplib::Response& res, int status, const ojson& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json; charset=utf-8");
}

// Record as stored, plus the image URLs the review UI loads.
ojson api_record(const SampleRecord& r) {
    ojson j = to_json(r);
    const std::string base = "/api/samples/" + r.id + "/image?kind=";
    j["images"] = {{"rgb", base + "rgb"}, {"alpha", base + "alpha"}, {"inverse", base + "inverse"}};
    if (!r.paths.refined.empty()) j["images"]["refined"] = base + "refined";
    return j;
}

void send_error(httplib::Response& res, int status, const std::string& message) {
    send_json(res, status, {{"error", message}});
}

// Parses an optional non-negative integer query parameter.
bool query_count(const httplib::Request& req, const char* name, std::size_t& out) {
    if (!req.has_param(name)) return true;
    const auto v = req.get_param_value(name);
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    return ec == std::errc() && ptr == v.data() + v.size();
}

}  // namespace

struct ReviewServer::Impl {
    fs::path manifest_path;
    ServeOptions options;
    ManifestLock lock;
    PipelineContext ctx;
    std::mutex mutex;  // guards manifest and serializes writes
    DatasetManifest manifest;
    httplib::Server server;
    int port = -1;
    std::atomic<bool> stop_requested{false};
    std::mutex stop_mutex;
    bool stopped = false;

    // httplib's Server::stop() must run at most once per listen loop.
    void stop_if_running() {
        std::lock_guard guard(stop_mutex);
        if (stopped || !server.is_running()) return;
        server.stop();
        stopped = true;
    }

    Impl(fs::path path, ServeOptions opts)
        : manifest_path(std::move(path)), options(std::move(opts)), lock(manifest_path) {
        if (!fs::exists(manifest_path)) throw ManifestError("manifest not found: " + manifest_path.string());
        manifest = load_manifest(manifest_path);
        ctx.manifest_path = manifest_path;
        routes();
    }

    void routes() {
        server.Get("/api/samples", [this](const httplib::Request& req, httplib::Response& res) { list(req, res); });
        server.Get(R"(/api/samples/([^/]+)/image)",
                   [this](const httplib::Request& req, httplib::Response& res) { image(req, res); });
        server.Post(R"(/api/samples/([^/]+)/decision)",
                    [this](const httplib::Request& req, httplib::Response& res) { decide(req, res); });
        server.Get("/api/stats", [this](const httplib::Request&, httplib::Response& res) { stats(res); });
        if (!options.assets.empty()) {
            if (!server.set_mount_point("/", options.assets.string())) {
                throw std::runtime_error("assets directory not found: " + options.assets.string());
            }
        } else {
            server.Get("/", [](const httplib::Request&, httplib::Response& res) {
                res.set_content("mattekit review service: see /api/samples and /api/stats\n", "text/plain");
            });
        }
        server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            std::string what = "internal error";
            try {
                std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                what = e.what();
            } catch (...) {
            }
            send_error(res, 500, what);
        });
    }

    void list(const httplib::Request& req, httplib::Response& res) {
        std::optional<SampleStatus> filter;
        if (req.has_param("status")) {
            filter = parse_status(req.get_param_value("status"));
            if (!filter) return send_error(res, 400, "unknown status '" + req.get_param_value("status") + "'");
        }
        std::size_t offset = 0, limit = std::numeric_limits<std::size_t>::max();
        if (!query_count(req, "offset", offset) || !query_count(req, "limit", limit)) {
            return send_error(res, 400, "offset and limit must be non-negative integers");
        }
        ojson out = ojson::array();
        std::size_t seen = 0;
        std::lock_guard guard(mutex);
        for (const auto& r : manifest.samples) {
            if (filter && r.status != *filter) continue;
            if (seen++ < offset) continue;
            if (out.size() >= limit) continue;
            out.push_back(api_record(r));
        }
        res.set_header("X-Total-Count", std::to_string(seen));
        send_json(res, 200, out);
    }

    void image(const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        const std::string kind = req.has_param("kind") ? req.get_param_value("kind") : "rgb";
        std::string rel;
        {
            std::lock_guard guard(mutex);
            const auto* r = manifest.find(id);
            if (!r) return send_error(res, 404, "no sample '" + id + "'");
            if (kind == "rgb") rel = r->paths.rgb;
            else if (kind == "alpha") rel = r->paths.alpha;
            else if (kind == "inverse") rel = r->paths.inverse;
            else if (kind == "refined") rel = r->paths.refined;
            else if (kind == "trimap") rel = r->paths.trimap;
            else return send_error(res, 400, "unknown image kind '" + kind + "'");
        }
        if (rel.empty()) return send_error(res, 404, "sample '" + id + "' has no " + kind + " image");
        std::ifstream in(ctx.resolve(rel), std::ios::binary);
        if (!in) return send_error(res, 404, "image file missing: " + rel);
        std::ostringstream bytes;
        bytes << in.rdbuf();
        res.status = 200;
        res.set_content(bytes.str(), "image/png");
    }

    void decide(const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        SampleStatus to;
        try {
            const auto body = nlohmann::json::parse(req.body);
            const auto decision = body.at("decision").get<std::string>();
            if (decision == "accept") to = SampleStatus::accepted;
            else if (decision == "reject") to = SampleStatus::rejected;
            else return send_error(res, 400, "decision must be \"accept\" or \"reject\"");
        } catch (const nlohmann::json::exception&) {
            return send_error(res, 400, "body must be {\"decision\": \"accept\" | \"reject\"}");
        }

        std::lock_guard guard(mutex);
        if (!manifest.find(id)) return send_error(res, 404, "no sample '" + id + "'");
        DatasetManifest next = manifest;
        auto* record = next.find(id);
        try {
            transition(*record, to, DecidedBy::human, timestamp_now());
        } catch (const TransitionError& e) {
            return send_error(res, 409, e.what());
        }
        try {
            save_manifest(manifest_path, next);
        } catch (const std::exception& e) {
            return send_error(res, 500, std::string("could not persist decision: ") + e.what());
        }
        manifest = std::move(next);
        send_json(res, 200, api_record(*manifest.find(id)));
    }

    void stats(httplib::Response& res) {
        ojson out;
        std::lock_guard guard(mutex);
        out["total"] = manifest.samples.size();
        for (auto s : {SampleStatus::pending, SampleStatus::flagged, SampleStatus::accepted, SampleStatus::rejected,
                       SampleStatus::refined}) {
            out[to_string(s)] = manifest.count(s);
        }
        out["version"] = manifest.version;
        send_json(res, 200, out);
    }
};

ReviewServer::ReviewServer(fs::path manifest_path, ServeOptions options)
    : impl_(std::make_unique<Impl>(std::move(manifest_path), std::move(options))) {}

ReviewServer::~ReviewServer() = default;

int ReviewServer::bind() {
    auto& s = impl_->server;
    const auto& o = impl_->options;
    if (o.port == 0) {
        impl_->port = s.bind_to_any_port(o.host);
    } else {
        impl_->port = s.bind_to_port(o.host, o.port) ? o.port : -1;
    }
    if (impl_->port < 0) throw std::runtime_error("cannot bind " + o.host + ":" + std::to_string(o.port));
    return impl_->port;
}

void ReviewServer::run() {
    if (impl_->port < 0) throw std::logic_error("ReviewServer::run before bind");
    // Server::stop() is a no-op until the accept loop runs, so a stop that
    // lands before then is replayed once the server reports running.
    std::jthread watcher([this](std::stop_token st) {
        while (!st.stop_requested()) {
            if (impl_->stop_requested && impl_->server.is_running()) {
                impl_->stop_if_running();
                return;
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(20));
        }
    });
    if (!impl_->stop_requested) impl_->server.listen_after_bind();
    watcher.request_stop();
}

void ReviewServer::stop() {
    impl_->stop_requested = true;
    impl_->stop_if_running();
}

}  // namespace mattekit
