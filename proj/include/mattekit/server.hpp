#pragma once

#include <filesystem>
#include <memory>
#include <string>

namespace mattekit {

struct ServeOptions {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    std::filesystem::path assets;  // optional static bundle served at /
};

/// HTTP review service over one manifest.
///
///   GET  /api/samples?status=S&offset=N&limit=N   array of sample records
///   GET  /api/samples/{id}/image?kind=K           PNG bytes (rgb, alpha, inverse, refined, trimap)
///   POST /api/samples/{id}/decision               {"decision": "accept" | "reject"}
///   GET  /api/stats                               counts per status
///
/// Errors are {"error": message}. A decision is written to disk (atomic
/// replace) before it is acknowledged. Holds the manifest lock while alive.
class ReviewServer {
public:
    ReviewServer(std::filesystem::path manifest_path, ServeOptions options);
    ~ReviewServer();
    ReviewServer(const ReviewServer&) = delete;
    ReviewServer& operator=(const ReviewServer&) = delete;

    /// Binds the socket and returns the port. Throws std::runtime_error on failure.
    int bind();
    /// Serves until stop(). Call bind() first.
    void run();
    /// Safe from any thread.
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace mattekit
