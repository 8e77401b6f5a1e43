#include "mattekit/manifest.hpp"

#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <fstream>
#include <sstream>

namespace mattekit {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string to_string(SampleStatus s) {
    switch (s) {
        case SampleStatus::pending: return "pending";
        case SampleStatus::flagged: return "flagged";
        case SampleStatus::accepted: return "accepted";
        case SampleStatus::rejected: return "rejected";
        case SampleStatus::refined: return "refined";
    }
    return "pending";
}

std::string to_string(DecidedBy d) {
    switch (d) {
        case DecidedBy::none: return "none";
        case DecidedBy::automatic: return "auto";
        case DecidedBy::human: return "human";
    }
    return "none";
}

std::optional<SampleStatus> parse_status(const std::string& s) {
    for (auto v : {SampleStatus::pending, SampleStatus::flagged, SampleStatus::accepted, SampleStatus::rejected,
                   SampleStatus::refined}) {
        if (to_string(v) == s) return v;
    }
    return std::nullopt;
}

namespace {

DecidedBy parse_decided_by(const std::string& s) {
    if (s == "auto") return DecidedBy::automatic;
    if (s == "human") return DecidedBy::human;
    if (s == "none") return DecidedBy::none;
    throw ManifestError("bad decided_by '" + s + "'");
}

}  // namespace

bool transition_allowed(SampleStatus from, SampleStatus to, DecidedBy by) {
    using S = SampleStatus;
    if (by == DecidedBy::none) return false;
    switch (from) {
        case S::pending: return to == S::flagged || to == S::accepted || to == S::rejected;
        case S::flagged: return (to == S::accepted || to == S::rejected) && by == DecidedBy::human;
        case S::accepted: return to == S::refined;
        default: return false;
    }
}

void transition(SampleRecord& record, SampleStatus to, DecidedBy by, const std::string& timestamp) {
    if (!transition_allowed(record.status, to, by)) {
        throw TransitionError("sample '" + record.id + "': " + to_string(record.status) + " -> " + to_string(to) +
                              " is not allowed for decided_by=" + to_string(by));
    }
    record.status = to;
    // Refinement is a processing step, not a decision; keep who decided.
    if (to != SampleStatus::refined) record.decided_by = by;
    record.updated_at = timestamp;
}

SampleRecord* DatasetManifest::find(const std::string& id) {
    auto it = std::lower_bound(samples.begin(), samples.end(), id,
                               [](const SampleRecord& r, const std::string& k) { return r.id < k; });
    return it != samples.end() && it->id == id ? &*it : nullptr;
}

const SampleRecord* DatasetManifest::find(const std::string& id) const {
    return const_cast<DatasetManifest*>(this)->find(id);
}

SampleRecord& DatasetManifest::insert(SampleRecord record) {
    auto it = std::lower_bound(samples.begin(), samples.end(), record.id,
                               [](const SampleRecord& r, const std::string& k) { return r.id < k; });
    if (it != samples.end() && it->id == record.id) throw ManifestError("duplicate sample id '" + record.id + "'");
    return *samples.insert(it, std::move(record));
}

std::size_t DatasetManifest::count(SampleStatus s) const {
    return static_cast<std::size_t>(
        std::count_if(samples.begin(), samples.end(), [s](const SampleRecord& r) { return r.status == s; }));
}

ojson to_json(const SampleRecord& r) {
    ojson j;
    j["id"] = r.id;
    j["status"] = to_string(r.status);
    j["decided_by"] = to_string(r.decided_by);
    ojson p;
    p["rgb"] = r.paths.rgb;
    p["alpha"] = r.paths.alpha;
    p["inverse"] = r.paths.inverse;
    p["refined"] = r.paths.refined;
    p["trimap"] = r.paths.trimap;
    p["composites"] = ojson::array();
    for (const auto& c : r.paths.composites) p["composites"].push_back({{"background", c.background}, {"path", c.path}});
    j["paths"] = p;
    j["screening"] = {{"semi_fraction", r.screening.semi_fraction},
                      {"attached_noise_fraction", r.screening.attached_noise_fraction},
                      {"removed_fraction", r.screening.removed_fraction}};
    if (r.metrics) {
        j["metrics"] = {{"mad", r.metrics->mad},
                        {"mse", r.metrics->mse},
                        {"grad", r.metrics->grad},
                        {"conn", r.metrics->conn},
                        {"unknown_region_only", r.metrics->unknown_region_only}};
    } else {
        j["metrics"] = nullptr;
    }
    if (r.chroma) {
        j["chroma"] = {{"composite", r.chroma->composite},
                       {"alpha", r.chroma->alpha},
                       {"foreground", r.chroma->foreground},
                       {"roundtrip_max_error", r.chroma->roundtrip_max_error},
                       {"mad", r.chroma->mad}};
    } else {
        j["chroma"] = nullptr;
    }
    j["error"] = r.error ? ojson(*r.error) : ojson(nullptr);
    j["created_at"] = r.created_at;
    j["updated_at"] = r.updated_at;
    return j;
}

SampleRecord record_from_json(const nlohmann::json& j) {
    SampleRecord r;
    r.id = j.at("id").get<std::string>();
    const auto status = parse_status(j.at("status").get<std::string>());
    if (!status) throw ManifestError("sample '" + r.id + "': bad status");
    r.status = *status;
    r.decided_by = parse_decided_by(j.value("decided_by", std::string("none")));
    const auto& p = j.at("paths");
    r.paths.rgb = p.value("rgb", "");
    r.paths.alpha = p.value("alpha", "");
    r.paths.inverse = p.value("inverse", "");
    r.paths.refined = p.value("refined", "");
    r.paths.trimap = p.value("trimap", "");
    if (p.contains("composites")) {
        for (const auto& c : p["composites"]) {
            r.paths.composites.push_back({c.at("background").get<std::string>(), c.at("path").get<std::string>()});
        }
    }
    const auto& s = j.at("screening");
    r.screening = {s.at("semi_fraction").get<double>(), s.at("attached_noise_fraction").get<double>(),
                   s.at("removed_fraction").get<double>()};
    if (j.contains("metrics") && !j["metrics"].is_null()) {
        const auto& m = j["metrics"];
        r.metrics = MetricReport{m.at("mad").get<double>(), m.at("mse").get<double>(), m.at("grad").get<double>(),
                                 m.at("conn").get<double>(), m.value("unknown_region_only", false)};
    }
    if (j.contains("chroma") && !j["chroma"].is_null()) {
        const auto& c = j["chroma"];
        r.chroma = ChromaRecord{c.value("composite", ""), c.value("alpha", ""), c.value("foreground", ""),
                                c.at("roundtrip_max_error").get<int>(), c.at("mad").get<double>()};
    }
    if (j.contains("error") && !j["error"].is_null()) r.error = j["error"].get<std::string>();
    r.created_at = j.value("created_at", "");
    r.updated_at = j.value("updated_at", "");
    return r;
}

ojson to_json(const DatasetManifest& m) {
    ojson j;
    j["format"] = "mattekit-manifest";
    j["version"] = m.version;
    j["updated_at"] = m.updated_at;
    j["config"] = m.config;
    j["vocabulary"] = m.vocabulary;
    j["samples"] = ojson::array();
    for (const auto& r : m.samples) j["samples"].push_back(to_json(r));
    j["ingest_errors"] = ojson::array();
    for (const auto& e : m.ingest_errors) j["ingest_errors"].push_back({{"id", e.id}, {"message", e.message}});
    return j;
}

DatasetManifest manifest_from_json(const nlohmann::json& j) {
    if (j.value("format", std::string()) != "mattekit-manifest") throw ManifestError("not a mattekit manifest");
    DatasetManifest m;
    m.version = j.at("version").get<std::uint64_t>();
    m.updated_at = j.value("updated_at", "");
    if (j.contains("config")) m.config = j["config"];
    if (j.contains("vocabulary")) m.vocabulary = j["vocabulary"];
    for (const auto& r : j.at("samples")) m.insert(record_from_json(r));
    if (j.contains("ingest_errors")) {
        for (const auto& e : j["ingest_errors"]) m.ingest_errors.push_back({e.at("id"), e.at("message")});
    }
    return m;
}

std::string dump_manifest(const DatasetManifest& m) { return to_json(m).dump(2) + "\n"; }

DatasetManifest load_manifest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        if (!fs::exists(path)) return {};
        throw ManifestError("cannot read manifest " + path.string());
    }
    try {
        // ordered_json keeps config and vocabulary key order stable on rewrite.
        return manifest_from_json(ojson::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw ManifestError("corrupt manifest " + path.string() + ": " + e.what());
    }
}

namespace {

void write_all(int fd, const std::string& data, const fs::path& p) {
    std::size_t off = 0;
    while (off < data.size()) {
        const auto n = ::write(fd, data.data() + off, data.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ManifestError("write " + p.string() + ": " + std::strerror(errno));
        }
        off += static_cast<std::size_t>(n);
    }
}

void fsync_dir(const fs::path& dir) {
    const int fd = ::open(dir.empty() ? "." : dir.c_str(), O_RDONLY | O_DIRECTORY);
    if (fd >= 0) {
        ::fsync(fd);
        ::close(fd);
    }
}

}  // namespace

void save_manifest(const fs::path& path, DatasetManifest& m) {
    DatasetManifest next = m;
    next.version = m.version + 1;
    next.updated_at = timestamp_now();
    const std::string data = dump_manifest(next);

    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw ManifestError("create " + tmp.string() + ": " + std::strerror(errno));
    try {
        write_all(fd, data, tmp);
        if (::fsync(fd) != 0) throw ManifestError("fsync " + tmp.string() + ": " + std::strerror(errno));
    } catch (...) {
        ::close(fd);
        ::unlink(tmp.c_str());
        throw;
    }
    ::close(fd);
    if (::rename(tmp.c_str(), path.c_str()) != 0) {
        const std::string err = std::strerror(errno);
        ::unlink(tmp.c_str());
        throw ManifestError("rename onto " + path.string() + ": " + err);
    }
    fsync_dir(path.parent_path());
    m = std::move(next);
}

std::string timestamp_now() {
    std::time_t t = std::time(nullptr);
    if (const char* sde = std::getenv("SOURCE_DATE_EPOCH"); sde && *sde) {
        char* end = nullptr;
        const long long v = std::strtoll(sde, &end, 10);
        if (end && *end == '\0' && v >= 0) t = static_cast<std::time_t>(v);
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

fs::path lock_path(const fs::path& manifest_path) {
    fs::path p = manifest_path;
    p += ".lock";
    return p;
}

namespace {

// Returns the pid recorded in a lock file, or -1 when unreadable.
long read_lock_pid(const fs::path& p) {
    std::ifstream in(p);
    long pid = -1;
    if (!(in >> pid)) return -1;
    return pid;
}

bool pid_alive(long pid) {
    if (pid <= 0) return false;
    return ::kill(static_cast<pid_t>(pid), 0) == 0 || errno == EPERM;
}

}  // namespace

ManifestLock::ManifestLock(const fs::path& manifest_path) : path_(lock_path(manifest_path)) {
    for (int attempt = 0; attempt < 2; ++attempt) {
        const int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0644);
        if (fd >= 0) {
            write_all(fd, std::to_string(::getpid()) + "\n", path_);
            ::fsync(fd);
            ::close(fd);
            return;
        }
        if (errno != EEXIST) throw LockError("cannot create lock " + path_.string() + ": " + std::strerror(errno));
        const long owner = read_lock_pid(path_);
        if (pid_alive(owner)) {
            throw LockError("manifest is locked by pid " + std::to_string(owner) + " (" + path_.string() + ")");
        }
        // A lock left behind by a dead process (or half-written) is stale.
        ::unlink(path_.c_str());
    }
    throw LockError("cannot acquire lock " + path_.string());
}

ManifestLock::~ManifestLock() {
    if (read_lock_pid(path_) == ::getpid()) ::unlink(path_.c_str());
}

}  // namespace mattekit
