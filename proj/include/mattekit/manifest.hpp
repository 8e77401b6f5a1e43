#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mattekit/connectivity.hpp"
#include "mattekit/metrics.hpp"

namespace mattekit {

class ManifestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TransitionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class LockError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SampleStatus { pending, flagged, accepted, rejected, refined };
enum class DecidedBy { none, automatic, human };

std::string to_string(SampleStatus s);
std::string to_string(DecidedBy d);
std::optional<SampleStatus> parse_status(const std::string& s);

struct CompositeEntry {
    std::string background;  // file name inside the backgrounds directory
    std::string path;
    friend bool operator==(const CompositeEntry&, const CompositeEntry&) = default;
};

struct ChromaRecord {
    std::string composite;
    std::string alpha;
    std::string foreground;
    int roundtrip_max_error = 0;
    double mad = 0.0;  // MAD(refined alpha, extracted alpha), x1e3
};

/// Paths are relative to the manifest's directory.
struct SamplePaths {
    std::string rgb;
    std::string alpha;
    std::string inverse;
    std::string refined;
    std::string trimap;
    std::vector<CompositeEntry> composites;
};

struct SampleRecord {
    std::string id;
    SamplePaths paths;
    SampleStatus status = SampleStatus::pending;
    DecidedBy decided_by = DecidedBy::none;
    ScreeningStats screening;
    std::optional<MetricReport> metrics;
    std::optional<ChromaRecord> chroma;
    std::optional<std::string> error;
    std::string created_at;
    std::string updated_at;
};

/// Allowed edges: pending -> {flagged, accepted, rejected},
/// flagged -> {accepted, rejected} (human only), accepted -> refined.
bool transition_allowed(SampleStatus from, SampleStatus to, DecidedBy by);

/// Applies a transition or throws TransitionError, leaving the record untouched.
void transition(SampleRecord& record, SampleStatus to, DecidedBy by, const std::string& timestamp);

struct IngestIssue {
    std::string id;
    std::string message;
};

struct DatasetManifest {
    std::uint64_t version = 0;
    std::string updated_at;
    nlohmann::ordered_json vocabulary = nlohmann::ordered_json::object();
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    std::vector<SampleRecord> samples;  // sorted by id, ids unique
    std::vector<IngestIssue> ingest_errors;

    SampleRecord* find(const std::string& id);
    const SampleRecord* find(const std::string& id) const;
    /// Inserts keeping id order; throws ManifestError on a duplicate id.
    SampleRecord& insert(SampleRecord record);
    std::size_t count(SampleStatus s) const;
};

nlohmann::ordered_json to_json(const SampleRecord& r);
SampleRecord record_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const DatasetManifest& m);
DatasetManifest manifest_from_json(const nlohmann::json& j);

/// Serialized form written to disk: 2-space indented JSON plus a newline.
std::string dump_manifest(const DatasetManifest& m);

/// A missing file yields an empty manifest; a corrupt one throws ManifestError.
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Bumps version, then writes a temp file, fsyncs it and renames it over
/// `path`, so readers only ever see a complete document.
void save_manifest(const std::filesystem::path& path, DatasetManifest& m);

/// UTC "YYYY-MM-DDTHH:MM:SSZ". SOURCE_DATE_EPOCH, when set, replaces the clock.
std::string timestamp_now();

/// Single-writer guard: creates `<manifest>.lock` holding the owner pid.
/// A lock whose pid is no longer alive is treated as stale and replaced.
class ManifestLock {
public:
    explicit ManifestLock(const std::filesystem::path& manifest_path);
    ~ManifestLock();
    ManifestLock(const ManifestLock&) = delete;
    ManifestLock& operator=(const ManifestLock&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

std::filesystem::path lock_path(const std::filesystem::path& manifest_path);

}  // namespace mattekit
