#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "mattekit/connectivity.hpp"
#include "mattekit/image.hpp"
#include "mattekit/metrics.hpp"

namespace mattekit {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The only generator family the pipeline uses. std::mt19937_64 is fully
/// specified by the C++ standard, so a seed reproduces the same stream on
/// every conforming implementation.
inline constexpr const char* kRngName = "mt19937_64";
using PipelineRng = std::mt19937_64;

/// Uniform integer in [0, bound) by rejection sampling. The standard
/// distributions are implementation-defined, so they are avoided.
std::uint64_t bounded(PipelineRng& rng, std::uint64_t bound);

/// Mixes a string into a 64-bit seed (FNV-1a then splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key);

/// Pipeline settings. Loaded from a TOML-style file:
///
///     rng = "mt19937_64"
///     seed = 42
///     workers = 4
///
///     [screening]
///     semi_fraction = 0.25
///     attached_noise_fraction = 0.05
///     removed_fraction = 0.30
///
///     [trimap]
///     band = 10            # radius at a 512 px short side
///
///     [chroma]
///     key_color = [0, 255, 0]
///     opaque_distance = 64
///
///     [composite]
///     per_sample = 5
///
///     [metrics]
///     reduction = "sum"    # or "mean"
///
/// Unknown keys are errors.
struct Config {
    std::uint64_t seed = 42;
    int workers = 1;
    ScreeningThresholds thresholds;
    int trimap_band = 10;
    KeyColor key_color{0, 255, 0};
    int opaque_distance = 64;
    int per_sample = 5;
    Reduction reduction = Reduction::sum;

    /// Snapshot stored in the manifest. Leaves out `workers`, which never
    /// changes outputs.
    nlohmann::ordered_json to_json() const;
    static Config from_json(const nlohmann::json& j);
};

Config parse_config(const std::string& text);
Config load_config(const std::filesystem::path& path);

/// Parses "R,G,B" with each channel in [0,255].
KeyColor parse_key_color(const std::string& text);

}  // namespace mattekit
