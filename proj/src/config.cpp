#include "mattekit/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace mattekit {

std::uint64_t bounded(PipelineRng& rng, std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("bounded: bound must be positive");
    // Largest multiple of bound that fits; draws at or above it are rejected.
    const std::uint64_t limit = PipelineRng::max() - (PipelineRng::max() % bound + 1) % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x > limit);
    return x % bound;
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view key) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : key) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    std::uint64_t z = seed ^ h;
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

// Strips a trailing comment that is not inside a string.
std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

struct Value {
    std::string raw;
    int line = 0;

    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("config line " + std::to_string(line) + ": " + what + " (got '" + raw + "')");
    }

    template <class T>
    T number() const {
        T v{};
        const auto* end = raw.data() + raw.size();
        auto [ptr, ec] = std::from_chars(raw.data(), end, v);
        if (ec != std::errc() || ptr != end) fail("expected a number");
        return v;
    }

    std::string string() const {
        if (raw.size() < 2 || raw.front() != '"' || raw.back() != '"') fail("expected a quoted string");
        return raw.substr(1, raw.size() - 2);
    }

    std::vector<int> int_array() const {
        if (raw.size() < 2 || raw.front() != '[' || raw.back() != ']') fail("expected an array");
        std::vector<int> out;
        std::stringstream ss(raw.substr(1, raw.size() - 2));
        std::string item;
        while (std::getline(ss, item, ',')) {
            Value v{trim(item), line};
            out.push_back(v.number<int>());
        }
        return out;
    }
};

double fraction(const Value& v) {
    const double d = v.number<double>();
    if (d < 0.0 || d > 1.0) v.fail("threshold must lie in [0,1]");
    return d;
}

int non_negative(const Value& v) {
    const int i = v.number<int>();
    if (i < 0) v.fail("expected a non-negative integer");
    return i;
}

Reduction parse_reduction(const std::string& s) {
    if (s == "sum") return Reduction::sum;
    if (s == "mean") return Reduction::mean;
    throw ConfigError("reduction must be \"sum\" or \"mean\", got \"" + s + "\"");
}

}  // namespace

Config parse_config(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto content = trim(strip_comment(line));
        if (content.empty()) continue;
        if (content.front() == '[') {
            if (content.back() != ']') throw ConfigError("config line " + std::to_string(lineno) + ": bad section header");
            section = trim(std::string_view(content).substr(1, content.size() - 2));
            continue;
        }
        const auto eq = content.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = (section.empty() ? "" : section + ".") + trim(std::string_view(content).substr(0, eq));
        const Value v{trim(std::string_view(content).substr(eq + 1)), lineno};

        if (key == "rng") {
            if (v.string() != kRngName) v.fail(std::string("only ") + kRngName + " is supported");
        } else if (key == "seed") {
            cfg.seed = v.number<std::uint64_t>();
        } else if (key == "workers") {
            cfg.workers = v.number<int>();
            if (cfg.workers < 1) v.fail("workers must be >= 1");
        } else if (key == "screening.semi_fraction") {
            cfg.thresholds.semi_fraction = fraction(v);
        } else if (key == "screening.attached_noise_fraction") {
            cfg.thresholds.attached_noise_fraction = fraction(v);
        } else if (key == "screening.removed_fraction") {
            cfg.thresholds.removed_fraction = fraction(v);
        } else if (key == "trimap.band") {
            cfg.trimap_band = non_negative(v);
        } else if (key == "chroma.key_color") {
            const auto rgb = v.int_array();
            if (rgb.size() != 3) v.fail("key_color needs 3 channels");
            for (int c : rgb)
                if (c < 0 || c > 255) v.fail("channel out of [0,255]");
            cfg.key_color = {std::uint8_t(rgb[0]), std::uint8_t(rgb[1]), std::uint8_t(rgb[2])};
        } else if (key == "chroma.opaque_distance") {
            cfg.opaque_distance = non_negative(v);
        } else if (key == "composite.per_sample") {
            cfg.per_sample = non_negative(v);
        } else if (key == "metrics.reduction") {
            cfg.reduction = parse_reduction(v.string());
        } else {
            throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    return cfg;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

nlohmann::ordered_json Config::to_json() const {
    nlohmann::ordered_json j;
    j["rng"] = kRngName;
    j["seed"] = seed;
    j["screening"] = {{"semi_fraction", thresholds.semi_fraction},
                      {"attached_noise_fraction", thresholds.attached_noise_fraction},
                      {"removed_fraction", thresholds.removed_fraction}};
    j["trimap"] = {{"band", trimap_band}};
    j["chroma"] = {{"key_color", {key_color.r, key_color.g, key_color.b}},
                   {"opaque_distance", opaque_distance}};
    j["composite"] = {{"per_sample", per_sample}};
    j["metrics"] = {{"reduction", reduction == Reduction::sum ? "sum" : "mean"}};
    return j;
}

Config Config::from_json(const nlohmann::json& j) {
    Config c;
    if (j.value("rng", std::string(kRngName)) != kRngName) throw ConfigError("unsupported rng in snapshot");
    c.seed = j.value("seed", c.seed);
    if (j.contains("screening")) {
        const auto& s = j["screening"];
        c.thresholds.semi_fraction = s.value("semi_fraction", c.thresholds.semi_fraction);
        c.thresholds.attached_noise_fraction = s.value("attached_noise_fraction", c.thresholds.attached_noise_fraction);
        c.thresholds.removed_fraction = s.value("removed_fraction", c.thresholds.removed_fraction);
    }
    if (j.contains("trimap")) c.trimap_band = j["trimap"].value("band", c.trimap_band);
    if (j.contains("chroma")) {
        const auto& ch = j["chroma"];
        if (ch.contains("key_color")) {
            const auto k = ch["key_color"].get<std::vector<int>>();
            if (k.size() != 3) throw ConfigError("key_color needs 3 channels");
            c.key_color = {std::uint8_t(k[0]), std::uint8_t(k[1]), std::uint8_t(k[2])};
        }
        c.opaque_distance = ch.value("opaque_distance", c.opaque_distance);
    }
    if (j.contains("composite")) c.per_sample = j["composite"].value("per_sample", c.per_sample);
    if (j.contains("metrics")) c.reduction = parse_reduction(j["metrics"].value("reduction", std::string("sum")));
    return c;
}

KeyColor parse_key_color(const std::string& text) {
    std::vector<int> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto t = trim(item);
        int v = -1;
        auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
        if (ec != std::errc() || ptr != t.data() + t.size() || v < 0 || v > 255) {
            throw ConfigError("bad key color '" + text + "', expected R,G,B in [0,255]");
        }
        parts.push_back(v);
    }
    if (parts.size() != 3) throw ConfigError("bad key color '" + text + "', expected R,G,B");
    return {std::uint8_t(parts[0]), std::uint8_t(parts[1]), std::uint8_t(parts[2])};
}

}  // namespace mattekit
