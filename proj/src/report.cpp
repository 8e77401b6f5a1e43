#include "mattekit/report.hpp"

#include <algorithm>
#include <cstdio>

namespace mattekit {

using ojson = nlohmann::ordered_json;

ojson to_json(const MetricReport& r) {
    return {{"mad", r.mad}, {"mse", r.mse}, {"grad", r.grad}, {"conn", r.conn},
            {"unknown_region_only", r.unknown_region_only}};
}

ojson to_json(const EvalReport& r) {
    ojson j;
    j["unknown_region_only"] = r.unknown_region_only;
    j["reduction"] = r.reduction == Reduction::sum ? "sum" : "mean";
    j["scale"] = {{"mad", kMadScale}, {"mse", kMseScale}, {"grad", kGradScale}, {"conn", kConnScale}};
    j["samples"] = ojson::array();
    for (const auto& s : r.samples) {
        ojson e;
        e["id"] = s.id;
        e["metrics"] = s.report ? to_json(*s.report) : ojson(nullptr);
        e["error"] = s.error ? ojson(*s.error) : ojson(nullptr);
        j["samples"].push_back(e);
    }
    j["evaluated"] = r.evaluated;
    j["mean"] = to_json(r.mean);
    j["dtssd"] = r.dtssd ? ojson(*r.dtssd) : ojson(nullptr);
    j["unpaired"] = r.unpaired;
    return j;
}

std::string format_table(const EvalReport& r) {
    std::size_t idw = 4;
    for (const auto& s : r.samples) idw = std::max(idw, s.id.size());
    std::string out;
    char buf[512];
    std::snprintf(buf, sizeof buf, "%-*s %12s %12s %12s %12s\n", int(idw), "id", "MAD", "MSE", "Grad", "Conn");
    out += buf;
    out += std::string(idw + 4 * 13, '-') + "\n";
    auto row = [&](const std::string& id, const MetricReport& m) {
        std::snprintf(buf, sizeof buf, "%-*s %12.4f %12.4f %12.4f %12.4f\n", int(idw), id.c_str(), m.mad, m.mse,
                      m.grad, m.conn);
        out += buf;
    };
    for (const auto& s : r.samples) {
        if (s.report) {
            row(s.id, *s.report);
        } else {
            std::snprintf(buf, sizeof buf, "%-*s error: %s\n", int(idw), s.id.c_str(), s.error ? s.error->c_str() : "");
            out += buf;
        }
    }
    out += std::string(idw + 4 * 13, '-') + "\n";
    row("mean", r.mean);
    std::snprintf(buf, sizeof buf, "evaluated %zu of %zu%s\n", r.evaluated, r.samples.size(),
                  r.unknown_region_only ? " (unknown region only)" : "");
    out += buf;
    if (r.dtssd) {
        std::snprintf(buf, sizeof buf, "dtSSD %.4f\n", *r.dtssd);
        out += buf;
    }
    for (const auto& u : r.unpaired) out += "unpaired: " + u + "\n";
    return out;
}

}  // namespace mattekit
