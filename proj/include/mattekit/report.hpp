#pragma once

#include <string>

#include <json.hpp>

#include "mattekit/pipeline.hpp"

namespace mattekit {

nlohmann::ordered_json to_json(const MetricReport& r);
nlohmann::ordered_json to_json(const EvalReport& r);

/// Fixed-width text table: one row per sample, then the mean row.
std::string format_table(const EvalReport& r);

}  // namespace mattekit
