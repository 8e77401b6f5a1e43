#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace mattekit {

class PromptTemplateError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Named attribute lists plus a template with `{name}` slots. `{a:name}` and
/// `{A:name}` prefix the value with a lowercase or capitalized indefinite
/// article. `{{` and `}}` are literal braces.
struct PromptSpec {
    std::vector<std::pair<std::string, std::vector<std::string>>> attributes;
    std::string template_text;

    const std::vector<std::string>* find(const std::string& name) const;

    nlohmann::ordered_json to_json() const;
    static PromptSpec from_json(const nlohmann::ordered_json& j);
};

/// Portrait vocabulary: gender, age, hair length and color, glasses/hat,
/// clothing style, attire, action, emotion and occupation.
PromptSpec default_prompt_spec();

PromptSpec load_prompt_spec(const std::filesystem::path& path);

/// Throws PromptTemplateError for malformed slots, unknown lists or empty lists.
void validate(const PromptSpec& spec);

/// Number of distinct prompts: the product of the sizes of the lists the
/// template references (a list used twice counts once).
std::uint64_t combination_count(const PromptSpec& spec);

/// Renders the combination with the given mixed-radix index. Slots are
/// ordered by first appearance in the template, the first one most significant.
std::string render_prompt(const PromptSpec& spec, std::uint64_t index);

/// Seeded sample without replacement from the cross product, returned in draw
/// order. Returns min(limit, combination_count) prompts.
std::vector<std::string> generate_prompts(const PromptSpec& spec, std::uint64_t limit, std::uint64_t seed);

}  // namespace mattekit
