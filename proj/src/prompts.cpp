#include "mattekit/prompts.hpp"

#include <cctype>
#include <fstream>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "mattekit/config.hpp"

namespace mattekit {

namespace {

struct Segment {
    enum Kind { literal, slot } kind = literal;
    std::string text;  // literal text or list name
    char article = 0;  // 0, 'a' or 'A'
};

std::vector<Segment> parse_template(const std::string& t) {
    std::vector<Segment> out;
    std::string lit;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const char ch = t[i];
        if (ch == '{' && i + 1 < t.size() && t[i + 1] == '{') {
            lit += '{';
            ++i;
        } else if (ch == '}' && i + 1 < t.size() && t[i + 1] == '}') {
            lit += '}';
            ++i;
        } else if (ch == '}') {
            throw PromptTemplateError("unmatched '}' at offset " + std::to_string(i));
        } else if (ch == '{') {
            const auto close = t.find('}', i);
            if (close == std::string::npos) throw PromptTemplateError("unterminated slot at offset " + std::to_string(i));
            std::string body = t.substr(i + 1, close - i - 1);
            Segment s{Segment::slot, {}, 0};
            if (body.size() > 2 && body[1] == ':') {
                if (body[0] != 'a' && body[0] != 'A') throw PromptTemplateError("unknown slot filter in '{" + body + "}'");
                s.article = body[0];
                body = body.substr(2);
            }
            if (body.empty()) throw PromptTemplateError("empty slot at offset " + std::to_string(i));
            for (char c : body) {
                if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') {
                    throw PromptTemplateError("bad slot name '" + body + "'");
                }
            }
            s.text = body;
            if (!lit.empty()) out.push_back({Segment::literal, std::move(lit), 0});
            lit.clear();
            out.push_back(std::move(s));
            i = close;
        } else {
            lit += ch;
        }
    }
    if (!lit.empty()) out.push_back({Segment::literal, std::move(lit), 0});
    return out;
}

// Referenced list names in order of first appearance.
std::vector<std::string> slot_order(const std::vector<Segment>& segs) {
    std::vector<std::string> names;
    std::unordered_set<std::string> seen;
    for (const auto& s : segs)
        if (s.kind == Segment::slot && seen.insert(s.text).second) names.push_back(s.text);
    return names;
}

std::string with_article(char article, const std::string& value) {
    if (article == 0 || value.empty()) return value;
    const char first = static_cast<char>(std::tolower(static_cast<unsigned char>(value.front())));
    const bool vowel = first == 'a' || first == 'e' || first == 'i' || first == 'o' || first == 'u';
    std::string a = vowel ? "an" : "a";
    if (article == 'A') a[0] = 'A';
    return a + " " + value;
}

struct Compiled {
    std::vector<Segment> segments;
    std::vector<std::string> slots;
    std::vector<const std::vector<std::string>*> lists;
    std::uint64_t count = 1;
};

Compiled compile(const PromptSpec& spec) {
    Compiled c;
    c.segments = parse_template(spec.template_text);
    c.slots = slot_order(c.segments);
    for (const auto& name : c.slots) {
        const auto* list = spec.find(name);
        if (!list) throw PromptTemplateError("slot '{" + name + "}' names no attribute list");
        if (list->empty()) throw PromptTemplateError("attribute list '" + name + "' is empty");
        if (c.count > std::numeric_limits<std::uint64_t>::max() / list->size()) {
            throw PromptTemplateError("attribute cross product exceeds 2^64");
        }
        c.count *= list->size();
        c.lists.push_back(list);
    }
    for (const auto& [name, values] : spec.attributes)
        if (values.empty()) throw PromptTemplateError("attribute list '" + name + "' is empty");
    return c;
}

std::string render(const Compiled& c, std::uint64_t index) {
    std::unordered_map<std::string, const std::string*> chosen;
    for (std::size_t k = c.slots.size(); k-- > 0;) {
        const auto n = c.lists[k]->size();
        chosen[c.slots[k]] = &(*c.lists[k])[index % n];
        index /= n;
    }
    std::string out;
    for (const auto& s : c.segments) out += s.kind == Segment::literal ? s.text : with_article(s.article, *chosen.at(s.text));
    return out;
}

}  // namespace

const std::vector<std::string>* PromptSpec::find(const std::string& name) const {
    for (const auto& [key, values] : attributes)
        if (key == name) return &values;
    return nullptr;
}

nlohmann::ordered_json PromptSpec::to_json() const {
    nlohmann::ordered_json j;
    j["template"] = template_text;
    j["attributes"] = nlohmann::ordered_json::object();
    for (const auto& [name, values] : attributes) j["attributes"][name] = values;
    return j;
}

PromptSpec PromptSpec::from_json(const nlohmann::ordered_json& j) {
    PromptSpec spec;
    if (!j.contains("template") || !j["template"].is_string()) throw PromptTemplateError("prompt spec needs a \"template\" string");
    spec.template_text = j["template"].get<std::string>();
    if (!j.contains("attributes") || !j["attributes"].is_object()) throw PromptTemplateError("prompt spec needs an \"attributes\" object");
    for (const auto& [name, values] : j["attributes"].items()) {
        spec.attributes.emplace_back(name, values.get<std::vector<std::string>>());
    }
    return spec;
}

PromptSpec load_prompt_spec(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw PromptTemplateError("cannot read prompt spec " + path.string());
    // Ordered parse keeps the attribute order of the file.
    auto spec = PromptSpec::from_json(nlohmann::ordered_json::parse(in));
    validate(spec);
    return spec;
}

PromptSpec default_prompt_spec() {
    PromptSpec spec;
    spec.template_text =
        "{A:age} {gender} with {hair_color} {hair_length} hair{accessory}, "
        "wearing {clothing_style} {attire}, {action}.";
    spec.attributes = {
        {"age", {"young", "middle-aged", "senior", "elderly"}},
        {"gender", {"man", "woman", "person"}},
        {"hair_color", {"black", "blonde", "brown", "red", "white", "gray"}},
        {"hair_length", {"short", "long", "shoulder-length", "curly"}},
        {"accessory", {"", " and glasses", " and a hat", " and sunglasses"}},
        {"clothing_style", {"casual", "formal", "elegant", "sporty", "vintage"}},
        {"attire", {"jeans", "blouse", "dress", "suit", "t-shirt", "jacket", "sweater"}},
        {"action", {"striking a pose", "walking", "waving", "sitting", "crossing arms"}},
        {"emotion", {"smiling", "looking thoughtful", "laughing", "looking serious"}},
        {"occupation", {"chef", "doctor", "teacher", "musician", "office worker"}},
    };
    return spec;
}

void validate(const PromptSpec& spec) { (void)compile(spec); }

std::uint64_t combination_count(const PromptSpec& spec) { return compile(spec).count; }

std::string render_prompt(const PromptSpec& spec, std::uint64_t index) {
    const auto c = compile(spec);
    if (index >= c.count) throw std::out_of_range("prompt index out of range");
    return render(c, index);
}

std::vector<std::string> generate_prompts(const PromptSpec& spec, std::uint64_t limit, std::uint64_t seed) {
    if (limit < 1) throw std::invalid_argument("generate_prompts: limit must be >= 1");
    const auto c = compile(spec);
    const std::uint64_t n = c.count;
    const std::uint64_t k = std::min(limit, n);
    PipelineRng rng(derive_seed(seed, "prompts"));

    std::vector<std::uint64_t> picks;
    picks.reserve(k);
    // Floyd's algorithm: k distinct indices with O(k) memory. Each step draws
    // t in [0, j]; if t was already chosen, j (new this round) is taken instead.
    std::unordered_set<std::uint64_t> chosen;
    for (std::uint64_t j = n - k; j < n; ++j) {
        const std::uint64_t t = bounded(rng, j + 1);
        const std::uint64_t pick = chosen.count(t) ? j : t;
        chosen.insert(pick);
        picks.push_back(pick);
    }
    // Floyd's output order is biased toward late indices; a seeded shuffle
    // makes the draw order uniform too.
    for (std::uint64_t i = k; i > 1; --i) std::swap(picks[i - 1], picks[bounded(rng, i)]);

    std::vector<std::string> out;
    out.reserve(k);
    for (auto idx : picks) out.push_back(render(c, idx));
    return out;
}

}  // namespace mattekit
