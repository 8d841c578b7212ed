#include "birkhoff/config.hpp"

#include <fstream>
#include <sstream>

namespace birkhoff {

std::string to_string(Family f)
{
    switch (f) {
    case Family::a3:
        return "A3";
    case Family::a3_tilde:
        return "A3-tilde";
    case Family::a4:
        return "A4";
    case Family::a4_tilde:
        return "A4-tilde";
    case Family::b:
        return "B";
    case Family::b_same_sign:
        return "B-samesign";
    case Family::resonant_2dof:
        return "resonant-2dof";
    case Family::bare_saddle:
        return "bare-saddle";
    case Family::saddle_2dof:
        return "saddle-2dof";
    }
    return "?";
}

Family family_from_string(const std::string &s)
{
    for (auto f : {Family::a3, Family::a3_tilde, Family::a4, Family::a4_tilde, Family::b, Family::b_same_sign,
                   Family::resonant_2dof, Family::bare_saddle, Family::saddle_2dof})
        if (to_string(f) == s) return f;
    throw std::invalid_argument("unknown family '" + s + "'");
}

std::string to_string(ClosedFormKind k)
{
    switch (k) {
    case ClosedFormKind::gamma:
        return "gamma";
    case ClosedFormKind::i3sq_series:
        return "i3sq-series";
    case ClosedFormKind::order2_pattern:
        return "order2-pattern";
    }
    return "?";
}

ClosedFormKind closed_form_from_string(const std::string &s)
{
    for (auto k : {ClosedFormKind::gamma, ClosedFormKind::i3sq_series, ClosedFormKind::order2_pattern})
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown closed form '" + s + "' (expected gamma|i3sq-series|order2-pattern)");
}

namespace {

json parse_file(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), "cannot open file");
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw ConfigError(path.string(), e.what());
    }
}

// Local keys win; nested objects merge recursively.
void merge_defaults(json &target, const json &defaults)
{
    for (auto it = defaults.begin(); it != defaults.end(); ++it) {
        if (!target.contains(it.key()))
            target[it.key()] = it.value();
        else if (target[it.key()].is_object() && it.value().is_object())
            merge_defaults(target[it.key()], it.value());
    }
}

json resolve(json doc, const std::filesystem::path &base, int depth, std::vector<std::filesystem::path> *read)
{
    if (depth > 16) throw ConfigError(base.string(), "include nesting deeper than 16 (cycle?)");
    if (doc.is_array()) {
        for (auto &v : doc) v = resolve(std::move(v), base, depth, read);
        return doc;
    }
    if (!doc.is_object()) return doc;
    json includes;
    if (doc.contains("include")) {
        includes = doc["include"];
        doc.erase("include");
    }
    for (auto it = doc.begin(); it != doc.end(); ++it) it.value() = resolve(std::move(it.value()), base, depth, read);
    if (includes.is_string()) includes = json::array({includes});
    if (!includes.is_null() && !includes.is_array()) throw ConfigError(base.string(), "'include' must be a path or a list of paths");
    for (const auto &inc : includes) {
        const auto path = base / inc.get<std::string>();
        if (read) read->push_back(path);
        json other = resolve(parse_file(path), path.parent_path(), depth + 1, read);
        if (!other.is_object()) throw ConfigError(path.string(), "included document must be an object");
        merge_defaults(doc, other);
    }
    return doc;
}

} // namespace

json resolve_includes(json doc, const std::filesystem::path &base_dir, std::vector<std::filesystem::path> *read)
{
    return resolve(std::move(doc), base_dir, 0, read);
}

json load_config_file(const std::filesystem::path &path, std::vector<std::filesystem::path> *read)
{
    if (read) read->push_back(path);
    return resolve_includes(parse_file(path), path.parent_path(), read);
}

ScaleProfile scale_profile_from_json(const json &j, const std::string &where)
{
    ScaleProfile p;
    if (j.is_null()) return p;
    if (!j.is_object()) throw ConfigError(where, "scale profile must be an object");
    try {
        p.name = j.value("name", p.name);
        p.gap_offset = j.value("gap_offset", p.gap_offset);
        p.action_level = j.value("action_level", p.action_level);
        p.k_min = j.value("k_min", p.k_min);
        p.epsilon = j.value("epsilon", p.epsilon);
        p.escape_slack = j.value("escape_slack", p.escape_slack);
        p.control_factor = j.value("control_factor", p.control_factor);
    } catch (const json::exception &e) {
        throw ConfigError(where, e.what());
    }
    if (!(p.action_level > 0 && p.action_level < 1)) throw ConfigError(where + ".action_level", "must lie in (0, 1)");
    if (!(p.epsilon > 0 && p.epsilon < 0.01)) throw ConfigError(where + ".epsilon", "must lie in (0, 0.01)");
    if (!(p.escape_slack >= 1)) throw ConfigError(where + ".escape_slack", "must be >= 1");
    if (!(p.control_factor >= 1)) throw ConfigError(where + ".control_factor", "must be >= 1");
    return p;
}

json scale_profile_to_json(const ScaleProfile &p)
{
    return json{{"name", p.name},
                {"gap_offset", p.gap_offset},
                {"action_level", p.action_level},
                {"k_min", p.k_min},
                {"epsilon", p.epsilon},
                {"escape_slack", p.escape_slack},
                {"control_factor", p.control_factor}};
}

SequenceRequest sequence_request_from_json(const json &j, const std::string &where)
{
    if (!j.is_object()) throw ConfigError(where, "sequence must be an object");
    SequenceRequest r;
    try {
        r.mode = sequence_mode_from_string(j.value("mode", std::string("B")));
    } catch (const std::invalid_argument &e) {
        throw ConfigError(where + ".mode", e.what());
    }
    r.count = j.value("count", 1);
    r.first_index = j.value("first_index", 0);
    r.max_convergents = j.value("max_convergents", r.max_convergents);
    if (j.contains("scale_profile")) r.profile = scale_profile_from_json(j.at("scale_profile"), where + ".scale_profile");
    if (j.contains("overrides")) {
        const auto &o = j.at("overrides");
        auto read_map = [&](const char *key, std::map<int, std::string> &dst) {
            if (!o.contains(key)) return;
            for (auto it = o.at(key).begin(); it != o.at(key).end(); ++it) {
                int n = 0;
                try {
                    n = std::stoi(it.key());
                } catch (const std::exception &) {
                    throw ConfigError(where + ".overrides." + key, "keys must be entry indices");
                }
                dst[n] = it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
            }
        };
        read_map("a", r.overrides.a);
        read_map("zeta", r.overrides.zeta);
        read_map("gap", r.overrides.gap);
        if (o.contains("khat"))
            for (auto it = o.at("khat").begin(); it != o.at("khat").end(); ++it)
                r.overrides.khat[std::stoi(it.key())] = it.value().get<long long>();
    }
    return r;
}

} // namespace birkhoff
