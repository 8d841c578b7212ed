// JSON configuration: include resolution and model/sequence parsing.

#ifndef BIRKHOFF_CONFIG_HPP
#define BIRKHOFF_CONFIG_HPP

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "birkhoff/models.hpp"
#include "birkhoff/series_io.hpp"

namespace birkhoff {

/// Configuration problem; `where` is a dotted key path such as
/// "models.saddle.omega.values".
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string where, const std::string &what)
        : std::runtime_error(where + ": " + what), where_(std::move(where))
    {
    }
    [[nodiscard]] const std::string &where() const noexcept { return where_; }

private:
    std::string where_;
};

/// Reads a JSON file. Any object may carry "include": "file" or [files];
/// included objects provide defaults that local keys override. Paths are
/// relative to the including file. `read`, when given, receives every file
/// opened, the top-level file first.
json load_config_file(const std::filesystem::path &path, std::vector<std::filesystem::path> *read = nullptr);

/// Resolves includes inside an already parsed document.
json resolve_includes(json doc, const std::filesystem::path &base_dir,
                      std::vector<std::filesystem::path> *read = nullptr);

ScaleProfile scale_profile_from_json(const json &j, const std::string &where);
json scale_profile_to_json(const ScaleProfile &p);
SequenceRequest sequence_request_from_json(const json &j, const std::string &where);

template <class S>
RealOf<S> real_from_json(const json &v, const std::string &where)
{
    try {
        if (v.is_string()) return ScalarTraits<S>::parse(v.get<std::string>());
        if (v.is_number_integer()) return ScalarTraits<S>::from_int(v.get<long long>());
        if (v.is_number()) return ScalarTraits<S>::parse(v.dump());
    } catch (const BackendError &e) {
        throw ConfigError(where, e.what());
    }
    throw ConfigError(where, "expected a number or a numeric string");
}

template <class S>
FrequencyVector<S> omega_from_json(const json &j, const std::string &where)
{
    if (!j.is_object() || !j.contains("values")) throw ConfigError(where, "omega needs a 'values' array");
    std::vector<RealOf<S>> values;
    int i = 0;
    for (const auto &v : j.at("values")) values.push_back(real_from_json<S>(v, where + ".values[" + std::to_string(i++) + "]"));
    std::vector<IntVector> lattice;
    if (j.contains("lattice")) lattice = j.at("lattice").get<std::vector<IntVector>>();
    try {
        return FrequencyVector<S>(std::move(values), std::move(lattice));
    } catch (const std::exception &e) {
        throw ConfigError(where, e.what());
    }
}

template <class S>
json omega_to_json(const FrequencyVector<S> &w)
{
    json values = json::array();
    for (const auto &v : w.values()) values.push_back(ScalarTraits<S>::render(v));
    return json{{"values", values}, {"lattice", w.relations()}};
}

template <class S>
ModelSpec<S> model_spec_from_json(const json &j, const std::string &where)
{
    if (!j.is_object()) throw ConfigError(where, "model must be an object");
    ModelSpec<S> spec;
    try {
        spec.family = family_from_string(j.at("family").get<std::string>());
    } catch (const json::exception &) {
        throw ConfigError(where + ".family", "missing or not a string");
    } catch (const std::invalid_argument &e) {
        throw ConfigError(where + ".family", e.what());
    }
    if (!j.contains("omega")) throw ConfigError(where, "missing 'omega'");
    spec.omega = omega_from_json<S>(j.at("omega"), where + ".omega");
    spec.order = j.value("order", 4);
    spec.terms = j.value("terms", 0);
    if (j.contains("pair_caps")) spec.pair_caps = j.at("pair_caps").get<std::vector<int>>();
    if (j.contains("coupling")) {
        const auto &c = j.at("coupling");
        if (c.contains("a")) spec.a = real_from_json<S>(c.at("a"), where + ".coupling.a");
        spec.k = c.value("k", 0LL);
        spec.l = c.value("l", 0LL);
    }
    if (spec.family == Family::resonant_2dof && spec.k == 0 && !spec.omega.relations().empty()) {
        const auto &rel = spec.omega.relations().front();
        spec.k = std::llabs(rel.at(0));
        spec.l = std::llabs(rel.at(1));
    }
    if (j.contains("sequence")) {
        const auto req = sequence_request_from_json(j.at("sequence"), where + ".sequence");
        try {
            spec.seq = resonance_sequence(spec.omega, req);
        } catch (const std::exception &e) {
            throw ConfigError(where + ".sequence", e.what());
        }
        if (!j.contains("terms")) spec.terms = static_cast<int>(spec.seq.entries.size());
    } else if (spec.terms > 0) {
        throw ConfigError(where, "'terms' > 0 needs a 'sequence'");
    }
    try {
        detail::check_family(spec);
    } catch (const std::exception &e) {
        throw ConfigError(where, e.what());
    }
    return spec;
}

template <class S>
json sequence_to_json(const ResonanceSequence<S> &seq)
{
    using T = ScalarTraits<S>;
    json out;
    out["mode"] = to_string(seq.mode);
    out["omega"] = omega_to_json(seq.omega);
    out["same_sign"] = seq.same_sign;
    out["scale_profile"] = scale_profile_to_json(seq.profile);
    json entries = json::array();
    for (const auto &e : seq.entries) {
        json row{{"n", e.n}, {"k", e.k}, {"l", e.l}, {"gap", T::render(e.gap)}, {"a", T::render(e.a)}};
        row["b"] = e.b ? json(T::render(*e.b)) : json(nullptr);
        row["zeta"] = T::render(e.zeta);
        if (e.i4) row["I4"] = T::render(*e.i4);
        if (e.khat) row["khat"] = *e.khat;
        if (e.nr_separation) row["nr_separation"] = T::render(*e.nr_separation);
        if (e.gap_surrogate) row["gap_surrogate"] = T::render(*e.gap_surrogate);
        entries.push_back(std::move(row));
    }
    out["entries"] = std::move(entries);
    return out;
}

} // namespace birkhoff

#endif
