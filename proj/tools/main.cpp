// birkhoff: normal forms, coefficient checks and flow experiments from JSON configs.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "runner.hpp"

namespace fs = std::filesystem;
using birkhoff::json;
using namespace birkhoff::cli;

namespace {

json parse_value(const std::string &text)
{
    try {
        return json::parse(text);
    } catch (const json::exception &) {
        return json(text);
    }
}

/// Sets a dotted key ("integrator.tol") inside obj.
void set_path(json &obj, const std::string &path, const json &value)
{
    json *cur = &obj;
    std::size_t start = 0;
    for (;;) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (dot == std::string::npos) {
            (*cur)[key] = value;
            return;
        }
        cur = &(*cur)[key];
        start = dot + 1;
    }
}

std::vector<int> parse_index(const std::string &s)
{
    std::vector<int> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        try {
            out.push_back(std::stoi(s.substr(start, comma - start)));
        } catch (const std::exception &) {
            throw ValidationError("command line", std::nullopt, "--target", "expected comma separated integers, got '" + s + "'");
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

int report(const RunResult &r)
{
    for (const auto &a : r.actions) {
        std::printf("[%d] %-16s %-28s %s\n", a.index + 1, a.type.c_str(), a.dir.c_str(), a.status.c_str());
        if (a.status == "error") std::fprintf(stderr, "error: action %d (%s): %s\n", a.index + 1, a.dir.c_str(), a.error.c_str());
        for (const auto &v : a.verdicts)
            if (!v.pass)
                std::fprintf(stderr, "failed: action %d (%s): verdict '%s': measured %.17g %s %.17g\n", a.index + 1,
                             a.dir.c_str(), v.name.c_str(), v.measured, v.relation.c_str(), v.bound);
    }
    std::printf("manifest: %s\n", (r.out_dir / "manifest.json").string().c_str());
    return r.exit_code;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Birkhoff normal forms and diffusion experiments"};
    app.require_subcommand(1);
    app.fallthrough();
    RunSettings settings;
    std::string backend, out, profile;
    unsigned bits = 0;
    int order = 0;
    std::uint64_t seed = 0;
    app.add_option("--backend", backend, "Scalar backend")->check(CLI::IsMember({"exact", "float"}));
    app.add_option("--precision-bits", bits, "Mantissa bits of the float backend (>= 128)");
    app.add_option("--order", order, "Normal form order for normalize, coefficient and probe actions")
        ->check(CLI::PositiveNumber);
    app.add_option("--out", out, "Output directory (default $BIRKHOFF_OUT/<config name>)");
    app.add_option("--profile", profile, "Scale profile file applied to every model sequence")
        ->check(CLI::ExistingFile);
    app.add_option("--seed", seed, "Seed for randomized checks");
    app.add_flag("--parallel", settings.parallel, "Run the actions concurrently");

    auto *run_cmd = app.add_subcommand("run", "Run every action of a config file");
    std::string config_path;
    run_cmd->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);

    std::string model_path;
    auto *norm_cmd = app.add_subcommand("normalize", "Normalize a model");
    norm_cmd->add_option("model", model_path, "Model file")->required()->check(CLI::ExistingFile);

    auto *coeffs_cmd = app.add_subcommand("coeffs", "Normal form coefficients against closed forms");
    coeffs_cmd->add_option("model", model_path, "Model file")->required()->check(CLI::ExistingFile);
    std::string closed_form;
    int entry = -1;
    std::vector<std::string> targets, zetas;
    coeffs_cmd->add_option("--closed-form", closed_form, "gamma|i3sq-series|order2-pattern");
    coeffs_cmd->add_option("--entry", entry, "Sequence entry of the closed form");
    coeffs_cmd->add_option("--target", targets, "Action exponents, comma separated");
    coeffs_cmd->add_option("--zeta", zetas, "Zeta samples for the gamma comparison");

    auto *probe_cmd = app.add_subcommand("probe", "Root-test growth of a coefficient stream");
    probe_cmd->add_option("model", model_path, "Model file")->required()->check(CLI::ExistingFile);
    std::string source = "closed-form", gap_law, expect;
    probe_cmd->add_option("--source", source, "closed-form|normalize");
    probe_cmd->add_option("--gap-law", gap_law, "exp-n2");
    probe_cmd->add_option("--expect", expect, "radius->0|finite|infinite");

    auto *seq_cmd = app.add_subcommand("sequence", "Resonance sequence of a model");
    seq_cmd->add_option("model", model_path, "Model file")->required()->check(CLI::ExistingFile);
    bool check_orderings = false;
    seq_cmd->add_flag("--check-orderings", check_orderings, "Turn the ordering checks into verdicts");

    auto *exp_cmd = app.add_subcommand("experiment", "Run one flow experiment");
    std::string kind, params_path;
    std::vector<std::string> sets;
    exp_cmd->add_option("kind", kind, "delta|resonant-escape|rotating-frame|coupled-escape")->required();
    exp_cmd->add_option("params", params_path, "Parameter file")->check(CLI::ExistingFile);
    exp_cmd->add_option("--model", model_path, "Model file (coupled-escape)")->check(CLI::ExistingFile);
    exp_cmd->add_option("--set", sets, "key=value parameter override (value parsed as JSON)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (!backend.empty()) settings.backend = backend;
    if (bits) settings.precision_bits = bits;
    if (order) settings.order = order;
    if (!out.empty()) settings.out = out;
    if (!profile.empty()) settings.profile = profile;
    if (app.count("--seed")) settings.seed = seed;

    try {
        RunInput input;
        if (*run_cmd) {
            input = load_run_config(config_path);
        } else if (*exp_cmd) {
            json params = json::object();
            if (!params_path.empty()) {
                input = load_run_config(params_path);
                params = input.config;
                input.root_path = "actions[0].params";
            }
            for (const auto &s : sets) {
                const auto eq = s.find('=');
                if (eq == std::string::npos) {
                    std::fprintf(stderr, "error: --set %s: expected key=value\n", s.c_str());
                    return 2;
                }
                set_path(params, s.substr(0, eq), parse_value(s.substr(eq + 1)));
            }
            json cfg{{"actions", json::array({json{{"type", "experiment"}, {"kind", kind}, {"params", params}}})}};
            if (!model_path.empty()) {
                RunInput m = load_model_file(model_path);
                cfg["models"] = m.config["models"];
                cfg["actions"][0]["model"] = "model";
                input.files.insert(input.files.end(), m.files.begin(), m.files.end());
                if (params_path.empty()) {
                    input.text = m.text;
                    input.root_path = m.root_path;
                    input.base_dir = m.base_dir;
                }
            }
            input.config = std::move(cfg);
            input.stem = kind;
        } else {
            input = load_model_file(model_path);
            json action{{"model", "model"}};
            if (*norm_cmd) {
                action["type"] = "normalize";
            } else if (*coeffs_cmd) {
                action["type"] = "coefficients";
                if (!closed_form.empty()) action["closed_form"] = json{{"kind", closed_form}, {"entry", entry}};
                for (const auto &t : targets) action["targets"].push_back(parse_index(t));
                for (const auto &z : zetas) action["zeta"].push_back(z);
            } else if (*probe_cmd) {
                action["type"] = "divergence-probe";
                action["source"] = source;
                if (!gap_law.empty()) action["gap_law"] = gap_law;
                if (!expect.empty()) action["expect"] = expect;
            } else {
                action["type"] = "sequence";
                action["check_orderings"] = check_orderings;
            }
            input.config["actions"] = json::array({action});
        }
        return report(run(input, settings));
    } catch (const ValidationError &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
