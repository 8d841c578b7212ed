#include "runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include <unistd.h>

#include <openssl/evp.h>

#include "birkhoff/bnf.hpp"

namespace birkhoff::cli {

ValidationError::ValidationError(std::string file, std::optional<int> line, std::string where, const std::string &what)
    : std::runtime_error(file + (line ? ":" + std::to_string(*line) : std::string()) + ": " +
                         (where.empty() ? std::string() : where + ": ") + what),
      file_(std::move(file)), line_(line), where_(std::move(where))
{
}

std::string sha256_hex(const std::string &data)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    static const char *hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::optional<int> locate_line(const std::string &text, const std::string &where)
{
    std::size_t pos = 0;
    std::size_t start = 0;
    bool any = false;
    while (start <= where.size()) {
        auto end = where.find('.', start);
        if (end == std::string::npos) end = where.size();
        std::string key = where.substr(start, end - start);
        if (auto br = key.find('['); br != std::string::npos) key = key.substr(0, br);
        start = end + 1;
        if (key.empty()) continue;
        const std::string quoted = "\"" + key + "\"";
        std::size_t hit = pos;
        for (;;) {
            hit = text.find(quoted, hit);
            if (hit == std::string::npos) return std::nullopt;
            auto after = text.find_first_not_of(" \t\r\n", hit + quoted.size());
            if (after != std::string::npos && text[after] == ':') break;
            hit += quoted.size();
        }
        pos = hit;
        any = true;
    }
    if (!any) return std::nullopt;
    return static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n')) + 1;
}

std::filesystem::path default_output_root()
{
    if (const char *env = std::getenv("BIRKHOFF_OUT"); env && *env) return env;
    return "birkhoff-out";
}

namespace {

namespace fs = std::filesystem;

std::string read_text(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ValidationError(p.string(), std::nullopt, "", "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunInput load_common(const fs::path &path)
{
    RunInput in;
    in.text = read_text(path);
    in.base_dir = path.parent_path();
    in.stem = path.stem().string();
    try {
        in.config = load_config_file(path, &in.files);
    } catch (const ConfigError &e) {
        throw ValidationError(path.filename().string(), std::nullopt, "", e.what());
    }
    return in;
}

struct PlanError {
    std::string where;
    std::string what;
};

[[noreturn]] void fail(const std::string &where, const std::string &what)
{
    throw PlanError{where, what};
}

void check_keys(const json &o, const std::string &where, std::initializer_list<const char *> allowed)
{
    if (!o.is_object()) fail(where, "expected an object");
    for (auto it = o.begin(); it != o.end(); ++it)
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char *k) { return it.key() == k; }))
            fail(where + "." + it.key(), "unknown key");
}

template <class T>
T get(const json &o, const char *key, const std::string &where, T def)
{
    if (!o.contains(key)) return def;
    try {
        return o.at(key).get<T>();
    } catch (const json::exception &) {
        fail(where + "." + key, "wrong type");
    }
}

double get_positive(const json &o, const char *key, const std::string &where, double def)
{
    const double v = get<double>(o, key, where, def);
    if (!(v > 0) || !std::isfinite(v)) fail(where + "." + key, "must be a positive number");
    return v;
}

double get_nonnegative(const json &o, const char *key, const std::string &where, double def)
{
    const double v = get<double>(o, key, where, def);
    if (!(v >= 0) || !std::isfinite(v)) fail(where + "." + key, "must be a number >= 0");
    return v;
}

std::string dump(const json &j)
{
    return j.dump(2) + "\n";
}

std::string fmt17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

IntegrateOptions integrator_from_json(const json &o, const std::string &where, IntegrateOptions opts = {})
{
    if (!o.contains("integrator")) return opts;
    const json &j = o.at("integrator");
    const std::string w = where + ".integrator";
    check_keys(j, w,
               {"method", "tol", "abs_tol", "rel_tol", "initial_step", "fixed_step", "sample_interval", "min_step",
                "blowup_norm", "escape_time_tol", "max_steps"});
    if (j.contains("method")) {
        try {
            opts.method = method_from_string(get<std::string>(j, "method", w, ""));
        } catch (const std::invalid_argument &e) {
            fail(w + ".method", e.what());
        }
    }
    if (j.contains("tol")) opts.abs_tol = opts.rel_tol = get_positive(j, "tol", w, 0);
    opts.abs_tol = get_positive(j, "abs_tol", w, opts.abs_tol);
    opts.rel_tol = get_positive(j, "rel_tol", w, opts.rel_tol);
    opts.initial_step = get_positive(j, "initial_step", w, opts.initial_step);
    opts.fixed_step = get_positive(j, "fixed_step", w, opts.fixed_step);
    opts.sample_interval = get_nonnegative(j, "sample_interval", w, opts.sample_interval);
    opts.min_step = get_positive(j, "min_step", w, opts.min_step);
    opts.blowup_norm = get_positive(j, "blowup_norm", w, opts.blowup_norm);
    opts.escape_time_tol = get_positive(j, "escape_time_tol", w, opts.escape_time_tol);
    opts.max_steps = get<std::size_t>(j, "max_steps", w, opts.max_steps);
    return opts;
}

struct OutFile {
    std::string name;
    std::string format;
    std::string content;
};

struct ActionOutput {
    std::vector<OutFile> files;
    json summary = json::object();
    std::vector<Verdict> verdicts;
};

struct Prepared {
    int index = 0;
    std::string type;
    std::string dir;
    std::function<ActionOutput()> run;
};

json verdicts_json(const std::vector<Verdict> &vs)
{
    ExperimentReport r;
    r.verdicts = vs;
    return r.to_json().at("verdicts");
}

/// report.json for the table actions, in the experiment report layout.
OutFile table_report(const std::string &kind, json inputs, json predicted, json measured, std::vector<Verdict> vs)
{
    ExperimentReport r;
    r.kind = kind;
    r.inputs = std::move(inputs);
    r.predicted = std::move(predicted);
    r.measured = std::move(measured);
    r.verdicts = std::move(vs);
    return {"report.json", "json", dump(r.to_json())};
}

void add_run_files(ActionOutput &out, const ExperimentRun &run)
{
    json report = run.report.to_json();
    json meta = json::object();
    for (const auto &[name, tr] : run.trajectories) meta[name] = trajectory_metadata(tr);
    report["trajectories"] = std::move(meta);
    out.files.push_back({"report.json", "json", dump(report)});
    for (const auto &[name, tr] : run.trajectories) {
        const std::string file = (run.trajectories.size() == 1 ? std::string("trajectory") : name) + ".csv";
        out.files.push_back({file, "csv", trajectory_csv(tr)});
    }
    out.verdicts = run.report.verdicts;
    out.summary["pass"] = run.report.pass();
}

std::string index_label(const ActionIndex &idx)
{
    std::string s;
    for (std::size_t j = 0; j < idx.size(); ++j) s += (j ? " " : "") + std::to_string(idx[j]);
    return s;
}

template <class S>
class Planner {
public:
    using T = ScalarTraits<S>;
    using R = RealOf<S>;

    Planner(const json &cfg, std::uint64_t seed) : cfg_(cfg), seed_(seed)
    {
        if (!cfg.contains("models")) return;
        const json &models = cfg.at("models");
        if (!models.is_object()) fail("models", "expected an object of named models");
        for (auto it = models.begin(); it != models.end(); ++it) {
            try {
                models_.emplace(it.key(), model_spec_from_json<S>(it.value(), "models." + it.key()));
            } catch (const ConfigError &e) {
                const std::string msg = e.what();
                fail(e.where(), msg.substr(std::min(msg.size(), e.where().size() + 2)));
            }
        }
    }

    Prepared plan(const json &a, int index)
    {
        const std::string w = "actions[" + std::to_string(index) + "]";
        if (!a.is_object()) fail(w, "expected an object");
        const auto type = get<std::string>(a, "type", w, "");
        Prepared p;
        p.index = index;
        p.type = type;
        char num[16];
        std::snprintf(num, sizeof num, "%02d", index + 1);
        std::string label = get<std::string>(a, "name", w, "");
        if (label.find_first_of("/\\") != std::string::npos || label == "." || label == "..")
            fail(w + ".name", "must be a plain file name");
        if (type == "normalize")
            p.run = plan_normalize(a, w);
        else if (type == "coefficients")
            p.run = plan_coefficients(a, w);
        else if (type == "divergence-probe")
            p.run = plan_probe(a, w);
        else if (type == "sequence")
            p.run = plan_sequence(a, w);
        else if (type == "russmann")
            p.run = plan_russmann(a, w);
        else if (type == "experiment") {
            p.run = plan_experiment(a, w);
            if (label.empty()) label = a.at("kind").get<std::string>();
        } else if (type.empty())
            fail(w + ".type", "missing");
        else
            fail(w + ".type",
                 "unknown action '" + type +
                     "' (expected normalize|coefficients|divergence-probe|sequence|russmann|experiment)");
        p.dir = std::string(num) + "-" + (label.empty() ? type : label);
        return p;
    }

private:
    std::pair<std::string, ModelSpec<S>> model_ref(const json &a, const std::string &w) const
    {
        const auto name = get<std::string>(a, "model", w, "");
        if (name.empty()) fail(w + ".model", "missing");
        auto it = models_.find(name);
        if (it == models_.end()) fail(w + ".model", "unknown model '" + name + "'");
        return *it;
    }

    static int get_order(const json &a, const std::string &w, int def)
    {
        const int n = get<int>(a, "order", w, def);
        if (n < 1) fail(w + ".order", "must be >= 1");
        return n;
    }

    static NormalFormResult<S> normalize_spec(ModelSpec<S> spec, int N, const NormalizeOptions &no = {})
    {
        spec.order = std::max(spec.order, 2 * N);
        return normalize_to_order(build_model(spec), spec.omega, N, no);
    }

    static std::string bnf_csv(const NormalFormResult<S> &r)
    {
        std::string s;
        for (int j = 1; j <= r.omega.dof(); ++j) s += "e" + std::to_string(j) + ",";
        s += "re,im\n";
        for (const auto &[idx, c] : r.bnf) {
            for (int e : idx) s += std::to_string(e) + ",";
            s += T::render(c.re) + "," + T::render(c.im) + "\n";
        }
        return s;
    }

    static double to_d(const R &v) { return T::to_double(v); }

    std::function<ActionOutput()> plan_normalize(const json &a, const std::string &w)
    {
        check_keys(a, w, {"type", "name", "model", "order", "allow_resonant", "batched", "shuffle_check", "tol"});
        const auto [name, spec] = model_ref(a, w);
        const int N = get_order(a, w, 4);
        NormalizeOptions no;
        no.allow_resonant = get<bool>(a, "allow_resonant", w, false);
        no.batched = get<bool>(a, "batched", w, true);
        const bool shuffle = get<bool>(a, "shuffle_check", w, false);
        const double tol = get_nonnegative(a, "tol", w, 0.0);
        const auto seed = seed_;
        return [=] {
            const auto r = normalize_spec(spec, N, no);
            ActionOutput out;
            json bnf = normal_form_to_json(r);
            bnf["model"] = name;
            out.files.push_back({"bnf.json", "json", dump(bnf)});
            out.files.push_back({"bnf.csv", "csv", bnf_csv(r)});
            out.summary["order"] = r.order;
            out.summary["bnf_terms"] = r.bnf.size();
            out.summary["remainder_terms"] = r.remainder.size();
            if (const auto md = r.min_divisor()) out.summary["min_divisor"] = T::render(*md);
            if (shuffle) {
                auto no2 = no;
                no2.batched = false;
                no2.shuffle_seed = seed;
                const auto r2 = normalize_spec(spec, N, no2);
                double diff = 0;
                auto keys = r.bnf;
                for (const auto &[idx, c] : r2.bnf) keys.try_emplace(idx, S{});
                for (const auto &[idx, c] : keys) {
                    const S d = bnf_coefficient(r, idx) - bnf_coefficient(r2, idx);
                    diff = std::max(diff, std::abs(to_d(d.re)) + std::abs(to_d(d.im)));
                }
                out.verdicts.push_back(make_verdict("shuffled per-monomial elimination agrees", diff, "<=", tol));
                out.files.push_back(table_report("normalize", json{{"model", name}, {"order", N}, {"seed", seed}},
                                                 json::object(), json{{"max_coefficient_difference", number_json(diff)}},
                                                 out.verdicts));
            }
            return out;
        };
    }

    struct Row {
        std::string quantity;
        std::string index;
        std::string measured;
        std::string predicted;
        double difference = 0;
        std::string compare;
    };

    static std::string rows_csv(const std::vector<Row> &rows)
    {
        std::string s = "quantity,index,measured,predicted,difference,compare\n";
        for (const auto &r : rows)
            s += r.quantity + "," + r.index + "," + r.measured + "," + r.predicted + "," +
                 (r.predicted.empty() ? std::string() : fmt17(r.difference)) + "," + r.compare + "\n";
        return s;
    }

    static json rows_json(const std::vector<Row> &rows)
    {
        json out = json::array();
        for (const auto &r : rows) {
            json row{{"quantity", r.quantity}, {"index", r.index}, {"measured", r.measured}};
            if (!r.predicted.empty()) {
                row["predicted"] = r.predicted;
                row["difference"] = number_json(r.difference);
                row["compare"] = r.compare;
            }
            out.push_back(std::move(row));
        }
        return out;
    }

    /// Relative difference, by value or by magnitude.
    static double difference(const S &m, const R &p, bool magnitude)
    {
        const R scale = std::max(R(1), T::abs(p));
        const R re = magnitude ? T::abs(T::abs(m.re) - T::abs(p)) : T::abs(m.re - p);
        return to_d(re / scale) + to_d(T::abs(m.im) / scale);
    }

    static std::optional<ActionIndex> parse_index(const json &v, int d)
    {
        if (!v.is_array() || static_cast<int>(v.size()) != d) return std::nullopt;
        ActionIndex idx;
        for (const auto &e : v) {
            if (!e.is_number_integer() || e.get<int>() < 0) return std::nullopt;
            idx.push_back(e.get<int>());
        }
        return idx;
    }

    std::function<ActionOutput()> plan_coefficients(const json &a, const std::string &w)
    {
        check_keys(a, w, {"type", "name", "model", "order", "targets", "closed_form", "compare", "tol", "zeta"});
        const auto [name, spec] = model_ref(a, w);
        const int N = get_order(a, w, 4);
        const int d = spec.omega.dof();
        std::vector<ActionIndex> targets;
        if (a.contains("targets")) {
            const json &t = a.at("targets");
            if (!t.is_array()) fail(w + ".targets", "expected a list of exponent vectors");
            for (std::size_t i = 0; i < t.size(); ++i) {
                auto idx = parse_index(t[i], d);
                if (!idx) fail(w + ".targets[" + std::to_string(i) + "]", "expected " + std::to_string(d) + " exponents >= 0");
                if (action_degree(*idx) > N) fail(w + ".targets[" + std::to_string(i) + "]", "degree exceeds order");
                targets.push_back(*idx);
            }
        }
        std::optional<ClosedFormKind> kind;
        int entry = -1;
        if (a.contains("closed_form")) {
            const json &cf = a.at("closed_form");
            check_keys(cf, w + ".closed_form", {"kind", "entry"});
            try {
                kind = closed_form_from_string(get<std::string>(cf, "kind", w + ".closed_form", ""));
            } catch (const std::invalid_argument &e) {
                fail(w + ".closed_form.kind", e.what());
            }
            entry = get<int>(cf, "entry", w + ".closed_form", -1);
            try {
                (void)closed_form_coefficients(spec, *kind, entry);
            } catch (const std::exception &e) {
                fail(w + ".closed_form", e.what());
            }
        }
        if (!kind && targets.empty()) fail(w, "needs 'targets' or 'closed_form'");
        const auto compare = get<std::string>(a, "compare", w, "auto");
        if (compare != "auto" && compare != "exact" && compare != "magnitude")
            fail(w + ".compare", "expected auto|exact|magnitude");
        const double default_tol = T::backend == Backend::exact ? 0.0 : 1e-25;
        const double tol = get_nonnegative(a, "tol", w, default_tol);

        std::vector<R> zetas;
        if (kind == ClosedFormKind::gamma) {
            if (!a.contains("zeta") || !a.at("zeta").is_array() || a.at("zeta").size() < 3)
                fail(w + ".zeta", "the gamma comparison needs a list of at least three zeta values");
            for (std::size_t i = 0; i < a.at("zeta").size(); ++i) {
                try {
                    zetas.push_back(real_from_json<S>(a.at("zeta")[i], w + ".zeta[" + std::to_string(i) + "]"));
                } catch (const ConfigError &e) {
                    fail(e.where(), "not a number on this backend");
                }
            }
            if (action_degree(closed_form_coefficients(spec, *kind, entry).values.front().first) > N)
                fail(w + ".order", "too low for the gamma index");
        } else if (a.contains("zeta")) {
            fail(w + ".zeta", "only used with closed_form.kind = gamma");
        }

        return [=] {
            ActionOutput out;
            std::vector<Row> rows;
            json predicted = json::object(), measured = json::object();
            std::optional<ClosedForm<S>> cf;
            if (kind) cf = closed_form_coefficients(spec, *kind, entry);
            const bool magnitude = compare == "magnitude" || (compare == "auto" && cf && cf->sign_caveat);
            const std::string mode = magnitude ? "magnitude" : "exact";

            if (kind == ClosedFormKind::gamma) {
                std::vector<R> gammas;
                for (const auto &z : zetas) gammas.push_back(theorem_b_coefficient(spec, entry, z, N).re);
                // Quadratic through the first, middle and last samples.
                const std::size_t i0 = 0, i1 = zetas.size() / 2, i2 = zetas.size() - 1;
                const R &x0 = zetas[i0], &x1 = zetas[i1], &x2 = zetas[i2];
                const R c0 = gammas[i0] / ((x0 - x1) * (x0 - x2));
                const R c1 = gammas[i1] / ((x1 - x0) * (x1 - x2));
                const R c2 = gammas[i2] / ((x2 - x0) * (x2 - x1));
                auto fit = [&](const R &x) -> R {
                    return c0 * (x - x1) * (x - x2) + c1 * (x - x0) * (x - x2) + c2 * (x - x0) * (x - x1);
                };
                const R quad = c0 + c1 + c2;
                double residual = 0;
                json samples = json::array();
                for (std::size_t i = 0; i < zetas.size(); ++i) {
                    const R f = fit(zetas[i]);
                    const double r = to_d(T::abs(gammas[i] - f) / std::max(R(1), T::abs(f)));
                    residual = std::max(residual, r);
                    rows.push_back({"Gamma(zeta=" + T::render(zetas[i]) + ")", index_label(cf->values.front().first),
                                    T::render(gammas[i]), T::render(f), r, "exact"});
                    samples.push_back(json{{"zeta", T::render(zetas[i])}, {"Gamma", T::render(gammas[i])}});
                }
                const R gamma = cf->values.front().second;
                const double diff = difference(make_real<S>(quad), gamma, magnitude);
                rows.push_back({"zeta^2 coefficient", index_label(cf->values.front().first), T::render(quad),
                                T::render(gamma), diff, mode});
                measured["samples"] = std::move(samples);
                measured["quadratic"] = T::render(quad);
                measured["interpolation_residual"] = number_json(residual);
                predicted["gamma"] = T::render(gamma);
                out.verdicts.push_back(make_verdict("quadratic interpolation residual", residual, "<=", tol));
                out.verdicts.push_back(make_verdict("|zeta^2 coefficient| vs |gamma|", diff, "<=", tol));
            } else {
                const auto r = normalize_spec(spec, N);
                json bnf = normal_form_to_json(r);
                bnf["model"] = name;
                out.files.push_back({"bnf.json", "json", dump(bnf)});
                if (cf) {
                    for (const auto &[idx, p] : cf->values) {
                        const S m = bnf_coefficient(r, idx);
                        const double diff = difference(m, p, magnitude);
                        rows.push_back({"coefficient", index_label(idx), T::render(m.re), T::render(p), diff, mode});
                        out.verdicts.push_back(make_verdict("coefficient " + index_label(idx), diff, "<=", tol));
                        predicted[index_label(idx)] = T::render(p);
                        measured[index_label(idx)] = T::render(m.re);
                    }
                }
                for (const auto &idx : targets) {
                    const S m = bnf_coefficient(r, idx);
                    rows.push_back({"coefficient", index_label(idx), T::render(m.re), "", 0, ""});
                    measured[index_label(idx)] = T::render(m.re);
                }
            }
            out.files.push_back({"coefficients.csv", "csv", rows_csv(rows)});
            json inputs{{"model", name}, {"order", N}, {"tol", tol}, {"compare", mode}};
            if (kind) inputs["closed_form"] = to_string(*kind);
            if (cf) inputs["sign_caveat"] = cf->sign_caveat;
            json table = json{{"rows", rows_json(rows)}};
            out.files.push_back({"coefficients.json", "json", dump(table)});
            if (!out.verdicts.empty()) {
                out.files.push_back(table_report("coefficients", inputs, predicted, measured, out.verdicts));
                out.summary["pass"] = std::all_of(out.verdicts.begin(), out.verdicts.end(), [](const Verdict &v) { return v.pass; });
            }
            out.summary["rows"] = rows.size();
            return out;
        };
    }

    std::function<ActionOutput()> plan_probe(const json &a, const std::string &w)
    {
        check_keys(a, w, {"type", "name", "model", "source", "order", "indices", "gap_law", "per_entry", "expect"});
        auto [name, spec] = model_ref(a, w);
        const auto source = get<std::string>(a, "source", w, "closed-form");
        if (source != "closed-form" && source != "normalize") fail(w + ".source", "expected closed-form|normalize");
        const int N = get_order(a, w, 4);
        const auto gap_law = get<std::string>(a, "gap_law", w, "");
        const auto per_entry = get<std::string>(a, "per_entry", w, "max");
        if (per_entry != "max" && per_entry != "all") fail(w + ".per_entry", "expected max|all");
        const auto expect = get<std::string>(a, "expect", w, "");
        if (!expect.empty() && expect != "radius->0" && expect != "finite" && expect != "infinite")
            fail(w + ".expect", "expected radius->0|finite|infinite");
        if (!gap_law.empty()) {
            if (gap_law != "exp-n2") fail(w + ".gap_law", "expected exp-n2");
            if (source != "closed-form") fail(w + ".gap_law", "only applies to the closed-form source");
            if (T::backend == Backend::exact) fail(w + ".gap_law", "exp-n2 gaps need the float backend");
        }
        if (source == "closed-form") {
            if (!detail::is_a_family(spec.family)) fail(w + ".model", "the closed-form stream applies to the A families");
            if (spec.terms < 1) fail(w + ".model", "model has no coupling terms");
        }
        std::vector<ActionIndex> indices;
        if (a.contains("indices")) {
            if (source != "normalize") fail(w + ".indices", "only used with source = normalize");
            for (std::size_t i = 0; i < a.at("indices").size(); ++i) {
                auto idx = parse_index(a.at("indices")[i], spec.omega.dof());
                if (!idx || action_degree(*idx) > N) fail(w + ".indices[" + std::to_string(i) + "]", "bad exponent vector");
                indices.push_back(*idx);
            }
        }
        return [=] {
            auto s = spec;
            std::vector<std::pair<ActionIndex, S>> stream;
            if (source == "closed-form") {
                s.seq.entries.resize(static_cast<std::size_t>(s.terms));
                if (gap_law == "exp-n2")
                    for (auto &e : s.seq.entries)
                        e.gap_surrogate = T::exp(-T::from_int(static_cast<long long>(e.n) * e.n * (e.k + e.l)));
                const auto cf = closed_form_coefficients(s, ClosedFormKind::i3sq_series, -1);
                for (std::size_t i = 0; i < cf.values.size(); i += 2) {
                    const auto &p = cf.values[i], &q = cf.values[i + 1];
                    if (per_entry == "all") {
                        stream.emplace_back(p.first, make_real<S>(p.second));
                        stream.emplace_back(q.first, make_real<S>(q.second));
                    } else {
                        const auto &big = T::abs(q.second) > T::abs(p.second) ? q : p;
                        stream.emplace_back(big.first, make_real<S>(big.second));
                    }
                }
            } else {
                const auto r = normalize_spec(s, N);
                if (indices.empty()) {
                    for (const auto &[idx, c] : r.bnf)
                        if (action_degree(idx) >= 2) stream.emplace_back(idx, c);
                } else {
                    for (const auto &idx : indices) stream.emplace_back(idx, bnf_coefficient(r, idx));
                }
            }
            const auto g = divergence_probe(stream);
            ActionOutput out;
            std::string csv;
            for (int j = 1; j <= s.omega.dof(); ++j) csv += "e" + std::to_string(j) + ",";
            csv += "coefficient,root\n";
            json rows = json::array();
            std::size_t k = 0;
            for (const auto &[idx, c] : stream) {
                for (int e : idx) csv += std::to_string(e) + ",";
                const bool counted = k < g.indices.size() && g.indices[k] == idx && !c.is_zero();
                csv += T::render(c.re) + "," + (counted ? fmt17(g.roots[k]) : std::string()) + "\n";
                rows.push_back(json{{"idx", idx}, {"re", T::render(c.re)}, {"im", T::render(c.im)}});
                if (counted) ++k;
            }
            out.files.push_back({"probe.csv", "csv", csv});
            json report = growth_report_to_json(g);
            report["stream"] = std::move(rows);
            out.files.push_back({"probe.json", "json", dump(report)});
            out.summary["verdict"] = to_string(g.verdict);
            if (!expect.empty()) {
                out.verdicts.push_back(make_verdict("radius verdict is " + expect,
                                                    to_string(g.verdict) == expect ? 1.0 : 0.0, "==", 1.0));
                out.files.push_back(table_report("divergence-probe",
                                                 json{{"model", name}, {"source", source}, {"gap_law", gap_law},
                                                      {"per_entry", per_entry}},
                                                 json{{"verdict", expect}}, growth_report_to_json(g), out.verdicts));
                out.summary["pass"] = out.verdicts.front().pass;
            }
            return out;
        };
    }

    std::function<ActionOutput()> plan_sequence(const json &a, const std::string &w)
    {
        check_keys(a, w, {"type", "name", "model", "check_orderings"});
        const auto [name, spec] = model_ref(a, w);
        const bool check = get<bool>(a, "check_orderings", w, false);
        return [=] {
            ActionOutput out;
            json seq = sequence_to_json(spec.seq);
            seq["model"] = name;
            json orderings = json::array();
            for (const auto &e : spec.seq.entries) {
                if (e.n < 1 || !detail::is_a_family(spec.family)) continue;
                json checks = json::array();
                for (const auto &c : ordering_checks(spec.seq, e.n)) {
                    const std::string rel =
                        c.name.find("<=") == std::string::npos && c.name.find(" < ") != std::string::npos ? "<" : "<=";
                    checks.push_back(json{{"name", c.name}, {"lhs", number_json(c.lhs)}, {"rhs", number_json(c.rhs)},
                                          {"holds", c.holds}});
                    if (check) {
                        auto v = make_verdict("n=" + std::to_string(e.n) + ": " + c.name, c.lhs, rel, c.rhs);
                        v.pass = v.pass && c.holds;
                        out.verdicts.push_back(v);
                    }
                }
                orderings.push_back(json{{"n", e.n}, {"checks", checks}});
            }
            seq["orderings"] = std::move(orderings);
            out.files.push_back({"sequence.json", "json", dump(seq)});
            if (check)
                out.files.push_back(table_report("sequence", json{{"model", name}}, json::object(), json::object(),
                                                 out.verdicts));
            out.summary["entries"] = spec.seq.entries.size();
            return out;
        };
    }

    std::function<ActionOutput()> plan_russmann(const json &a, const std::string &w)
    {
        check_keys(a, w, {"type", "name", "model", "order", "check_order", "expect"});
        const auto [name, spec] = model_ref(a, w);
        const int N = get_order(a, w, 4);
        const int check = get<int>(a, "check_order", w, N);
        if (check < 1 || check > N) fail(w + ".check_order", "must lie in [1, order]");
        const auto expect = get<std::string>(a, "expect", w, "");
        if (!expect.empty() && expect != "nondegenerate" && expect != "degenerate")
            fail(w + ".expect", "expected nondegenerate|degenerate");
        return [=] {
            const auto r = normalize_spec(spec, N);
            const auto rep = russmann_rank(r, check);
            const int d = spec.omega.dof();
            ActionOutput out;
            json j{{"model", name}, {"order", N}, {"check_order", check}, {"dof", d}, {"rank", rep.rank},
                   {"verdict", rep.conclusive() ? "nondegenerate" : "degenerate_at_order"}};
            if (rep.witness) {
                json wv = json::array();
                for (const auto &x : *rep.witness) wv.push_back(T::render(x));
                j["witness"] = std::move(wv);
            }
            out.files.push_back({"russmann.json", "json", dump(j)});
            out.summary["rank"] = rep.rank;
            if (!expect.empty()) {
                out.verdicts.push_back(expect == "nondegenerate" ? make_verdict("gradient rank", rep.rank, ">=", d)
                                                                 : make_verdict("gradient rank", rep.rank, "<", d));
                out.files.push_back(table_report("russmann", json{{"model", name}, {"check_order", check}},
                                                 json{{"verdict", expect}}, j, out.verdicts));
                out.summary["pass"] = out.verdicts.front().pass;
            }
            return out;
        };
    }

    FrequencyVector<S> omega_param(const json &p, const std::string &w) const
    {
        if (!p.contains("omega")) fail(w, "missing 'omega'");
        try {
            return omega_from_json<S>(p.at("omega"), w + ".omega");
        } catch (const ConfigError &e) {
            fail(e.where(), e.what());
        }
    }

    R real_param(const json &p, const char *key, const std::string &w) const
    {
        if (!p.contains(key)) fail(w + "." + key, "missing");
        try {
            return real_from_json<S>(p.at(key), w + "." + key);
        } catch (const ConfigError &e) {
            fail(e.where(), "not a number on this backend");
        }
    }

    /// [{"u": [...], "v": [...], "c": value or {"re", "im"}}], with conjugate
    /// partners added unless "conjugates" is false.
    Series<S> series_param(const json &p, const char *key, const std::string &w, int d) const
    {
        const std::string wk = w + "." + key;
        if (!p.contains(key)) fail(wk, "missing");
        const json &terms = p.at(key).is_object() ? p.at(key).value("terms", json()) : p.at(key);
        const bool conj = p.at(key).is_object() ? p.at(key).value("conjugates", true) : true;
        if (!terms.is_array() || terms.empty()) fail(wk, "expected a non-empty term list");
        std::vector<std::pair<Monomial, S>> list;
        int top = 2;
        for (std::size_t i = 0; i < terms.size(); ++i) {
            const std::string wi = wk + "[" + std::to_string(i) + "]";
            const json &t = terms[i];
            check_keys(t, wi, {"u", "v", "c"});
            const auto u = get<std::vector<int>>(t, "u", wi, {});
            const auto v = get<std::vector<int>>(t, "v", wi, {});
            if (static_cast<int>(u.size()) != d || static_cast<int>(v.size()) != d)
                fail(wi, "u and v need " + std::to_string(d) + " exponents");
            if (std::any_of(u.begin(), u.end(), [](int e) { return e < 0; }) ||
                std::any_of(v.begin(), v.end(), [](int e) { return e < 0; }))
                fail(wi, "negative exponent");
            S c;
            try {
                const json &cj = t.contains("c") ? t.at("c") : json(1);
                c = cj.is_object() ? scalar_from_json<S>(cj) : make_real<S>(real_from_json<S>(cj, wi + ".c"));
            } catch (const std::exception &) {
                fail(wi + ".c", "not a number on this backend");
            }
            const Monomial m(u, v);
            top = std::max(top, m.degree());
            list.emplace_back(m, c);
        }
        Series<S> s(d, top);
        for (const auto &[m, c] : list) {
            s.add_term(m, c);
            if (conj && !m.is_action()) s.add_term(m.conjugate(), c.conj());
        }
        if (conj) s.set_reality_flag_unchecked(s.is_conjugate_symmetric());
        return s;
    }

    std::function<ActionOutput()> plan_experiment(const json &a, const std::string &w)
    {
        check_keys(a, w, {"type", "name", "kind", "model", "params"});
        const auto kind = get<std::string>(a, "kind", w, "");
        const json params = a.value("params", json::object());
        const std::string wp = w + ".params";
        if (!params.is_object()) fail(wp, "expected an object");
        if (kind == "delta") return plan_delta(params, wp);
        if (kind == "resonant-escape") return plan_resonant(params, wp);
        if (kind == "rotating-frame") return plan_rotating(params, wp);
        if (kind == "coupled-escape") return plan_coupled(a, params, w);
        if (kind.empty()) fail(w + ".kind", "missing");
        fail(w + ".kind", "unknown experiment '" + kind + "' (expected delta|resonant-escape|rotating-frame|coupled-escape)");
    }

    static void check_saddle(const json &p, const std::string &w, long long k, long long l, int n)
    {
        if (k < 1 || l < 1 || k + l < 3) fail(w, "needs k, l >= 1 and k + l > 2");
        if (n < 1) fail(w + ".n", "must be >= 1");
        (void)p;
    }

    std::function<ActionOutput()> plan_delta(const json &p, const std::string &w)
    {
        check_keys(p, w, {"k", "l", "n", "escape_rel_tol", "deviation_tol", "integrator"});
        const auto k = get<long long>(p, "k", w, 1), l = get<long long>(p, "l", w, 2);
        const int n = get<int>(p, "n", w, 1);
        check_saddle(p, w, k, l, n);
        DeltaOptions opts;
        opts.integrator = integrator_from_json(p, w);
        opts.escape_rel_tol = get_positive(p, "escape_rel_tol", w, opts.escape_rel_tol);
        opts.deviation_tol = get_positive(p, "deviation_tol", w, opts.deviation_tol);
        return [=] {
            const auto run = delta_experiment(k, l, n, opts);
            ActionOutput out;
            add_run_files(out, run);
            out.files.push_back({"radius.gp", "plot-script", delta_plot_script(delta_line(k, l), n, "trajectory.csv")});
            return out;
        };
    }

    std::function<ActionOutput()> plan_resonant(const json &p, const std::string &w)
    {
        check_keys(p, w, {"omega", "k", "l", "a", "n", "escape_rel_tol", "norm_rel_tol", "norm_samples", "integrator"});
        const auto omega = omega_param(p, w);
        const auto k = get<long long>(p, "k", w, 1), l = get<long long>(p, "l", w, 2);
        const int n = get<int>(p, "n", w, 1);
        check_saddle(p, w, k, l, n);
        const R a = real_param(p, "a", w);
        if (a == 0) fail(w + ".a", "must be nonzero");
        if (omega.dof() < 2) fail(w + ".omega", "needs at least two frequencies");
        if ((omega[0] > 0) == (omega[1] > 0)) fail(w + ".omega", "omega1 and omega2 must have opposite signs");
        const IntVector rel = detail::relation_vector(omega, k, l);
        if (!omega.in_lattice(rel)) fail(w + ".omega.lattice", "relation (k, l) is not in the declared lattice");
        if (omega.dot(rel) != 0) fail(w + ".omega", "declared relation does not hold exactly");
        ResonantEscapeOptions opts;
        opts.integrator = integrator_from_json(p, w);
        opts.escape_rel_tol = get_positive(p, "escape_rel_tol", w, opts.escape_rel_tol);
        opts.norm_rel_tol = get_positive(p, "norm_rel_tol", w, opts.norm_rel_tol);
        opts.norm_samples = get<int>(p, "norm_samples", w, opts.norm_samples);
        if (opts.norm_samples < 1) fail(w + ".norm_samples", "must be >= 1");
        return [=] {
            ActionOutput out;
            add_run_files(out, resonant_escape(omega, k, l, a, n, opts));
            return out;
        };
    }

    std::function<ActionOutput()> plan_rotating(const json &p, const std::string &w)
    {
        check_keys(p, w, {"omega", "F", "G", "a", "z0", "T", "c", "ball", "slope", "slope_tol", "integrator"});
        const auto omega = omega_param(p, w);
        const int d = omega.dof();
        const auto F = series_param(p, "F", w, d);
        const auto G = series_param(p, "G", w, d);
        std::vector<R> as;
        if (!p.contains("a")) fail(w + ".a", "missing");
        const json aj = p.at("a").is_array() ? p.at("a") : json::array({p.at("a")});
        for (std::size_t i = 0; i < aj.size(); ++i) {
            json one{{"a", aj[i]}};
            as.push_back(real_param(one, "a", w + ".a[" + std::to_string(i) + "]"));
            if (as.back() == 0) fail(w + ".a[" + std::to_string(i) + "]", "must be nonzero");
        }
        const auto z0 = get<std::vector<double>>(p, "z0", w, {});
        if (static_cast<int>(z0.size()) != 2 * d) fail(w + ".z0", "needs " + std::to_string(2 * d) + " real coordinates");
        const double T_end = get_positive(p, "T", w, 10.0);
        RotatingFrameOptions opts;
        opts.integrator = integrator_from_json(p, w);
        if (p.contains("c")) opts.c = get_positive(p, "c", w, 1.0);
        opts.ball = get_positive(p, "ball", w, opts.ball);
        const double slope = get<double>(p, "slope", w, 2.0);
        const double slope_tol = get_positive(p, "slope_tol", w, 0.1);
        return [=] {
            ActionOutput out;
            const int top = std::max(F.order(), G.order());
            const auto quad = Series<S>::quadratic(top, omega);
            std::vector<ExperimentReport> reports;
            json runs = json::array();
            for (std::size_t i = 0; i < as.size(); ++i) {
                const S ac = make_real<S>(as[i]);
                const auto big = add(quad, scale(F, ac, top), top);
                const auto small = add(big, scale(G, ac * ac, top), top);
                const auto run = rotating_frame_compare(big, small, omega, as[i], z0, T_end, opts);
                json r = run.report.to_json();
                runs.push_back(r);
                reports.push_back(run.report);
                for (const auto &[name, tr] : run.trajectories)
                    out.files.push_back({"run" + std::to_string(i + 1) + "-" + name + ".csv", "csv", trajectory_csv(tr)});
                for (const auto &v : run.report.verdicts) {
                    auto copy = v;
                    copy.name = "run " + std::to_string(i + 1) + ": " + v.name;
                    out.verdicts.push_back(copy);
                }
            }
            json report;
            if (reports.size() >= 2) {
                const auto scaling = gronwall_scaling(reports, slope, slope_tol);
                report = scaling.to_json();
                out.verdicts.insert(out.verdicts.end(), scaling.verdicts.begin(), scaling.verdicts.end());
            } else {
                report = reports.front().to_json();
            }
            report["runs"] = std::move(runs);
            report["all_verdicts"] = verdicts_json(out.verdicts);
            out.files.insert(out.files.begin(), {"report.json", "json", dump(report)});
            out.summary["pass"] = std::all_of(out.verdicts.begin(), out.verdicts.end(), [](const Verdict &v) { return v.pass; });
            return out;
        };
    }

    std::function<ActionOutput()> plan_coupled(const json &a, const json &p, const std::string &w)
    {
        const std::string wp = w + ".params";
        check_keys(p, wp, {"n", "phase", "pole_order", "control", "integrator"});
        const auto [name, spec] = model_ref(a, w);
        const int n = get<int>(p, "n", wp, 1);
        CoupledEscapeOptions opts;
        opts.integrator = integrator_from_json(p, wp);
        opts.phase = get<double>(p, "phase", wp, 0.0);
        opts.pole_order = get<int>(p, "pole_order", wp, 0);
        opts.control = get<bool>(p, "control", wp, true);
        if (opts.pole_order < 0) fail(wp + ".pole_order", "must be >= 0");
        std::shared_ptr<detail::CoupledSetup> setup;
        try {
            setup = std::make_shared<detail::CoupledSetup>(coupled_setup(spec, n, opts.pole_order));
        } catch (const std::exception &e) {
            fail(w + ".model", e.what());
        }
        const auto profile = spec.seq.profile;
        return [=] {
            auto run = detail::coupled_escape_impl(*setup, opts);
            run.report.inputs["model"] = name;
            run.report.inputs["scale_profile"] = scale_profile_to_json(profile);
            ActionOutput out;
            add_run_files(out, run);
            return out;
        };
    }

    const json &cfg_;
    std::uint64_t seed_;
    std::map<std::string, ModelSpec<S>> models_;
};

struct Plan {
    std::vector<Prepared> actions;
    std::set<std::string> formats;
    fs::path out_dir;
    json settings;
};

bool writable_target(const fs::path &dir)
{
    fs::path p = fs::absolute(dir);
    while (!p.empty() && !fs::exists(p)) {
        if (p == p.parent_path()) return false;
        p = p.parent_path();
    }
    return fs::is_directory(p) && ::access(p.c_str(), W_OK) == 0;
}

void apply_settings(json &cfg, const RunSettings &s)
{
    if (s.backend) cfg["backend"] = *s.backend;
    if (s.precision_bits) cfg["precision_bits"] = *s.precision_bits;
    if (s.seed) cfg["seed"] = *s.seed;
    if (s.order && cfg.contains("actions") && cfg["actions"].is_array())
        for (auto &a : cfg["actions"])
            if (a.is_object() && a.value("type", "") != "experiment" && a.value("type", "") != "sequence")
                a["order"] = *s.order;
}

template <class S>
void plan_actions(const json &cfg, Plan &plan)
{
    const auto seed = get<std::uint64_t>(cfg, "seed", "", 0);
    Planner<S> planner(cfg, seed);
    if (!cfg.contains("actions") || !cfg.at("actions").is_array() || cfg.at("actions").empty())
        fail("actions", "expected a non-empty list");
    const json &actions = cfg.at("actions");
    for (std::size_t i = 0; i < actions.size(); ++i) plan.actions.push_back(planner.plan(actions[i], static_cast<int>(i)));
    std::set<std::string> dirs;
    for (const auto &p : plan.actions)
        if (!dirs.insert(p.dir).second) fail("actions[" + std::to_string(p.index) + "].name", "duplicate action name");
}

Plan make_plan(json &cfg, const RunInput &input, const RunSettings &settings)
{
    if (!cfg.is_object()) fail("", "config must be a JSON object");
    check_keys(cfg, "", {"backend", "precision_bits", "seed", "output", "models", "actions", "description"});
    // check_keys reports ".key" for the root; strip the dot.
    Plan plan;
    const auto backend = get<std::string>(cfg, "backend", "backend", "exact");
    if (backend != "exact" && backend != "float") fail("backend", "expected exact|float");
    const auto bits = get<unsigned>(cfg, "precision_bits", "precision_bits", FloatPrecision::default_bits);
    if (backend == "float" && bits < FloatPrecision::minimum_bits)
        fail("precision_bits", "float backend needs at least " + std::to_string(FloatPrecision::minimum_bits) + " bits");
    plan.formats = {"json", "csv", "plot-script"};
    std::string out_name = input.stem;
    if (cfg.contains("output")) {
        const json &o = cfg.at("output");
        check_keys(o, "output", {"dir", "formats"});
        out_name = get<std::string>(o, "dir", "output", out_name);
        if (o.contains("formats")) {
            plan.formats.clear();
            for (const auto &f : o.at("formats")) {
                const auto s = f.is_string() ? f.get<std::string>() : std::string();
                if (s != "json" && s != "csv" && s != "plot-script") fail("output.formats", "unknown format '" + f.dump() + "'");
                plan.formats.insert(s);
            }
            if (plan.formats.count("plot-script") && !plan.formats.count("csv"))
                fail("output.formats", "plot-script reads the CSV trajectory; add csv");
        }
    }
    plan.out_dir = settings.out ? *settings.out : default_output_root() / out_name;
    if (!writable_target(plan.out_dir)) fail("output.dir", "'" + plan.out_dir.string() + "' is not writable");
    {
        PrecisionGuard guard(backend == "float" ? bits : FloatPrecision::bits());
        if (backend == "exact")
            plan_actions<ExactScalar>(cfg, plan);
        else
            plan_actions<FloatScalar>(cfg, plan);
    }
    plan.settings = json{{"backend", backend}, {"seed", get<std::uint64_t>(cfg, "seed", "seed", 0)}};
    if (backend == "float") plan.settings["precision_bits"] = bits;
    return plan;
}

std::string clean_where(std::string w)
{
    if (!w.empty() && w.front() == '.') w.erase(0, 1);
    return w;
}

} // namespace

RunInput load_run_config(const fs::path &path)
{
    return load_common(path);
}

RunInput load_model_file(const fs::path &path)
{
    RunInput in = load_common(path);
    json model = std::move(in.config);
    in.config = json{{"models", json{{"model", std::move(model)}}}};
    in.root_path = "models.model";
    return in;
}

RunResult run(const RunInput &input, const RunSettings &settings)
{
    json cfg = input.config;
    const std::string file = input.files.empty() ? std::string("<config>") : input.files.front().filename().string();

    if (settings.profile) {
        RunInput prof = load_common(*settings.profile);
        json p = prof.config.contains("scale_profile") ? prof.config.at("scale_profile") : prof.config;
        if (cfg.contains("models") && cfg["models"].is_object())
            for (auto &m : cfg["models"])
                if (m.is_object() && m.contains("sequence") && m["sequence"].is_object()) m["sequence"]["scale_profile"] = p;
    }
    apply_settings(cfg, settings);

    Plan plan;
    try {
        plan = make_plan(cfg, input, settings);
    } catch (const PlanError &e) {
        std::string where = clean_where(e.where);
        std::string local = where;
        if (!input.root_path.empty()) {
            if (local.rfind(input.root_path, 0) == 0)
                local = clean_where(local.substr(input.root_path.size()));
            else
                local = "\x01";
        }
        const auto line = local == "\x01" ? std::nullopt : locate_line(input.text, local);
        throw ValidationError(file, line, where, e.what);
    }

    RunResult result;
    result.out_dir = plan.out_dir;
    const std::string backend = plan.settings.at("backend");
    const unsigned bits = plan.settings.value("precision_bits", FloatPrecision::bits());
    PrecisionGuard guard(bits);

    std::vector<ActionOutput> outputs(plan.actions.size());
    std::vector<std::string> errors(plan.actions.size());
    auto exec = [&](std::size_t i) {
        try {
            outputs[i] = plan.actions[i].run();
        } catch (const std::exception &e) {
            errors[i] = e.what();
        }
    };
    if (settings.parallel) {
        std::vector<std::future<void>> jobs;
        for (std::size_t i = 0; i < plan.actions.size(); ++i) jobs.push_back(std::async(std::launch::async, exec, i));
        for (auto &j : jobs) j.get();
    } else {
        for (std::size_t i = 0; i < plan.actions.size(); ++i) exec(i);
    }

    fs::create_directories(plan.out_dir);
    json actions = json::array();
    bool any_error = false, any_fail = false;
    for (std::size_t i = 0; i < plan.actions.size(); ++i) {
        const auto &p = plan.actions[i];
        ActionOutcome oc;
        oc.index = p.index;
        oc.type = p.type;
        oc.dir = p.dir;
        oc.verdicts = outputs[i].verdicts;
        oc.summary = outputs[i].summary;
        json entry{{"index", p.index + 1}, {"type", p.type}, {"dir", p.dir}};
        if (!errors[i].empty()) {
            oc.status = "error";
            oc.error = errors[i];
            entry["error"] = errors[i];
            any_error = true;
        } else {
            const bool pass = std::all_of(oc.verdicts.begin(), oc.verdicts.end(), [](const Verdict &v) { return v.pass; });
            oc.status = oc.verdicts.empty() ? "done" : pass ? "pass" : "fail";
            any_fail = any_fail || !pass;
            for (const auto &f : outputs[i].files) {
                if (!plan.formats.count(f.format)) continue;
                const fs::path dir = plan.out_dir / p.dir;
                fs::create_directories(dir);
                std::ofstream(dir / f.name, std::ios::binary) << f.content;
                result.artifacts.push_back({p.dir + "/" + f.name, f.format, f.content.size(), sha256_hex(f.content)});
            }
            if (!oc.verdicts.empty()) entry["verdicts"] = verdicts_json(oc.verdicts);
            entry["summary"] = oc.summary;
        }
        entry["status"] = oc.status;
        actions.push_back(std::move(entry));
        result.actions.push_back(std::move(oc));
    }

    json inputs = json::array();
    for (std::size_t i = 0; i < input.files.size(); ++i) {
        const auto &f = input.files[i];
        const std::string name =
            i == 0 ? f.filename().string() : f.lexically_normal().lexically_relative(input.base_dir.lexically_normal()).generic_string();
        inputs.push_back(json{{"path", name}, {"sha256", sha256_hex(read_text(f))}});
    }
    if (settings.profile)
        inputs.push_back(json{{"path", settings.profile->filename().string()}, {"sha256", sha256_hex(read_text(*settings.profile))}});
    json artifacts = json::array();
    for (const auto &a : result.artifacts)
        artifacts.push_back(json{{"path", a.path}, {"format", a.format}, {"bytes", a.bytes}, {"sha256", a.sha256}});
    const std::string status = any_error ? "error" : any_fail ? "fail" : "pass";
    json manifest{{"tool", "birkhoff"},      {"settings", plan.settings}, {"inputs", inputs},
                  {"config_sha256", sha256_hex(cfg.dump())}, {"actions", actions}, {"artifacts", artifacts},
                  {"status", status}};
    std::ofstream(plan.out_dir / "manifest.json", std::ios::binary) << dump(manifest);
    (void)backend;
    result.exit_code = any_error || any_fail ? 1 : 0;
    return result;
}

} // namespace birkhoff::cli
