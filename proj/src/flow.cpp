#include "birkhoff/flow.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <boost/numeric/odeint.hpp>

namespace birkhoff {

namespace {

constexpr double sqrt2 = 1.41421356237309504880;
constexpr double two_pi = 6.28318530717958647692;

bool finite(const State &z)
{
    return std::all_of(z.begin(), z.end(), [](double v) { return std::isfinite(v); });
}

std::string fmt(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void Field::fill_powers(const State &z) const
{
    const auto stride = static_cast<std::size_t>(top_ + 1);
    powers_.assign(static_cast<std::size_t>(2 * d_) * stride, {1.0, 0.0});
    for (int j = 0; j < d_; ++j) {
        const std::complex<double> xi(z[static_cast<std::size_t>(2 * j)] / sqrt2, z[static_cast<std::size_t>(2 * j + 1)] / sqrt2);
        const std::complex<double> eta = std::conj(xi);
        for (std::size_t e = 1; e < stride; ++e) {
            powers_[static_cast<std::size_t>(j) * stride + e] = powers_[static_cast<std::size_t>(j) * stride + e - 1] * xi;
            powers_[static_cast<std::size_t>(d_ + j) * stride + e] =
                powers_[static_cast<std::size_t>(d_ + j) * stride + e - 1] * eta;
        }
    }
}

void Field::operator()(const State &z, State &dz, double) const
{
    if (static_cast<int>(z.size()) != 2 * d_) throw FlowError("state has wrong dimension for the field");
    fill_powers(z);
    const auto stride = static_cast<std::size_t>(top_ + 1);
    auto pw = [&](int slot, int e) { return powers_[static_cast<std::size_t>(slot) * stride + static_cast<std::size_t>(e)]; };
    deta_.assign(static_cast<std::size_t>(d_), {0.0, 0.0});
    for (const auto &t : terms_) {
        for (std::size_t f = 0; f < t.factors.size(); ++f) {
            const auto &fac = t.factors[f];
            if (fac.slot < d_) continue;
            std::complex<double> acc = t.c * static_cast<double>(fac.power) * pw(fac.slot, fac.power - 1);
            for (std::size_t g = 0; g < t.factors.size(); ++g)
                if (g != f) acc *= pw(t.factors[g].slot, t.factors[g].power);
            deta_[static_cast<std::size_t>(fac.slot - d_)] += acc;
        }
    }
    dz.resize(z.size());
    // xi' = -i dH/deta, x' = sqrt2 Re xi', y' = sqrt2 Im xi'
    for (int j = 0; j < d_; ++j) {
        const auto &D = deta_[static_cast<std::size_t>(j)];
        dz[static_cast<std::size_t>(2 * j)] = sqrt2 * D.imag();
        dz[static_cast<std::size_t>(2 * j + 1)] = -sqrt2 * D.real();
    }
}

double Field::energy(const State &z) const
{
    fill_powers(z);
    const auto stride = static_cast<std::size_t>(top_ + 1);
    std::complex<double> acc{0.0, 0.0};
    for (const auto &t : terms_) {
        std::complex<double> v = t.c;
        for (const auto &fac : t.factors) v *= powers_[static_cast<std::size_t>(fac.slot) * stride + static_cast<std::size_t>(fac.power)];
        acc += v;
    }
    return acc.real();
}

std::vector<double> actions(const State &z)
{
    std::vector<double> out(z.size() / 2);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = 0.5 * (z[2 * j] * z[2 * j] + z[2 * j + 1] * z[2 * j + 1]);
    return out;
}

double euclidean_norm(const State &z)
{
    return std::sqrt(std::inner_product(z.begin(), z.end(), z.begin(), 0.0));
}

std::string to_string(Method m) { return m == Method::rkf78 ? "rkf78" : "implicit-midpoint"; }

Method method_from_string(const std::string &s)
{
    if (s == "rkf78") return Method::rkf78;
    if (s == "implicit-midpoint") return Method::implicit_midpoint;
    throw std::invalid_argument("unknown integrator '" + s + "' (expected rkf78|implicit-midpoint)");
}

double Trajectory::max_energy_drift() const
{
    double m = 0;
    for (double e : energy) m = std::max(m, std::fabs(e - energy.front()));
    return m;
}

double Trajectory::max_action_drift(int j) const
{
    double m = 0;
    const auto js = static_cast<std::size_t>(j);
    for (const auto &a : actions) m = std::max(m, std::fabs(a[js] - actions.front()[js]));
    return m;
}

namespace {

// One implicit midpoint step by fixed-point iteration; false if it fails to converge.
bool midpoint_step(const Field &f, const State &z, double h, State &out)
{
    State k, mid(z.size()), knew;
    f(z, k);
    for (int it = 0; it < 100; ++it) {
        for (std::size_t i = 0; i < z.size(); ++i) mid[i] = z[i] + 0.5 * h * k[i];
        f(mid, knew);
        double diff = 0, scale = 1;
        for (std::size_t i = 0; i < z.size(); ++i) {
            diff = std::max(diff, std::fabs(knew[i] - k[i]));
            scale = std::max(scale, std::fabs(knew[i]));
        }
        k.swap(knew);
        if (!finite(k)) return false;
        if (diff <= 1e-15 * scale) {
            out.resize(z.size());
            for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] + h * k[i];
            return true;
        }
    }
    return false;
}

} // namespace

Trajectory integrate(const Field &field, const State &z0, const IntegrateOptions &opts)
{
    namespace odeint = boost::numeric::odeint;
    if (static_cast<int>(z0.size()) != 2 * field.dof())
        throw FlowError("initial state has " + std::to_string(z0.size()) + " entries, expected " +
                        std::to_string(2 * field.dof()));
    if (!finite(z0)) throw FlowError("initial state is not finite");
    if (opts.t_end == 0) throw FlowError("integration span is empty");
    if (!(opts.abs_tol > 0) || !(opts.rel_tol > 0)) throw FlowError("tolerances must be positive");
    const double dir = opts.t_end > 0 ? 1.0 : -1.0;
    const auto radius = opts.radius ? opts.radius : std::function<double(const State &)>(euclidean_norm);

    Trajectory tr;
    tr.model_id = opts.model_id;
    tr.dof = field.dof();
    tr.method = opts.method;
    tr.tol = opts.rel_tol;
    auto record = [&](double t, const State &z) {
        tr.t.push_back(t);
        tr.z.push_back(z);
        tr.energy.push_back(field.energy(z));
        tr.actions.push_back(actions(z));
    };
    record(0.0, z0);
    if (opts.escape_radius && radius(z0) >= *opts.escape_radius) {
        tr.escaped = true;
        tr.escape_time = 0;
        return tr;
    }

    auto sys = [&field](const State &x, State &dx, double t) { field(x, dx, t); };
    using stepper_t = odeint::runge_kutta_fehlberg78<State>;
    auto controlled = odeint::make_controlled(opts.abs_tol, opts.rel_tol, stepper_t());
    auto single_step = [&](const State &in, double t, double h, State &out) {
        if (opts.method == Method::rkf78) {
            out.resize(in.size());
            controlled.stepper().do_step(sys, in, t, out, h);
            return finite(out);
        }
        return midpoint_step(field, in, h, out);
    };

    State z = z0, trial;
    double t = 0;
    double dt = dir * (opts.method == Method::rkf78 ? opts.initial_step : opts.fixed_step);
    std::size_t sample_index = 1;
    auto next_sample = [&] { return dir * opts.sample_interval * static_cast<double>(sample_index); };
    bool last_recorded = true;

    while (dir * (opts.t_end - t) > 0) {
        if (tr.stats.accepted + tr.stats.rejected >= opts.max_steps)
            throw FlowError("step limit " + std::to_string(opts.max_steps) + " reached at t = " + fmt(t));
        double h = dt;
        bool to_end = false, to_sample = false;
        if (dir * (t + h - opts.t_end) >= 0) {
            h = opts.t_end - t;
            to_end = true;
        }
        if (opts.sample_interval > 0 && dir * (t + h - next_sample()) >= 0) {
            h = next_sample() - t;
            to_sample = true;
            to_end = false;
        }
        const bool clamped = to_end || to_sample;
        trial = z;
        double t_trial = t;
        bool ok = false;
        if (opts.method == Method::rkf78) {
            double h_try = h;
            ok = controlled.try_step(sys, trial, t_trial, h_try) == odeint::success && finite(trial);
            if (!ok) {
                dt = std::isfinite(h_try) && std::fabs(h_try) < std::fabs(h) ? h_try : 0.5 * h;
            } else if (!clamped) {
                dt = h_try;
            }
        } else {
            ok = midpoint_step(field, z, h, trial);
            t_trial = t + h;
            if (!ok) dt = 0.5 * h;
        }
        if (!ok) {
            ++tr.stats.rejected;
            if (std::fabs(dt) < opts.min_step * std::max(1.0, std::fabs(t))) {
                State probe;
                field(z, probe);
                if (!finite(probe)) throw FlowError("vector field is not finite at t = " + fmt(t));
                tr.blow_up = true;
                break;
            }
            continue;
        }
        ++tr.stats.accepted;
        if (!clamped && std::fabs(h) < opts.min_step * std::max(1.0, std::fabs(t))) {
            tr.blow_up = true;
            break;
        }
        tr.stats.min_step = std::min(tr.stats.min_step, std::fabs(h));
        tr.stats.max_step = std::max(tr.stats.max_step, std::fabs(h));
        const bool at_sample = to_sample;
        if (to_sample) t_trial = next_sample();
        if (to_end) t_trial = opts.t_end;

        if (opts.escape_radius && radius(trial) >= *opts.escape_radius) {
            double lo = 0, hi = t_trial - t;
            State probe;
            while (std::fabs(hi - lo) > opts.escape_time_tol) {
                const double mid = 0.5 * (lo + hi);
                if (!single_step(z, t, mid, probe)) throw FlowError("escape refinement produced a non-finite state");
                (radius(probe) >= *opts.escape_radius ? hi : lo) = mid;
            }
            if (!single_step(z, t, hi, probe)) throw FlowError("escape refinement produced a non-finite state");
            tr.escaped = true;
            tr.escape_time = t + hi;
            record(t + hi, probe);
            return tr;
        }
        z.swap(trial);
        t = t_trial;
        last_recorded = false;
        if (opts.sample_interval <= 0 || at_sample) {
            record(t, z);
            last_recorded = true;
            if (at_sample) ++sample_index;
        }
        if (euclidean_norm(z) > opts.blowup_norm) {
            tr.blow_up = true;
            break;
        }
    }
    if (!last_recorded) record(t, z);
    return tr;
}

std::string trajectory_csv(const Trajectory &tr)
{
    std::ostringstream out;
    out << 't';
    for (int j = 1; j <= tr.dof; ++j) out << ",x" << j << ",y" << j;
    out << ",H";
    for (int j = 1; j <= tr.dof; ++j) out << ",I" << j;
    out << '\n';
    for (std::size_t i = 0; i < tr.t.size(); ++i) {
        out << fmt(tr.t[i]);
        for (double v : tr.z[i]) out << ',' << fmt(v);
        out << ',' << fmt(tr.energy[i]);
        for (double v : tr.actions[i]) out << ',' << fmt(v);
        out << '\n';
    }
    return out.str();
}

json number_json(double v)
{
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double number_from_json(const json &v)
{
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw std::invalid_argument("expected a number, got " + v.dump());
}

json trajectory_metadata(const Trajectory &tr)
{
    return json{{"model", tr.model_id},
                {"dof", tr.dof},
                {"method", to_string(tr.method)},
                {"tolerance", tr.tol},
                {"samples", tr.t.size()},
                {"accepted_steps", tr.stats.accepted},
                {"rejected_steps", tr.stats.rejected},
                {"min_step", number_json(tr.stats.min_step)},
                {"max_step", tr.stats.max_step},
                {"t_final", tr.t.back()},
                {"escaped", tr.escaped},
                {"escape_time", number_json(tr.escape_time)},
                {"blow_up", tr.blow_up},
                {"max_energy_drift", tr.max_energy_drift()}};
}

DeltaLine delta_line(long long k, long long l)
{
    if (k < 1 || l < 1 || k + l <= 2) throw ExperimentError("the invariant line needs k, l >= 1 and k + l > 2");
    DeltaLine dl;
    dl.k = k;
    dl.l = l;
    dl.u = std::sqrt(static_cast<double>(l) / static_cast<double>(k));
    dl.nu = 0.75 / static_cast<double>(k + l);
    return dl;
}

State DeltaLine::point(double r, int d) const
{
    State z(static_cast<std::size_t>(2 * d), 0.0);
    const double c = std::cos(two_pi * nu), s = std::sin(two_pi * nu);
    z[0] = sqrt2 * r * c;
    z[1] = sqrt2 * r * s;
    z[2] = sqrt2 * u * r * c;
    z[3] = sqrt2 * u * r * s;
    return z;
}

double DeltaLine::radius(const State &z) const
{
    const double q = 0.5 * (z[0] * z[0] + z[1] * z[1] + z[2] * z[2] + z[3] * z[3]);
    return std::sqrt(q / (1 + u * u));
}

double DeltaLine::deviation(const State &z) const
{
    const double c = std::cos(two_pi * nu), s = std::sin(two_pi * nu);
    const double norm = std::sqrt(1 + u * u);
    const double e[4] = {c / norm, s / norm, u * c / norm, u * s / norm};
    double p = 0;
    for (int i = 0; i < 4; ++i) p += z[static_cast<std::size_t>(i)] * e[i];
    double dev = 0;
    for (int i = 0; i < 4; ++i) {
        const double w = z[static_cast<std::size_t>(i)] - p * e[i];
        dev += w * w;
    }
    return std::sqrt(dev);
}

double DeltaLine::r_at(double t, double r0) const
{
    const double a1 = alpha() - 1;
    const double base = std::pow(r0, -a1) - a1 * speed() * t;
    if (base <= 0) return std::numeric_limits<double>::infinity();
    return std::pow(base, -1.0 / a1);
}

double DeltaLine::blowup_time(int n) const
{
    const double a1 = alpha() - 1;
    return std::pow(2.0 * n, a1) / (a1 * speed());
}

double DeltaLine::escape_time(int n) const
{
    const double a1 = alpha() - 1;
    return (std::pow(2.0 * n, a1) - std::pow(2.0 * n + 1, -a1)) / (a1 * speed());
}

Series<ExactScalar> saddle_series(int d, long long k, long long l)
{
    if (d < 2) throw DimensionError("F_{k,l} needs at least two degrees of freedom");
    Series<ExactScalar> f(d, static_cast<int>(k + l));
    std::vector<int> u(static_cast<std::size_t>(d), 0), zero(static_cast<std::size_t>(d), 0);
    u[0] = static_cast<int>(k);
    u[1] = static_cast<int>(l);
    const ExactScalar one = make_real<ExactScalar>(Rational(1));
    f.add_term(Monomial(u, zero), one);
    f.add_term(Monomial(zero, u), one);
    f.mark_real();
    return f;
}

bool evaluate_relation(double measured, const std::string &relation, double bound)
{
    if (relation == "<=") return measured <= bound;
    if (relation == "<") return measured < bound;
    if (relation == ">=") return measured >= bound;
    if (relation == ">") return measured > bound;
    if (relation == "==") return measured == bound;
    throw std::invalid_argument("unknown relation '" + relation + "'");
}

Verdict make_verdict(std::string name, double measured, const std::string &relation, double bound)
{
    Verdict v{std::move(name), measured, relation, bound, false};
    v.pass = evaluate_relation(measured, relation, bound);
    return v;
}

bool ExperimentReport::pass() const
{
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict &v) { return v.pass; });
}

std::vector<std::string> ExperimentReport::failing() const
{
    std::vector<std::string> out;
    for (const auto &v : verdicts)
        if (!v.pass) out.push_back(v.name);
    return out;
}

json ExperimentReport::to_json() const
{
    json vs = json::array();
    for (const auto &v : verdicts)
        vs.push_back(json{{"name", v.name},
                          {"measured", number_json(v.measured)},
                          {"relation", v.relation},
                          {"bound", number_json(v.bound)},
                          {"pass", v.pass}});
    return json{{"kind", kind}, {"inputs", inputs}, {"predicted", predicted}, {"measured", measured},
                {"verdicts", vs}, {"pass", pass()}};
}

bool recheck_report(const json &report)
{
    bool all = true;
    for (const auto &v : report.at("verdicts")) {
        const bool p = evaluate_relation(number_from_json(v.at("measured")), v.at("relation").get<std::string>(),
                                         number_from_json(v.at("bound")));
        if (p != v.at("pass").get<bool>()) return false;
        all = all && p;
    }
    return all == report.at("pass").get<bool>();
}

ExperimentRun delta_experiment(long long k, long long l, int n, const DeltaOptions &opts)
{
    if (n < 1) throw ExperimentError("delta_experiment needs n >= 1");
    const DeltaLine dl = delta_line(k, l);
    const Field f(saddle_series(2, k, l));
    const double r0 = 1.0 / (2.0 * n);
    const double r_esc = 2.0 * n + 1;
    IntegrateOptions io = opts.integrator;
    io.t_end = 1.5 * dl.blowup_time(n);
    io.escape_radius = r_esc;
    io.radius = [dl](const State &z) { return dl.radius(z); };
    io.model_id = "bare-saddle(" + std::to_string(k) + "," + std::to_string(l) + ")";
    const auto tr = integrate(f, dl.point(r0), io);

    double max_dev = 0;
    for (const auto &z : tr.z) max_dev = std::max(max_dev, dl.deviation(z) / dl.radius(z));
    const double predicted = dl.escape_time(n);
    const double measured = tr.escaped ? tr.escape_time : std::numeric_limits<double>::infinity();
    const double rel = std::fabs(measured - predicted) / predicted;
    const double t_bound = std::pow(2.0 * n, static_cast<double>(k + l - 2));
    // |F| on the line reaches 2 u^l r^{k+l} at the escape radius.
    const double h_scale = 2 * std::pow(dl.u, static_cast<double>(l)) * std::pow(r_esc, static_cast<double>(k + l));

    ExperimentRun run;
    auto &rep = run.report;
    rep.kind = "delta";
    rep.inputs = json{{"k", k}, {"l", l}, {"n", n}, {"r0", r0}, {"escape_radius", r_esc},
                      {"method", to_string(io.method)}, {"abs_tol", io.abs_tol}, {"rel_tol", io.rel_tol},
                      {"escape_rel_tol", opts.escape_rel_tol}, {"deviation_tol", opts.deviation_tol}};
    rep.predicted = json{{"u", dl.u}, {"alpha", dl.alpha()}, {"nu", dl.nu}, {"blowup_time", dl.blowup_time(n)},
                         {"escape_time", predicted}, {"t_bound", t_bound}};
    rep.measured = json{{"escape_time", number_json(measured)},
                        {"escape_rel_error", number_json(rel)},
                        {"max_rel_deviation", max_dev},
                        {"energy_drift", tr.max_energy_drift()},
                        {"trajectory", trajectory_metadata(tr)}};
    rep.verdicts.push_back(make_verdict("escaped", tr.escaped ? 1 : 0, "==", 1));
    rep.verdicts.push_back(make_verdict("escape time relative error", rel, "<=", opts.escape_rel_tol));
    rep.verdicts.push_back(make_verdict("t_n <= (2n)^{k+l-2}", measured, "<=", t_bound));
    rep.verdicts.push_back(make_verdict("transverse deviation / r", max_dev, "<=", opts.deviation_tol));
    rep.verdicts.push_back(
        make_verdict("energy drift", tr.max_energy_drift(), "<=", 10 * io.rel_tol * (1 + h_scale)));
    run.trajectories.emplace_back("trajectory", tr);
    return run;
}

std::string delta_plot_script(const DeltaLine &line, int n, const std::string &csv)
{
    std::ostringstream out;
    out << "set datafile separator ','\n"
        << "set xlabel 't'\nset ylabel 'r'\nset logscale y\n"
        << "u = " << fmt(line.u) << "\n"
        << "alpha = " << line.alpha() << "\n"
        << "speed = " << fmt(line.speed()) << "\n"
        << "r0 = " << fmt(1.0 / (2.0 * n)) << "\n"
        << "r(t) = (r0**(1 - alpha) - (alpha - 1)*speed*t)**(-1.0/(alpha - 1))\n"
        << "plot '" << csv << "' every ::1 using 1:(sqrt(($2**2 + $3**2 + $4**2 + $5**2)/(2*(1 + u**2)))) "
        << "with points title 'measured', r(x) with lines title 'closed form'\n";
    return out.str();
}

namespace detail {

ExperimentRun resonant_escape_impl(const Field &full, const Field &saddle, const std::vector<double> &omega,
                                   long long k, long long l, double a, int n, const ResonantEscapeOptions &opts)
{
    DeltaLine dl = delta_line(k, l);
    // for a < 0 the flow of aF runs F backwards; the line with k nu + l nu' = 1/4 escapes instead
    if (a < 0) dl.nu = 0.25 / static_cast<double>(k + l);
    const int d = full.dof();
    const double r0 = 1.0 / (2.0 * n);
    const double r_esc = 2.0 * n + 1;
    const double predicted = dl.escape_time(n) / std::fabs(a);
    IntegrateOptions io = opts.integrator;
    io.t_end = 1.5 * dl.blowup_time(n) / std::fabs(a);
    io.escape_radius = r_esc;
    io.radius = [dl](const State &z) { return dl.radius(z); };
    if (io.sample_interval <= 0) io.sample_interval = predicted / opts.norm_samples;
    const State z0 = dl.point(r0, d);
    io.model_id = "H_omega + a F";
    const auto th = integrate(full, z0, io);
    io.model_id = "a F";
    const auto tf = integrate(saddle, z0, io);

    double norm_dev = 0;
    for (std::size_t i = 0; i < std::min(th.t.size(), tf.t.size()); ++i) {
        if (th.t[i] != tf.t[i]) break;
        const double nf = euclidean_norm(tf.z[i]);
        norm_dev = std::max(norm_dev, std::fabs(euclidean_norm(th.z[i]) - nf) / nf);
    }
    const double measured = th.escaped ? th.escape_time : std::numeric_limits<double>::infinity();
    const double rel = std::fabs(measured - predicted) / predicted;

    ExperimentRun run;
    auto &rep = run.report;
    rep.kind = "resonant-escape";
    rep.inputs = json{{"omega", omega}, {"k", k}, {"l", l}, {"a", a}, {"n", n}, {"r0", r0}, {"escape_radius", r_esc},
                      {"method", to_string(io.method)}, {"rel_tol", io.rel_tol},
                      {"escape_rel_tol", opts.escape_rel_tol}, {"norm_rel_tol", opts.norm_rel_tol}};
    rep.predicted = json{{"t_n", dl.escape_time(n)}, {"escape_time", predicted}};
    rep.measured = json{{"escape_time", number_json(measured)},
                        {"escape_time_aF", number_json(tf.escaped ? tf.escape_time : std::numeric_limits<double>::infinity())},
                        {"escape_rel_error", number_json(rel)},
                        {"norm_identity_rel", norm_dev},
                        {"trajectory", trajectory_metadata(th)}};
    rep.verdicts.push_back(make_verdict("escaped", th.escaped ? 1 : 0, "==", 1));
    rep.verdicts.push_back(make_verdict("escape time = t_n / a (relative)", rel, "<=", opts.escape_rel_tol));
    rep.verdicts.push_back(make_verdict("norm identity |Phi_H| vs |Phi_aF| (relative)", norm_dev, "<=", opts.norm_rel_tol));
    run.trajectories.emplace_back("trajectory", th);
    run.trajectories.emplace_back("trajectory_aF", tf);
    return run;
}

namespace {

double gronwall_bound(double c, double a, double A, double T)
{
    return c * a * a * A * T * std::exp(c * a * A * T);
}

// Smallest C with C a^2 A T e^{C a A T} >= sup.
double fit_constant(double sup, double a, double A, double T)
{
    if (sup <= 0) return 0;
    if (!(A > 0)) return std::numeric_limits<double>::infinity();
    double lo = 0, hi = 1;
    while (gronwall_bound(hi, a, A, T) < sup) {
        lo = hi;
        hi *= 2;
        if (hi > 1e300) return std::numeric_limits<double>::infinity();
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (gronwall_bound(mid, a, A, T) >= sup ? hi : lo) = mid;
    }
    return hi;
}

double jacobian_norm(const Field &f, const State &z)
{
    const double h = 1e-6;
    State zp = z, zm = z, fp, fm;
    double acc = 0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        zp[i] = z[i] + h;
        zm[i] = z[i] - h;
        f(zp, fp);
        f(zm, fm);
        for (std::size_t r = 0; r < z.size(); ++r) {
            const double dij = (fp[r] - fm[r]) / (2 * h);
            acc += dij * dij;
        }
        zp[i] = zm[i] = z[i];
    }
    return std::sqrt(acc);
}

} // namespace

ExperimentRun rotating_frame_impl(const GronwallInput &in, const State &z0, double T, std::optional<double> c,
                                  double ball, const IntegrateOptions &opts)
{
    if (!(T > 0)) throw ExperimentError("rotating_frame_compare needs T > 0");
    IntegrateOptions io = opts;
    io.t_end = T;
    io.escape_radius = ball;
    io.radius = {};
    if (io.sample_interval <= 0) io.sample_interval = T / 500;
    io.model_id = "H";
    const auto tH = integrate(in.h_big, z0, io);
    io.model_id = "h";
    const auto th = integrate(in.h_small, z0, io);
    const bool partial = tH.escaped || th.escaped || tH.blow_up || th.blow_up;

    double sup = 0, A = 0;
    State xg;
    const std::size_t m = std::min(tH.t.size(), th.t.size());
    for (std::size_t i = 0; i < m; ++i) {
        if (tH.t[i] != th.t[i]) break;
        const double s = tH.t[i];
        double acc = 0;
        for (std::size_t j = 0; j < in.omega.size(); ++j) {
            // e^{sU}: undo the rotation of plane j by the linear flow
            const double ang = in.omega[j] * s, cs = std::cos(ang), sn = std::sin(ang);
            const double dx = th.z[i][2 * j] - tH.z[i][2 * j], dy = th.z[i][2 * j + 1] - tH.z[i][2 * j + 1];
            const double rx = cs * dx - sn * dy, ry = sn * dx + cs * dy;
            acc += rx * rx + ry * ry;
        }
        sup = std::max(sup, std::sqrt(acc));
        for (const State *z : {&tH.z[i], &th.z[i]}) {
            in.g_part(*z, xg);
            A = std::max({A, euclidean_norm(xg), jacobian_norm(in.f_part, *z)});
        }
    }
    const double c_star = fit_constant(sup, in.a, A, T);

    ExperimentRun run;
    auto &rep = run.report;
    rep.kind = "rotating-frame";
    rep.inputs = json{{"a", in.a}, {"T", T}, {"omega", in.omega}, {"z0", z0}, {"ball", ball},
                      {"method", to_string(io.method)}, {"rel_tol", io.rel_tol}};
    if (c) rep.inputs["C"] = *c;
    rep.measured = json{{"sup_xi", sup}, {"A", A}, {"C_star", number_json(c_star)}, {"partial_interval", partial},
                        {"samples", m}};
    rep.predicted = json{{"bound_at_C_star", number_json(gronwall_bound(c_star, in.a, A, T))}};
    rep.verdicts.push_back(make_verdict("flows stay in the ball", partial ? 1 : 0, "==", 0));
    rep.verdicts.push_back(make_verdict("sup|xi| <= C* a^2 A T e^{C* a A T}", sup, "<=",
                                        gronwall_bound(c_star, in.a, A, T) * (1 + 1e-12)));
    if (c) {
        rep.predicted["bound_at_C"] = gronwall_bound(*c, in.a, A, T);
        rep.verdicts.push_back(make_verdict("sup|xi| <= C a^2 A T e^{C a A T}", sup, "<=", gronwall_bound(*c, in.a, A, T)));
    }
    run.trajectories.emplace_back("trajectory_H", tH);
    run.trajectories.emplace_back("trajectory_h", th);
    return run;
}

} // namespace detail

ExperimentReport gronwall_scaling(const std::vector<ExperimentReport> &runs, double slope, double slope_tol)
{
    if (runs.size() < 2) throw ExperimentError("gronwall_scaling needs at least two runs");
    std::vector<double> la, ls;
    double c_fit = 0;
    for (const auto &r : runs) {
        const double a = r.inputs.at("a").get<double>();
        const double sup = r.measured.at("sup_xi").get<double>();
        if (!(sup > 0)) throw ExperimentError("gronwall_scaling: a run has zero deviation; the slope is undefined");
        la.push_back(std::log(std::fabs(a)));
        ls.push_back(std::log(sup));
        c_fit = std::max(c_fit, number_from_json(r.measured.at("C_star")));
    }
    const double n = static_cast<double>(la.size());
    const double mx = std::accumulate(la.begin(), la.end(), 0.0) / n;
    const double my = std::accumulate(ls.begin(), ls.end(), 0.0) / n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < la.size(); ++i) {
        sxy += (la[i] - mx) * (ls[i] - my);
        sxx += (la[i] - mx) * (la[i] - mx);
    }
    const double fitted = sxy / sxx;

    ExperimentReport rep;
    rep.kind = "gronwall-scaling";
    json as = json::array(), sups = json::array();
    for (const auto &r : runs) {
        as.push_back(r.inputs.at("a"));
        sups.push_back(r.measured.at("sup_xi"));
    }
    rep.inputs = json{{"a", as}, {"expected_slope", slope}, {"slope_tol", slope_tol}};
    rep.measured = json{{"sup_xi", sups}, {"slope", fitted}, {"C_fit", c_fit}};
    rep.verdicts.push_back(make_verdict("|slope - 2|", std::fabs(fitted - slope), "<=", slope_tol));
    for (const auto &r : runs) {
        const double a = r.inputs.at("a").get<double>();
        const double A = r.measured.at("A").get<double>();
        const double T = r.inputs.at("T").get<double>();
        rep.verdicts.push_back(make_verdict("a = " + fmt(a) + ": sup|xi| <= bound at common C*",
                                            r.measured.at("sup_xi").get<double>(), "<=",
                                            detail::gronwall_bound(c_fit, a, A, T) * (1 + 1e-12)));
    }
    return rep;
}

namespace detail {

State coupled_start_point(const CoupledSetup &s, double phase, const IntegrateOptions &opts, State *line_point)
{
    const DeltaLine dl = delta_line(s.k, s.l);
    State w = dl.point(1.0 / (2.0 * s.n), s.d);
    const double rho = std::sqrt(2 * s.action_level);
    w[4] = rho * std::cos(phase);
    w[5] = rho * std::sin(phase);
    if (s.i4) w[6] = std::sqrt(2 * *s.i4);
    if (line_point) *line_point = w;
    if (!s.has_chi_hat) return w;
    // the normal form is H o Phi_chi, so its orbits map to orbits of H under Phi^1_chi
    IntegrateOptions io = opts;
    io.t_end = 1.0;
    io.escape_radius.reset();
    io.sample_interval = 1.0;
    io.model_id = "chi-hat";
    return integrate(s.chi_hat, w, io).final_state();
}

ExperimentRun coupled_escape_impl(const CoupledSetup &s, const CoupledEscapeOptions &opts)
{
    const DeltaLine dl = delta_line(s.k, s.l);
    State w;
    const State z = coupled_start_point(s, opts.phase, opts.integrator, &w);
    State diff(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) diff[i] = z[i] - w[i];
    const double correction = euclidean_norm(diff);
    const double t_n = dl.escape_time(s.n);
    const double predicted = t_n / s.coupling;
    const double r_esc = 2.0 * s.n + 1;
    const double tol = opts.integrator.rel_tol;

    IntegrateOptions io = opts.integrator;
    io.t_end = s.slack * predicted;
    io.escape_radius = r_esc;
    io.radius = [dl](const State &x) { return dl.radius(x); };
    if (io.sample_interval <= 0) io.sample_interval = predicted / 200;
    io.model_id = s.family;
    const auto tr = integrate(s.model, z, io);
    const double measured = tr.escaped ? tr.escape_time : std::numeric_limits<double>::infinity();
    // same scale as the energy invariant: 10 tol (1 + |I(0)|)
    const double drift3 = tr.max_action_drift(2);
    const double drift_bound3 = 10 * tol * (1 + tr.actions.front()[2]);

    ExperimentRun run;
    auto &rep = run.report;
    rep.kind = "coupled-escape";
    rep.inputs = s.inputs;
    rep.inputs["action_level"] = s.action_level;
    rep.inputs["phase"] = opts.phase;
    rep.inputs["method"] = to_string(io.method);
    rep.inputs["rel_tol"] = tol;
    if (s.i4) rep.inputs["I4"] = *s.i4;
    rep.predicted = json{{"t_n", t_n}, {"coupling", s.coupling}, {"escape_time", predicted},
                         {"slack", s.slack}, {"control_horizon", s.control_factor * predicted}};
    rep.measured = json{{"escape_time", number_json(measured)},
                        {"start_radius", dl.radius(z)},
                        {"chi_hat_correction", correction},
                        {"I3_drift", drift3},
                        {"trajectory", trajectory_metadata(tr)}};
    rep.verdicts.push_back(make_verdict("start radius r(z_n) <= 1/n", dl.radius(z), "<=", 1.0 / s.n));
    rep.verdicts.push_back(make_verdict("chi-hat correction |z_n - w_n| <= I^0.8", correction, "<=",
                                        std::pow(s.action_level, 0.8)));
    rep.verdicts.push_back(make_verdict("escape time <= slack * prediction", measured, "<=", s.slack * predicted));
    rep.verdicts.push_back(make_verdict("escape time >= prediction / slack", measured, ">=", predicted / s.slack));
    rep.verdicts.push_back(make_verdict("I3 drift <= 10 tol (1 + I3)", drift3, "<=", drift_bound3));
    if (s.i4) {
        const double drift4 = tr.max_action_drift(3);
        rep.measured["I4_drift"] = drift4;
        rep.verdicts.push_back(
            make_verdict("I4 drift <= 10 tol (1 + I4)", drift4, "<=", 10 * tol * (1 + tr.actions.front()[3])));
    }
    run.trajectories.emplace_back("trajectory", tr);

    if (opts.control) {
        IntegrateOptions ic = io;
        ic.t_end = s.control_factor * predicted;
        ic.sample_interval = ic.t_end / 200;
        ic.model_id = s.family + " (coupling zeroed)";
        const auto tc = integrate(s.control, z, ic);
        double max_r = 0;
        for (const auto &x : tc.z) max_r = std::max(max_r, dl.radius(x));
        const double drift_c = tc.max_action_drift(2);
        rep.measured["control_max_radius"] = max_r;
        rep.measured["control_I3_drift"] = drift_c;
        rep.measured["control_trajectory"] = trajectory_metadata(tc);
        rep.verdicts.push_back(make_verdict("control: no escape within control horizon", max_r, "<", r_esc));
        rep.verdicts.push_back(
            make_verdict("control: I3 drift <= 10 tol (1 + I3)", drift_c, "<=", 10 * tol * (1 + tc.actions.front()[2])));
        run.trajectories.emplace_back("control", tc);
    }
    return run;
}

} // namespace detail

} // namespace birkhoff
