// Numerical flows of polynomial Hamiltonians in real coordinates
// (x1, y1, ..., xd, yd), with xi_j = (x_j + i y_j)/sqrt(2), and the
// experiments built on them.

#ifndef BIRKHOFF_FLOW_HPP
#define BIRKHOFF_FLOW_HPP

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "birkhoff/config.hpp"

namespace birkhoff {

using State = std::vector<double>;

/// Non-finite state or an unusable integrator setting.
class FlowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Experiment precondition failure.
class ExperimentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Double-precision evaluator of a real Hamiltonian and its vector field.
/// Holds scratch buffers, so one instance serves one thread.
class Field {
public:
    Field() = default;

    template <class S>
    explicit Field(const Series<S> &h) : d_(h.dof())
    {
        for (const auto &[m, c] : h.terms()) {
            Term t;
            t.c = {ScalarTraits<S>::to_double(c.re), ScalarTraits<S>::to_double(c.im)};
            for (int j = 0; j < d_; ++j) {
                if (m.u(j) > 0) t.factors.push_back({j, m.u(j)});
                if (m.v(j) > 0) t.factors.push_back({d_ + j, m.v(j)});
                top_ = std::max({top_, m.u(j), m.v(j)});
            }
            terms_.push_back(std::move(t));
        }
    }

    [[nodiscard]] int dof() const noexcept { return d_; }
    [[nodiscard]] std::size_t size() const noexcept { return terms_.size(); }

    /// dz/dt with x' = dH/dy, y' = -dH/dx.
    void operator()(const State &z, State &dz, double /*t*/ = 0) const;
    [[nodiscard]] double energy(const State &z) const;

private:
    struct Factor {
        int slot;
        int power;
    };
    struct Term {
        std::complex<double> c;
        std::vector<Factor> factors;
    };
    void fill_powers(const State &z) const;

    int d_ = 0;
    int top_ = 0;
    std::vector<Term> terms_;
    mutable std::vector<std::complex<double>> powers_;
    mutable std::vector<std::complex<double>> deta_;
};

/// I_j = (x_j^2 + y_j^2)/2.
std::vector<double> actions(const State &z);
double euclidean_norm(const State &z);

enum class Method { rkf78, implicit_midpoint };
std::string to_string(Method m);
Method method_from_string(const std::string &s);

struct IntegrateOptions {
    Method method = Method::rkf78;
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    /// May be negative for backward flows.
    double t_end = 1.0;
    double initial_step = 1e-3;
    /// Step of the implicit midpoint rule.
    double fixed_step = 1e-2;
    /// Stop at the first crossing of radius(z) = escape_radius.
    std::optional<double> escape_radius;
    /// Defaults to the Euclidean norm.
    std::function<double(const State &)> radius;
    /// 0 records every accepted step.
    double sample_interval = 0;
    double escape_time_tol = 1e-9;
    /// A step below min_step * max(1, |t|), or |z| above blowup_norm, ends the
    /// run with the blow-up flag.
    double min_step = 1e-14;
    double blowup_norm = 1e10;
    std::size_t max_steps = 200'000'000;
    std::string model_id;
};

struct StepStats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    double min_step = std::numeric_limits<double>::infinity();
    double max_step = 0;
};

struct Trajectory {
    std::string model_id;
    int dof = 0;
    std::vector<double> t;
    std::vector<State> z;
    std::vector<double> energy;
    std::vector<std::vector<double>> actions;
    Method method = Method::rkf78;
    double tol = 0;
    StepStats stats;
    bool escaped = false;
    double escape_time = std::numeric_limits<double>::quiet_NaN();
    bool blow_up = false;

    [[nodiscard]] const State &final_state() const { return z.back(); }
    [[nodiscard]] double final_time() const { return t.back(); }
    [[nodiscard]] double max_energy_drift() const;
    /// max_t |I_j(t) - I_j(0)|.
    [[nodiscard]] double max_action_drift(int j) const;
};

Trajectory integrate(const Field &field, const State &z0, const IntegrateOptions &opts);

template <class S>
Trajectory integrate(const Series<S> &h, const State &z0, const IntegrateOptions &opts)
{
    return integrate(Field(h), z0, opts);
}

/// Header "t,x1,y1,...,xd,yd,H,I1,...,Id"; values in %.17g.
std::string trajectory_csv(const Trajectory &tr);
json trajectory_metadata(const Trajectory &tr);

/// The invariant line of F_{k,l} = xi1^k xi2^l + eta1^k eta2^l:
/// xi1 = r e^{2 pi i nu}, xi2 = u r e^{2 pi i nu'}, u = sqrt(l/k),
/// nu = nu' = (3/4)/(k+l), along which r' = k u^l r^alpha, alpha = k+l-1.
struct DeltaLine {
    long long k = 1;
    long long l = 2;
    double u = 0;
    double nu = 0;

    [[nodiscard]] int alpha() const { return static_cast<int>(k + l - 1); }
    [[nodiscard]] double speed() const { return static_cast<double>(k) * std::pow(u, static_cast<double>(l)); }
    /// Point of the line in the first two planes of a d-dof state.
    [[nodiscard]] State point(double r, int d = 2) const;
    /// sqrt((|xi1|^2 + |xi2|^2)/(1 + u^2)); equals |r| on the line and is
    /// invariant under rotations of each plane.
    [[nodiscard]] double radius(const State &z) const;
    /// Distance of the first two planes of z from the line.
    [[nodiscard]] double deviation(const State &z) const;
    /// Closed-form r(t) from r0.
    [[nodiscard]] double r_at(double t, double r0) const;
    /// Blow-up time from r0 = 1/(2n).
    [[nodiscard]] double blowup_time(int n) const;
    /// Time to go from 1/(2n) to 2n+1.
    [[nodiscard]] double escape_time(int n) const;
};

DeltaLine delta_line(long long k, long long l);

/// Bare saddle F_{k,l} in d dof.
Series<ExactScalar> saddle_series(int d, long long k, long long l);

/// A pass/fail statement recomputable from `measured`, `relation` and `bound`.
struct Verdict {
    std::string name;
    double measured = 0;
    std::string relation = "<=";
    double bound = 0;
    bool pass = false;
};

Verdict make_verdict(std::string name, double measured, const std::string &relation, double bound);
bool evaluate_relation(double measured, const std::string &relation, double bound);

struct ExperimentReport {
    std::string kind;
    json inputs = json::object();
    json predicted = json::object();
    json measured = json::object();
    std::vector<Verdict> verdicts;

    [[nodiscard]] bool pass() const;
    [[nodiscard]] json to_json() const;
    [[nodiscard]] std::vector<std::string> failing() const;
};

/// Recomputes every verdict of a stored report; false if any stored `pass`
/// disagrees with its numbers.
bool recheck_report(const json &report);

/// Doubles that JSON cannot hold are stored as strings.
json number_json(double v);
double number_from_json(const json &v);

struct ExperimentRun {
    ExperimentReport report;
    std::vector<std::pair<std::string, Trajectory>> trajectories;
};

struct DeltaOptions {
    IntegrateOptions integrator;
    double escape_rel_tol = 1e-6;
    double deviation_tol = 1e-8;
};

ExperimentRun delta_experiment(long long k, long long l, int n, const DeltaOptions &opts = {});

/// gnuplot script overlaying the measured radius from `csv` with the closed form.
std::string delta_plot_script(const DeltaLine &line, int n, const std::string &csv);

struct ResonantEscapeOptions {
    IntegrateOptions integrator;
    double escape_rel_tol = 1e-4;
    double norm_rel_tol = 1e-6;
    int norm_samples = 400;
};

namespace detail {

ExperimentRun resonant_escape_impl(const Field &full, const Field &saddle, const std::vector<double> &omega,
                                   long long k, long long l, double a, int n, const ResonantEscapeOptions &opts);

struct GronwallInput {
    Field h_big;
    Field h_small;
    Field f_part;
    Field g_part;
    std::vector<double> omega;
    double a;
};

ExperimentRun rotating_frame_impl(const GronwallInput &in, const State &z0, double T, std::optional<double> c,
                                  double ball, const IntegrateOptions &opts);

template <class S>
IntVector relation_vector(const FrequencyVector<S> &w, long long k, long long l)
{
    IntVector rel(static_cast<std::size_t>(w.dof()), 0);
    rel[0] = k;
    rel[1] = (w[0] > 0) == (w[1] > 0) ? -l : l;
    return rel;
}

template <class S>
std::vector<double> omega_doubles(const FrequencyVector<S> &w)
{
    std::vector<double> out;
    for (const auto &v : w.values()) out.push_back(ScalarTraits<S>::to_double(v));
    return out;
}

} // namespace detail

/// H = sum omega_j I_j + a F_{k,l} from the line point with r0 = 1/(2n),
/// compared with the flow of a F_{k,l} alone.
template <class S>
ExperimentRun resonant_escape(const FrequencyVector<S> &omega, long long k, long long l, const RealOf<S> &a, int n,
                              const ResonantEscapeOptions &opts = {})
{
    if (omega.dof() < 2) throw ExperimentError("resonant_escape needs at least two frequencies");
    if (k < 1 || l < 1 || k + l < 3) throw ExperimentError("resonant_escape needs k, l >= 1 and k + l > 2");
    if (a == 0) throw ExperimentError("resonant_escape needs a != 0");
    if (n < 1) throw ExperimentError("resonant_escape needs n >= 1");
    if ((omega[0] > 0) == (omega[1] > 0))
        throw ExperimentError("resonant_escape: F_{k,l} = xi1^k xi2^l + c.c. is resonant only for omega1 omega2 < 0");
    const IntVector rel = detail::relation_vector(omega, k, l);
    if (!omega.in_lattice(rel))
        throw ExperimentError("resonant_escape: relation (" + std::to_string(k) + "," + std::to_string(l) +
                              ") is not in the declared lattice");
    if (omega.dot(rel) != 0) throw ExperimentError("resonant_escape: declared relation does not hold exactly");
    const int d = omega.dof();
    const auto saddle = saddle_series(d, k, l);
    Series<S> f(d, static_cast<int>(k + l));
    for (const auto &[m, c] : saddle.terms()) f.add_term(m, make_real<S>(a));
    const auto h = add(Series<S>::quadratic(static_cast<int>(k + l), omega), f, static_cast<int>(k + l));
    auto run = detail::resonant_escape_impl(Field(h), Field(f), detail::omega_doubles(omega), k, l,
                                            ScalarTraits<S>::to_double(a), n, opts);
    return run;
}

struct RotatingFrameOptions {
    IntegrateOptions integrator;
    /// Constant of the bound C a^2 A T e^{C a A T}; only C* is reported when empty.
    std::optional<double> c;
    /// Both flows must stay within this Euclidean radius.
    double ball = 1.0;
};

/// Compares the flows of H = H_omega + a F and h = H + a^2 G from z0 on [0, T]
/// in the frame rotating with omega.
template <class S>
ExperimentRun rotating_frame_compare(const Series<S> &big, const Series<S> &small, const FrequencyVector<S> &omega,
                                     const RealOf<S> &a, const State &z0, double T,
                                     const RotatingFrameOptions &opts = {})
{
    if (a == 0) throw ExperimentError("rotating_frame_compare needs a != 0");
    if (big.dof() != omega.dof() || small.dof() != omega.dof())
        throw ExperimentError("rotating_frame_compare: dimensions of H, h and omega differ");
    const int N = std::max(big.order(), small.order());
    const auto quad = Series<S>::quadratic(N, omega);
    const auto f = scale(subtract(big, quad, N), make_real<S>(RealOf<S>(1) / a), N);
    const auto g = scale(subtract(small, big, N), make_real<S>(RealOf<S>(1) / (a * a)), N);
    detail::GronwallInput in{Field(big), Field(small), Field(f), Field(g), detail::omega_doubles(omega),
                             ScalarTraits<S>::to_double(a)};
    return detail::rotating_frame_impl(in, z0, T, opts.c, opts.ball, opts.integrator);
}

/// Least-squares slope of log sup|xi| against log a over rotating-frame runs,
/// with the common constant C* = max of the per-run fits.
ExperimentReport gronwall_scaling(const std::vector<ExperimentReport> &runs, double slope = 2.0,
                                  double slope_tol = 0.1);

struct CoupledEscapeOptions {
    IntegrateOptions integrator;
    /// Phase of (x3, y3); the paper leaves it free.
    double phase = 0;
    /// Order of the I4 pole expansion in the A4 generators.
    int pole_order = 0;
    bool control = true;
};

namespace detail {

struct CoupledSetup {
    Field model;
    Field control;
    Field chi_hat;
    bool has_chi_hat = false;
    int d = 3;
    long long k = 2;
    long long l = 1;
    int n = 1;
    double coupling = 0;
    double action_level = 0;
    std::optional<double> i4;
    double slack = 2;
    double control_factor = 10;
    std::string family;
    json inputs;
};

State coupled_start_point(const CoupledSetup &s, double phase, const IntegrateOptions &opts, State *line_point);
ExperimentRun coupled_escape_impl(const CoupledSetup &s, const CoupledEscapeOptions &opts);

} // namespace detail

template <class S>
detail::CoupledSetup coupled_setup(const ModelSpec<S> &spec, int n, int pole_order)
{
    detail::check_family(spec);
    if (!detail::is_a_family(spec.family)) throw ExperimentError("coupled_escape applies to the A3 and A4 families");
    const auto &e = spec.seq.entry(n);
    bool included = false;
    for (int t = 0; t < spec.terms; ++t)
        if (spec.seq.entries[static_cast<std::size_t>(t)].n == n) included = true;
    if (!included) throw ExperimentError("coupled_escape: entry n = " + std::to_string(n) + " is not among the model terms");
    if (n < 1) throw ExperimentError("coupled_escape needs n >= 1 (set sequence.first_index = 1)");
    validate_orderings(spec.seq, n);

    detail::CoupledSetup s;
    s.d = spec.omega.dof();
    s.k = e.k;
    s.l = e.l;
    s.n = n;
    s.action_level = spec.seq.profile.action_level;
    s.coupling = s.action_level * ScalarTraits<S>::to_double(e.a);
    s.slack = spec.seq.profile.escape_slack;
    s.control_factor = spec.seq.profile.control_factor;
    s.family = to_string(spec.family);
    if (detail::has_i4(spec.family)) {
        if (!e.i4) throw ExperimentError("coupled_escape: A4 families need a mode R sequence (I4_n)");
        s.i4 = ScalarTraits<S>::to_double(*e.i4);
    }
    s.model = Field(build_model(spec));
    auto zero = spec;
    for (auto &entry : zero.seq.entries) entry.a = RealOf<S>(0);
    s.control = Field(build_model(zero));
    const auto chi = generator_chi_hat(spec, n, spec.order, pole_order);
    s.has_chi_hat = !chi.empty();
    s.chi_hat = Field(chi);
    s.inputs = json{{"family", s.family},
                    {"omega", omega_to_json(spec.omega)},
                    {"n", n},
                    {"k", e.k},
                    {"l", e.l},
                    {"a_n", ScalarTraits<S>::render(e.a)},
                    {"gap_n", ScalarTraits<S>::render(e.gap)},
                    {"terms", spec.terms},
                    {"order", spec.order}};
    return s;
}

/// Desk-scale coupled mechanism: fixes I3 at the profile's action level,
/// starts from the chi-hat corrected line point and checks escape against
/// t_n / (I a_n), with an integrable control run.
template <class S>
ExperimentRun coupled_escape(const ModelSpec<S> &spec, int n, const CoupledEscapeOptions &opts = {})
{
    const auto setup = coupled_setup(spec, n, opts.pole_order);
    auto run = detail::coupled_escape_impl(setup, opts);
    run.report.inputs["scale_profile"] = json{{"name", spec.seq.profile.name},
                                              {"action_level", spec.seq.profile.action_level},
                                              {"escape_slack", spec.seq.profile.escape_slack},
                                              {"control_factor", spec.seq.profile.control_factor}};
    return run;
}

} // namespace birkhoff

#endif
