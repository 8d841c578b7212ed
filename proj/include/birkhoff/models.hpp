// The explicit Hamiltonian families, their conjugating generators and the
// closed-form predictions of selected normal-form coefficients.

#ifndef BIRKHOFF_MODELS_HPP
#define BIRKHOFF_MODELS_HPP

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "birkhoff/bnf.hpp"
#include "birkhoff/sequence.hpp"
#include "birkhoff/series.hpp"

namespace birkhoff {

enum class Family { a3, a3_tilde, a4, a4_tilde, b, b_same_sign, resonant_2dof, bare_saddle, saddle_2dof };

std::string to_string(Family f);
Family family_from_string(const std::string &s);

class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

template <class S>
struct ModelSpec {
    Family family = Family::bare_saddle;
    FrequencyVector<S> omega;
    ResonanceSequence<S> seq;
    /// Number of coupling terms taken from the start of the sequence.
    int terms = 0;
    /// Truncation order (total degree).
    int order = 4;
    /// Coupling constant and exponents of the single-saddle families.
    RealOf<S> a = RealOf<S>(1);
    long long k = 0;
    long long l = 0;
    std::vector<int> pair_caps;
};

namespace detail {

inline bool is_a_family(Family f)
{
    return f == Family::a3 || f == Family::a3_tilde || f == Family::a4 || f == Family::a4_tilde;
}
inline bool is_b_family(Family f) { return f == Family::b || f == Family::b_same_sign; }
inline bool has_i4(Family f) { return f == Family::a4 || f == Family::a4_tilde; }

/// xi_1^k xi_2^l (or xi_1^k eta_2^l for same-sign frequencies) in d degrees of freedom.
inline Monomial saddle_monomial(int d, long long k, long long l, bool same_sign)
{
    Monomial m(d);
    m.set_u(0, static_cast<int>(k));
    if (same_sign)
        m.set_v(1, static_cast<int>(l));
    else
        m.set_u(1, static_cast<int>(l));
    return m;
}

/// (c m + conj(c) conj(m)) * factor, a real combination when factor is an action monomial.
template <class S>
void add_pair(Series<S> &s, const Monomial &m, const S &c, const Monomial &factor)
{
    s.add_term(m * factor, c);
    s.add_term(m.conjugate() * factor, c.conj());
}

template <class S>
void check_family(const ModelSpec<S> &spec)
{
    const int d = spec.omega.dof();
    auto need = [&](int want) {
        if (d != want)
            throw ModelError("family " + to_string(spec.family) + " requires d = " + std::to_string(want) +
                             ", got d = " + std::to_string(d));
    };
    switch (spec.family) {
    case Family::a3:
    case Family::a3_tilde:
        need(3);
        break;
    case Family::a4:
    case Family::a4_tilde:
        need(4);
        break;
    case Family::b:
        need(2);
        if (!(spec.omega[0] * spec.omega[1] < 0)) throw ModelError("family B requires omega_1 omega_2 < 0");
        break;
    case Family::b_same_sign:
        need(2);
        if (!(spec.omega[0] * spec.omega[1] > 0)) throw ModelError("family B-samesign requires omega_1 omega_2 > 0");
        break;
    case Family::resonant_2dof:
        need(2);
        if (spec.omega.dot({spec.k, spec.l}) != 0 || !spec.omega.in_lattice({spec.k, spec.l}))
            throw ModelError("family resonant-2dof requires the declared relation k omega_1 + l omega_2 = 0");
        break;
    case Family::bare_saddle:
    case Family::saddle_2dof:
        need(2);
        break;
    }
    if (detail::is_a_family(spec.family) || detail::is_b_family(spec.family)) {
        if (spec.terms < 0 || spec.terms > static_cast<int>(spec.seq.entries.size()))
            throw ModelError("model asks for " + std::to_string(spec.terms) + " coupling terms but the sequence has " +
                             std::to_string(spec.seq.entries.size()));
    } else if (spec.k < 1 || spec.l < 1) {
        throw ModelError("family " + to_string(spec.family) + " needs exponents k, l >= 1");
    }
}

} // namespace detail

/// Integrable part: sum omega_j I_j, with the action couplings of the
/// tilde, A4 and B families.
template <class S>
Series<S> integrable_part(const ModelSpec<S> &spec)
{
    const int d = spec.omega.dof();
    Series<S> h(d, spec.order, spec.pair_caps);
    if (spec.family == Family::bare_saddle) return h;
    const S one = make_real<S>(RealOf<S>(1));
    for (int j = 0; j < d; ++j) h.add_term(Monomial::action(d, j), make_real<S>(spec.omega[j]));
    auto couple = [&](int j, int other, int power) {
        const Monomial m = Monomial::action(d, j) * Monomial::action(d, other, power);
        if (!h.admits(m))
            throw ModelError("truncation order " + std::to_string(spec.order) + " would drop the action coupling " +
                             m.to_string() + " of family " + to_string(spec.family));
        h.add_term(m, one);
    };
    switch (spec.family) {
    case Family::a3_tilde:
        couple(0, 2, 3);
        couple(1, 2, 4);
        break;
    case Family::a4:
        couple(0, 3, 1);
        break;
    case Family::a4_tilde:
        couple(0, 3, 1);
        couple(1, 3, 2);
        couple(2, 3, 3);
        break;
    case Family::b:
    case Family::b_same_sign:
        couple(0, 1, 1);
        break;
    default:
        break;
    }
    h.set_reality_flag_unchecked(true);
    return h;
}

/// Builds the real series of the family. Every requested coupling must fit
/// under the truncation order.
template <class S>
Series<S> build_model(const ModelSpec<S> &spec)
{
    detail::check_family(spec);
    const int d = spec.omega.dof();
    Series<S> h = integrable_part(spec);
    std::vector<std::string> dropped;
    auto check_fits = [&](const Monomial &m, const std::string &what) {
        if (!h.admits(m)) dropped.push_back(what + " (degree " + std::to_string(m.degree()) + ")");
    };
    if (detail::is_a_family(spec.family) || detail::is_b_family(spec.family)) {
        const bool same = spec.family == Family::b_same_sign;
        const Monomial factor = detail::is_a_family(spec.family) ? Monomial::action(d, 2) : Monomial(d);
        for (int t = 0; t < spec.terms; ++t) {
            const auto &e = spec.seq.entries[static_cast<std::size_t>(t)];
            const Monomial m = detail::saddle_monomial(d, e.k, e.l, same);
            check_fits(m * factor, "coupling n=" + std::to_string(e.n) + " (k,l)=(" + std::to_string(e.k) + "," +
                                       std::to_string(e.l) + ")");
            RealOf<S> c = e.a;
            if (detail::is_b_family(spec.family)) c *= e.zeta;
            if (c != 0) detail::add_pair(h, m, make_real<S>(c), factor);
        }
    } else {
        const Monomial m = detail::saddle_monomial(d, spec.k, spec.l, false);
        check_fits(m, "saddle (k,l)=(" + std::to_string(spec.k) + "," + std::to_string(spec.l) + ")");
        const RealOf<S> c = spec.family == Family::bare_saddle ? RealOf<S>(1) : spec.a;
        if (c != 0) detail::add_pair(h, m, make_real<S>(c), Monomial(d));
    }
    if (!dropped.empty()) {
        std::string msg = "truncation order " + std::to_string(spec.order) + " would drop requested terms:";
        for (const auto &s : dropped) msg += " " + s + ";";
        throw ModelError(msg);
    }
    h.mark_real();
    return h;
}

/// Truncated geometric expansion of 1/(D + k X) in X^m, m <= M.
template <class S>
std::vector<RealOf<S>> pole_expansion(const RealOf<S> &D, long long k, int M)
{
    if (D == 0) throw ModelError("pole expansion: D = 0 (resonant, generator undefined)");
    std::vector<RealOf<S>> out;
    RealOf<S> c = RealOf<S>(1) / D;
    for (int m = 0; m <= M; ++m) {
        out.push_back(c);
        c = c * ScalarTraits<S>::from_int(-k) / D;
    }
    return out;
}

/// Conjugating generator for coupling entry j. A families: chi_j = i b_j I3 E_j
/// with E_j = xi_1^k xi_2^l - eta_1^k eta_2^l (for A4 families b_j carries the
/// pole in I4, expanded to order M). B families: chi_n = i zeta E~_n U_n with
/// U_n expanded to order M in I2. These satisfy {H_omega, chi_j} = -a_j I3 F_j
/// and {H_omega, chi_n} = -zeta F~ - zeta l I1 F~ U + O(I2^{M+1}).
template <class S>
Series<S> generator_chi(const ModelSpec<S> &spec, int j, int N, int M = 0)
{
    detail::check_family(spec);
    if (!detail::is_a_family(spec.family) && !detail::is_b_family(spec.family))
        throw ModelError("generator_chi applies to the A and B families");
    const int d = spec.omega.dof();
    const auto &e = spec.seq.entry(j);
    const bool same = spec.family == Family::b_same_sign;
    const Monomial m = detail::saddle_monomial(d, e.k, e.l, same);
    Series<S> chi(d, N, spec.pair_caps);
    const S i_unit = imaginary_unit<S>();
    if (detail::is_a_family(spec.family)) {
        if (e.gap == 0) throw ModelError("generator_chi: gap of entry " + std::to_string(j) + " is zero");
        const Monomial i3 = Monomial::action(d, 2);
        if (detail::has_i4(spec.family)) {
            const auto coeff = pole_expansion<S>(e.gap, e.k, M);
            for (int p = 0; p <= M; ++p)
                detail::add_pair(chi, m, i_unit * make_real<S>(e.a * coeff[static_cast<std::size_t>(p)]),
                                 i3 * Monomial::action(d, 3, p));
        } else {
            detail::add_pair(chi, m, i_unit * make_real<S>(e.a / e.gap), i3);
        }
    } else {
        const auto coeff = pole_expansion<S>(e.gap, e.k, M);
        for (int p = 0; p <= M; ++p)
            detail::add_pair(chi, m, i_unit * make_real<S>(e.zeta * e.a * coeff[static_cast<std::size_t>(p)]),
                             Monomial::action(d, 1, p));
    }
    chi.mark_real();
    return chi;
}

/// Sum of the generators of the entries with index < n.
template <class S>
Series<S> generator_chi_hat(const ModelSpec<S> &spec, int n, int N, int M = 0)
{
    Series<S> out(spec.omega.dof(), N, spec.pair_caps);
    for (int t = 0; t < spec.terms; ++t) {
        const auto &e = spec.seq.entries[static_cast<std::size_t>(t)];
        if (e.n >= n) continue;
        out = add(out, generator_chi(spec, e.n, N, M), N);
    }
    out.set_reality_flag_unchecked(true);
    return out;
}

enum class ClosedFormKind { gamma, i3sq_series, order2_pattern };

std::string to_string(ClosedFormKind k);
ClosedFormKind closed_form_from_string(const std::string &s);

template <class S>
struct ClosedForm {
    std::vector<std::pair<ActionIndex, RealOf<S>>> values;
    /// Signs follow the printed formula, which may disagree with the
    /// normalization; only magnitudes are convention-free.
    bool sign_caveat = false;
};

/// gamma: zeta^2 coefficient of I1^{k-1} I2^{khat} for B entry `target`;
/// i3sq-series: coefficients of I3^2 I1^{k-1} I2^l and I3^2 I1^k I2^{l-1} for
/// A entry `target` (target < 0 means every included entry);
/// order2-pattern: coefficients of I1^{k-1} I2^l and I1^k I2^{l-1} of the
/// single 2-dof saddle.
template <class S>
ClosedForm<S> closed_form_coefficients(const ModelSpec<S> &spec, ClosedFormKind which, int target = -1)
{
    using R = RealOf<S>;
    ClosedForm<S> out;
    const int d = spec.omega.dof();
    auto pow_int = [](R base, long long e) {
        R r(1);
        for (long long i = 0; i < e; ++i) r *= base;
        return r;
    };
    switch (which) {
    case ClosedFormKind::gamma: {
        if (!detail::is_b_family(spec.family)) throw ModelError("gamma applies to the B families");
        const auto &e = spec.seq.entry(target);
        if (!e.khat) throw ModelError("gamma: entry " + std::to_string(target) + " has no k-hat");
        const long long p = *e.khat - e.l;
        const R g = e.effective_gap();
        R gamma = e.a * e.a * ScalarTraits<S>::from_int(e.k) * pow_int(ScalarTraits<S>::from_int(e.k) / g, p + 1);
        if (p % 2 != 0) gamma = -gamma;
        ActionIndex idx(static_cast<std::size_t>(d), 0);
        idx[0] = static_cast<int>(e.k - 1);
        idx[1] = static_cast<int>(*e.khat);
        out.values.emplace_back(idx, gamma);
        out.sign_caveat = true;
        break;
    }
    case ClosedFormKind::i3sq_series: {
        if (!detail::is_a_family(spec.family)) throw ModelError("i3sq-series applies to the A families");
        for (const auto &e : spec.seq.entries) {
            if (target >= 0 && e.n != target) continue;
            const R g = e.effective_gap();
            if (g == 0) throw ModelError("i3sq-series: zero gap at entry " + std::to_string(e.n));
            const R base = -e.a * e.a / g;
            ActionIndex i1(static_cast<std::size_t>(d), 0), i2(static_cast<std::size_t>(d), 0);
            i1[0] = static_cast<int>(e.k - 1);
            i1[1] = static_cast<int>(e.l);
            i1[2] = 2;
            i2[0] = static_cast<int>(e.k);
            i2[1] = static_cast<int>(e.l - 1);
            i2[2] = 2;
            out.values.emplace_back(i1, base * ScalarTraits<S>::from_int(e.k * e.k));
            out.values.emplace_back(i2, base * ScalarTraits<S>::from_int(e.l * e.l));
        }
        if (out.values.empty()) throw ModelError("i3sq-series: no entry with index " + std::to_string(target));
        break;
    }
    case ClosedFormKind::order2_pattern: {
        if (spec.family != Family::saddle_2dof && spec.family != Family::resonant_2dof)
            throw ModelError("order2-pattern applies to the single 2-dof saddle");
        const R g = spec.omega.dot({spec.k, spec.l});
        if (g == 0) throw ModelError("order2-pattern: resonant saddle has no normal form");
        const R base = -spec.a * spec.a / g;
        out.values.emplace_back(ActionIndex{static_cast<int>(spec.k - 1), static_cast<int>(spec.l)},
                                base * ScalarTraits<S>::from_int(spec.k * spec.k));
        out.values.emplace_back(ActionIndex{static_cast<int>(spec.k), static_cast<int>(spec.l - 1)},
                                base * ScalarTraits<S>::from_int(spec.l * spec.l));
        break;
    }
    }
    return out;
}

template <class S>
struct ZetaChoice {
    RealOf<S> zeta;
    /// Gamma(zeta) = quadratic zeta^2 + linear zeta + constant.
    RealOf<S> quadratic;
    RealOf<S> linear;
    RealOf<S> constant;
    RealOf<S> gamma_at_choice;
};

/// Coefficient of I1^{k-1} I2^{khat} in the normal form with zeta_n = z.
template <class S>
S theorem_b_coefficient(ModelSpec<S> spec, int n, const RealOf<S> &z, int N)
{
    const auto it = std::find_if(spec.seq.entries.begin(), spec.seq.entries.end(),
                                 [&](const SequenceEntry<S> &e) { return e.n == n; });
    if (it == spec.seq.entries.end()) throw std::out_of_range("no sequence entry " + std::to_string(n));
    it->zeta = z;
    ActionIndex idx{static_cast<int>(it->k - 1), static_cast<int>(it->khat.value_or(it->l))};
    if (action_degree(idx) > N) throw ModelError("theorem_b_coefficient: order too low for the target index");
    spec.order = std::max(spec.order, 2 * N);
    const auto r = normalize_to_order(build_model(spec), spec.omega, N);
    return bnf_coefficient(r, idx);
}

/// The constructive choice of zeta_n: fit Gamma through zeta in {0, 1/2, 1}
/// with earlier zetas frozen, then maximize |Gamma| on [0, 1].
template <class S>
ZetaChoice<S> choose_zeta(const ModelSpec<S> &spec, int n, int N)
{
    using R = RealOf<S>;
    const R half = ScalarTraits<S>::from_ratio(1, 2);
    const R g0 = theorem_b_coefficient(spec, n, R(0), N).re;
    const R gh = theorem_b_coefficient(spec, n, half, N).re;
    const R g1 = theorem_b_coefficient(spec, n, R(1), N).re;
    ZetaChoice<S> out;
    out.constant = g0;
    // g(1/2) = q/4 + p/2 + c, g(1) = q + p + c
    out.quadratic = 2 * g1 - 4 * gh + 2 * g0;
    out.linear = g1 - g0 - out.quadratic;
    auto eval = [&](const R &z) -> R { return (out.quadratic * z + out.linear) * z + out.constant; };
    std::vector<R> candidates{R(0), R(1)};
    if (out.quadratic != 0) {
        const R v = -out.linear / (2 * out.quadratic);
        if (v > 0 && v < 1) candidates.push_back(v);
    }
    out.zeta = candidates.front();
    for (const auto &z : candidates)
        if (ScalarTraits<S>::abs(eval(z)) > ScalarTraits<S>::abs(eval(out.zeta))) out.zeta = z;
    out.gamma_at_choice = eval(out.zeta);
    return out;
}

} // namespace birkhoff

#endif
