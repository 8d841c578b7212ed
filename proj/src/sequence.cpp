#include "birkhoff/sequence.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>

namespace birkhoff {

std::string to_string(SequenceMode m)
{
    switch (m) {
    case SequenceMode::liouville:
        return "L";
    case SequenceMode::rational:
        return "R";
    case SequenceMode::theorem_b:
        return "B";
    case SequenceMode::exact_resonant:
        return "exact-resonant";
    }
    return "?";
}

SequenceMode sequence_mode_from_string(const std::string &s)
{
    if (s == "L") return SequenceMode::liouville;
    if (s == "R") return SequenceMode::rational;
    if (s == "B") return SequenceMode::theorem_b;
    if (s == "exact-resonant") return SequenceMode::exact_resonant;
    throw std::invalid_argument("unknown sequence mode '" + s + "' (expected L|R|B|exact-resonant)");
}

namespace {

constexpr long long convergent_limit = 1'000'000'000'000'000LL;

// floor(x) and x - floor(x) for each backend; -1 when the term is too large.
std::pair<long long, Rational> split(const Rational &x)
{
    mpz_class f;
    mpz_fdiv_q(f.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    if (!f.fits_slong_p() || f.get_si() > convergent_limit) return {-1, Rational(0)};
    return {f.get_si(), x - Rational(f)};
}

std::pair<long long, Real> split(const Real &x)
{
    const Real f = boost::multiprecision::floor(x);
    if (f > Real(convergent_limit)) return {-1, Real(0)};
    return {f.convert_to<long long>(), x - f};
}

bool vanishes(const Rational &frac, const Rational &) { return frac == 0; }
bool vanishes(const Real &frac, const Real &x)
{
    return ScalarTraits<FloatScalar>::negligible(frac, x + Real(1));
}

template <class S>
RealOf<S> parse_value(const std::string &text)
{
    return ScalarTraits<S>::parse(text);
}

template <class S>
double as_double(const RealOf<S> &v)
{
    return ScalarTraits<S>::to_double(v);
}

} // namespace

template <class S>
std::vector<std::pair<long long, long long>> convergents(const RealOf<S> &x, int max_terms)
{
    if (!(x > 0)) throw std::invalid_argument("convergents: argument must be positive");
    std::vector<std::pair<long long, long long>> out;
    __int128 p_prev = 1, p_prev2 = 0, q_prev = 0, q_prev2 = 1;
    RealOf<S> rest = x;
    for (int t = 0; t < max_terms; ++t) {
        auto [a, frac] = split(rest);
        if (a < 0) break;
        const __int128 p = static_cast<__int128>(a) * p_prev + p_prev2;
        const __int128 q = static_cast<__int128>(a) * q_prev + q_prev2;
        if (p > convergent_limit || q > convergent_limit) break;
        out.emplace_back(static_cast<long long>(p), static_cast<long long>(q));
        p_prev2 = p_prev;
        p_prev = p;
        q_prev2 = q_prev;
        q_prev = q;
        if (vanishes(frac, x)) break;
        rest = RealOf<S>(1) / frac;
    }
    return out;
}

template <class S>
ResonanceSequence<S> resonance_sequence(const FrequencyVector<S> &omega, const SequenceRequest &req)
{
    using R = RealOf<S>;
    using T = ScalarTraits<S>;
    if (omega.dof() < 2) throw DimensionError("resonance sequence needs at least two frequencies");
    if (req.count < 1) throw std::invalid_argument("resonance sequence: count must be >= 1");
    if (omega[0] == 0 || omega[1] == 0) throw SequenceError("resonance sequence: omega_1 and omega_2 must be nonzero");

    ResonanceSequence<S> seq;
    seq.omega = omega;
    seq.mode = req.mode;
    seq.profile = req.profile;
    seq.same_sign = (omega[0] > 0) == (omega[1] > 0);
    const int sgn = seq.same_sign ? -1 : 1;
    auto gap_of = [&](long long k, long long l) -> R { return T::from_int(k) * omega[0] + T::from_int(sgn * l) * omega[1]; };

    auto finish = [&](SequenceEntry<S> &e) {
        auto it = req.overrides.a.find(e.n);
        if (it != req.overrides.a.end()) {
            e.a = parse_value<S>(it->second);
        } else {
            try {
                e.a = T::exp(T::from_int(-static_cast<long long>(e.n) * (e.k + e.l)));
            } catch (const BackendError &) {
                throw BackendError("a_" + std::to_string(e.n) + " = exp(-" + std::to_string(e.n * (e.k + e.l)) +
                                   ") is irrational on the exact backend; supply sequence.overrides.a");
            }
        }
        if (e.gap != 0) e.b = e.a / e.gap;
        if (auto z = req.overrides.zeta.find(e.n); z != req.overrides.zeta.end()) {
            e.zeta = parse_value<S>(z->second);
            if (e.zeta < 0 || e.zeta > 1) throw SequenceError("zeta_" + std::to_string(e.n) + " must lie in [0, 1]");
        }
        if (auto g = req.overrides.gap.find(e.n); g != req.overrides.gap.end()) e.gap_surrogate = parse_value<S>(g->second);
    };

    if (req.mode == SequenceMode::exact_resonant) {
        const IntVector *rel = nullptr;
        for (const auto &r : omega.relations())
            if (r.size() >= 2 && r[0] != 0 && r[1] != 0) {
                rel = &r;
                break;
            }
        if (!rel) throw SequenceError("mode exact-resonant needs a declared relation (k, l) between omega_1 and omega_2");
        long long k = (*rel)[0], l = (*rel)[1];
        if (k < 0) {
            k = -k;
            l = -l;
        }
        for (int m = 1; m <= req.count; ++m) {
            SequenceEntry<S> e;
            e.n = req.first_index + m - 1;
            e.k = m * k;
            e.l = m * std::llabs(l);
            e.gap = gap_of(e.k, e.l);
            finish(e);
            seq.entries.push_back(std::move(e));
        }
        return seq;
    }

    const R ratio = T::abs(omega[1] / omega[0]);
    const auto conv = convergents<S>(ratio, req.max_convergents);
    int n = req.first_index;
    long long prev_sum = 0;
    for (const auto &[k, l] : conv) {
        if (static_cast<int>(seq.entries.size()) >= req.count) break;
        if (k < 1 || l < 1 || k + l < 3 || k + l <= prev_sum) continue;
        SequenceEntry<S> e;
        e.n = n;
        e.k = k;
        e.l = l;
        e.gap = gap_of(k, l);
        if (e.gap == 0 || T::negligible(e.gap, T::abs(omega[0]) * T::from_int(k))) continue;
        const R abs_gap = T::abs(e.gap);
        bool keep = false;
        switch (req.mode) {
        case SequenceMode::liouville:
            keep = as_double<S>(abs_gap) < req.profile.gap_threshold(n);
            break;
        case SequenceMode::theorem_b: {
            if (k < req.profile.k_min || !(abs_gap < R(1) / T::from_int(k))) break;
            long long khat = static_cast<long long>(std::floor((1.0 + req.profile.epsilon) * static_cast<double>(l)));
            if (auto o = req.overrides.khat.find(n); o != req.overrides.khat.end()) khat = o->second;
            if (khat < l || khat >= k) break;
            e.khat = khat;
            keep = true;
            break;
        }
        case SequenceMode::rational: {
            // Dirichlet surrogate |gap| < 1/k with the sign that makes I4 positive.
            if (!(e.gap < 0) || !(abs_gap < R(1) / T::from_int(k))) break;
            e.i4 = -e.gap / T::from_int(k);
            const R residual = T::from_int(k) * (omega[0] + *e.i4) + T::from_int(l) * omega[1];
            if (!T::negligible(residual, T::abs(omega[0]) * T::from_int(k)))
                throw SequenceError("mode R: relation k(omega_1 + I4) + l omega_2 = 0 fails to hold");
            if (prev_sum > 0) {
                std::optional<R> sep;
                for (long long kk = 0; kk <= prev_sum; ++kk)
                    for (long long ll = 0; kk + ll <= prev_sum; ++ll) {
                        if (kk + ll == 0) continue;
                        const R v = T::abs(T::from_int(kk) * (omega[0] + *e.i4) + T::from_int(ll) * omega[1]);
                        if (!sep || v < *sep) sep = v;
                    }
                if (sep && *sep == 0) break;
                e.nr_separation = sep;
            }
            keep = true;
            break;
        }
        case SequenceMode::exact_resonant:
            break;
        }
        if (!keep) continue;
        finish(e);
        prev_sum = k + l;
        seq.entries.push_back(std::move(e));
        ++n;
    }
    if (static_cast<int>(seq.entries.size()) < req.count)
        throw SequenceError("mode " + to_string(req.mode) + ": found " + std::to_string(seq.entries.size()) + " of " +
                            std::to_string(req.count) + " requested entries among " + std::to_string(conv.size()) +
                            " convergents");
    return seq;
}

template <class S>
std::vector<OrderingCheck> ordering_checks(const ResonanceSequence<S> &seq, int n)
{
    const auto &e = seq.entry(n);
    const double bold_i = seq.profile.action_level;
    const double a = bold_i * as_double<S>(e.a);
    const double gap = std::fabs(as_double<S>(e.gap));
    const double lnk = std::log(static_cast<double>(e.k));
    std::vector<OrderingCheck> out;
    out.push_back({"coupling a = I * a_n < 1", a, 1.0, a < 1.0});
    out.push_back({"|gap_n| <= a^2", gap, a * a, gap <= a * a});
    out.push_back({"I * n * ln k_n <= I^0.9", bold_i * n * lnk, std::pow(bold_i, 0.9),
                   bold_i * n * lnk <= std::pow(bold_i, 0.9)});
    for (const auto &prev : seq.entries) {
        if (prev.n >= n || !prev.b) continue;
        const double b = std::fabs(as_double<S>(*prev.b));
        const double bound = as_double<S>(prev.a) * lnk;
        out.push_back({"b_" + std::to_string(prev.n) + " <= a_" + std::to_string(prev.n) + " ln k_n", b, bound,
                       b <= bound});
    }
    if (seq.mode == SequenceMode::liouville) {
        const double thr = seq.profile.gap_threshold(n);
        out.push_back({"0 < |gap_n| < threshold(n)", gap, thr, gap > 0 && gap < thr});
    }
    return out;
}

template <class S>
void validate_orderings(const ResonanceSequence<S> &seq, int n)
{
    std::string failed;
    for (const auto &c : ordering_checks(seq, n))
        if (!c.holds)
            failed += "\n  " + c.name + ": " + std::to_string(c.lhs) + " vs " + std::to_string(c.rhs);
    if (!failed.empty())
        throw ScaleProfileError("scale profile '" + seq.profile.name + "' violates orderings at n = " +
                                std::to_string(n) + ":" + failed);
}

template std::vector<std::pair<long long, long long>> convergents<ExactScalar>(const Rational &, int);
template std::vector<std::pair<long long, long long>> convergents<FloatScalar>(const Real &, int);
template ResonanceSequence<ExactScalar> resonance_sequence(const FrequencyVector<ExactScalar> &,
                                                           const SequenceRequest &);
template ResonanceSequence<FloatScalar> resonance_sequence(const FrequencyVector<FloatScalar> &,
                                                           const SequenceRequest &);
template std::vector<OrderingCheck> ordering_checks(const ResonanceSequence<ExactScalar> &, int);
template std::vector<OrderingCheck> ordering_checks(const ResonanceSequence<FloatScalar> &, int);
template void validate_orderings(const ResonanceSequence<ExactScalar> &, int);
template void validate_orderings(const ResonanceSequence<FloatScalar> &, int);

} // namespace birkhoff
