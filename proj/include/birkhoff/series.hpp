// Truncated Poisson series in the complex coordinates
//   xi_j = (x_j + i y_j)/sqrt(2),  eta_j = (x_j - i y_j)/sqrt(2),
// so that I_j = xi_j eta_j.
//
// Bracket convention: {F, G} = i * sum_j (dF/deta_j dG/dxi_j - dF/dxi_j dG/deta_j).
// With it the Hamiltonian equations read xi_j' = {xi_j, H} = -i dH/deta_j and
// eta_j' = {eta_j, H} = i dH/dxi_j, and a monomial m = xi^u eta^v with
// <omega, u - v> != 0 is removed at first order by the generator
// chi = i m / <omega, u - v>, since {sum omega_j I_j, chi} = -m.

#ifndef BIRKHOFF_SERIES_HPP
#define BIRKHOFF_SERIES_HPP

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "birkhoff/frequency.hpp"
#include "birkhoff/monomial.hpp"
#include "birkhoff/scalar.hpp"

namespace birkhoff {

/// Sign of the bracket relative to i * sum(F_xi G_eta - F_eta G_xi).
inline constexpr int bracket_convention = -1;

/// Raised when a series that claims to be real has coefficients that are not
/// conjugate-symmetric.
class RealityError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

template <class S>
class Series {
public:
    using scalar_type = S;
    using real_type = RealOf<S>;
    using term_map = std::map<Monomial, S, GradedLex>;

    Series() = default;
    /// Empty series in `dof` degrees of freedom keeping total degree <= order.
    /// `pair_caps`, when non-empty, additionally bounds u_j + v_j per pair
    /// (negative entries mean no cap).
    Series(int dof, int order, std::vector<int> pair_caps = {})
        : dof_(dof), order_(order), caps_(std::move(pair_caps))
    {
        if (dof < 1) throw DimensionError("degrees of freedom must be >= 1");
        if (order < 0) throw std::invalid_argument("truncation order must be >= 0");
        if (!caps_.empty() && static_cast<int>(caps_.size()) != dof)
            throw DimensionError("pair caps must have one entry per degree of freedom");
    }

    [[nodiscard]] int dof() const noexcept { return dof_; }
    [[nodiscard]] int order() const noexcept { return order_; }
    [[nodiscard]] const std::vector<int> &pair_caps() const noexcept { return caps_; }
    [[nodiscard]] const term_map &terms() const noexcept { return terms_; }
    [[nodiscard]] bool empty() const noexcept { return terms_.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return terms_.size(); }
    [[nodiscard]] static constexpr Backend backend() { return ScalarTraits<S>::backend; }

    [[nodiscard]] bool admits(const Monomial &m) const
    {
        if (m.degree() > order_) return false;
        for (std::size_t j = 0; j < caps_.size(); ++j)
            if (caps_[j] >= 0 && m.u(static_cast<int>(j)) + m.v(static_cast<int>(j)) > caps_[j]) return false;
        return true;
    }

    [[nodiscard]] S coefficient(const Monomial &m) const
    {
        auto it = terms_.find(m);
        return it == terms_.end() ? S{} : it->second;
    }

    /// Adds c * m, dropping it if the truncation excludes m and erasing
    /// coefficients that cancel to zero.
    void add_term(const Monomial &m, const S &c)
    {
        if (m.dof() != dof_) throw DimensionError("monomial dimension differs from series");
        if (c.is_zero() || !admits(m)) return;
        auto [it, inserted] = terms_.try_emplace(m, c);
        if (!inserted) {
            it->second += c;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    [[nodiscard]] bool reality_flag() const noexcept { return real_; }
    /// Sets the reality flag after checking conjugate symmetry.
    void mark_real()
    {
        if (!is_conjugate_symmetric()) throw RealityError("series coefficients are not conjugate-symmetric");
        real_ = true;
    }
    void clear_reality_flag() noexcept { real_ = false; }
    void set_reality_flag_unchecked(bool real) noexcept { real_ = real; }

    /// Coefficient of (u, v) equals the conjugate of the coefficient of (v, u).
    [[nodiscard]] bool is_conjugate_symmetric() const
    {
        for (const auto &[m, c] : terms_) {
            const S other = coefficient(m.conjugate());
            if (other != c.conj()) return false;
        }
        return true;
    }

    [[nodiscard]] int valuation() const { return terms_.empty() ? -1 : terms_.begin()->first.degree(); }
    [[nodiscard]] int max_degree() const { return terms_.empty() ? -1 : terms_.rbegin()->first.degree(); }

    [[nodiscard]] Series degree_part(int degree) const
    {
        Series out(dof_, order_, caps_);
        for (const auto &[m, c] : terms_)
            if (m.degree() == degree) out.terms_.emplace_hint(out.terms_.end(), m, c);
        out.real_ = real_;
        return out;
    }

    /// Terms of total degree in [lo, hi].
    [[nodiscard]] Series degree_range(int lo, int hi) const
    {
        Series out(dof_, order_, caps_);
        for (const auto &[m, c] : terms_)
            if (m.degree() >= lo && m.degree() <= hi) out.terms_.emplace_hint(out.terms_.end(), m, c);
        out.real_ = real_;
        return out;
    }

    /// Same terms with a new truncation order (terms above it are dropped).
    [[nodiscard]] Series with_order(int order) const
    {
        Series out(dof_, order, caps_);
        for (const auto &[m, c] : terms_)
            if (out.admits(m)) out.terms_.emplace_hint(out.terms_.end(), m, c);
        out.real_ = real_;
        return out;
    }

    /// Action-only part (u == v).
    [[nodiscard]] Series action_part() const
    {
        Series out(dof_, order_, caps_);
        for (const auto &[m, c] : terms_)
            if (m.is_action()) out.terms_.emplace_hint(out.terms_.end(), m, c);
        out.real_ = real_;
        return out;
    }

    friend bool operator==(const Series &a, const Series &b)
    {
        return a.dof_ == b.dof_ && a.terms_ == b.terms_;
    }
    friend bool operator!=(const Series &a, const Series &b) { return !(a == b); }

    // Convenience constructors.
    static Series constant(int dof, int order, const S &c)
    {
        Series s(dof, order);
        s.add_term(Monomial(dof), c);
        return s;
    }
    static Series from_monomial(int dof, int order, const Monomial &m, const S &c)
    {
        Series s(dof, order);
        s.add_term(m, c);
        return s;
    }
    /// sum_j omega_j I_j, marked real.
    static Series quadratic(int order, const FrequencyVector<S> &omega)
    {
        Series s(omega.dof(), order);
        for (int j = 0; j < omega.dof(); ++j) s.add_term(Monomial::action(omega.dof(), j), make_real<S>(omega[j]));
        s.real_ = true;
        return s;
    }

private:
    int dof_ = 1;
    int order_ = 0;
    std::vector<int> caps_;
    term_map terms_;
    bool real_ = false;
};

namespace detail {

template <class S>
void check_compatible(const Series<S> &a, const Series<S> &b, const char *op)
{
    if (a.dof() != b.dof())
        throw DimensionError(std::string(op) + ": series have " + std::to_string(a.dof()) + " and " +
                             std::to_string(b.dof()) + " degrees of freedom");
}

template <class S>
std::vector<int> merged_caps(const Series<S> &a, const Series<S> &b)
{
    if (a.pair_caps().empty()) return b.pair_caps();
    if (b.pair_caps().empty()) return a.pair_caps();
    std::vector<int> out(a.pair_caps().size());
    for (std::size_t j = 0; j < out.size(); ++j) {
        const int x = a.pair_caps()[j], y = b.pair_caps()[j];
        out[j] = x < 0 ? y : (y < 0 ? x : std::min(x, y));
    }
    return out;
}

} // namespace detail

template <class S>
Series<S> add(const Series<S> &a, const Series<S> &b, int order)
{
    detail::check_compatible(a, b, "add");
    Series<S> out(a.dof(), order, detail::merged_caps(a, b));
    for (const auto &[m, c] : a.terms()) out.add_term(m, c);
    for (const auto &[m, c] : b.terms()) out.add_term(m, c);
    out.set_reality_flag_unchecked(a.reality_flag() && b.reality_flag());
    return out;
}

template <class S>
Series<S> subtract(const Series<S> &a, const Series<S> &b, int order)
{
    detail::check_compatible(a, b, "subtract");
    Series<S> out(a.dof(), order, detail::merged_caps(a, b));
    for (const auto &[m, c] : a.terms()) out.add_term(m, c);
    for (const auto &[m, c] : b.terms()) out.add_term(m, -c);
    out.set_reality_flag_unchecked(a.reality_flag() && b.reality_flag());
    return out;
}

template <class S>
Series<S> scale(const Series<S> &a, const S &c, int order)
{
    Series<S> out(a.dof(), order, a.pair_caps());
    if (!c.is_zero())
        for (const auto &[m, x] : a.terms()) out.add_term(m, x * c);
    out.set_reality_flag_unchecked(a.reality_flag() && c.is_real());
    return out;
}

template <class S>
Series<S> multiply(const Series<S> &a, const Series<S> &b, int order)
{
    detail::check_compatible(a, b, "multiply");
    Series<S> out(a.dof(), order, detail::merged_caps(a, b));
    for (const auto &[ma, ca] : a.terms()) {
        if (ma.degree() > order) break;
        for (const auto &[mb, cb] : b.terms()) {
            if (ma.degree() + mb.degree() > order) break;
            out.add_term(ma * mb, ca * cb);
        }
    }
    out.set_reality_flag_unchecked(a.reality_flag() && b.reality_flag());
    return out;
}

enum class CombineMode { add, scale, multiply };

/// Single entry point for the ring operations followed by truncation.
template <class S>
Series<S> series_combine(CombineMode mode, const Series<S> &a, const std::variant<Series<S>, S> &operand, int order)
{
    switch (mode) {
    case CombineMode::add:
        return add(a, std::get<Series<S>>(operand), order);
    case CombineMode::multiply:
        return multiply(a, std::get<Series<S>>(operand), order);
    case CombineMode::scale:
        return scale(a, std::get<S>(operand), order);
    }
    throw std::logic_error("unknown combine mode");
}

/// {a, b} truncated at `order`. For monomials,
/// {xi^u1 eta^v1, xi^u2 eta^v2} = i sum_j (v1_j u2_j - u1_j v2_j) xi^(u1+u2-e_j) eta^(v1+v2-e_j).
template <class S>
Series<S> poisson_bracket(const Series<S> &a, const Series<S> &b, int order)
{
    detail::check_compatible(a, b, "poisson_bracket");
    const int d = a.dof();
    Series<S> out(d, order, detail::merged_caps(a, b));
    const S i_unit = imaginary_unit<S>();
    for (const auto &[ma, ca] : a.terms()) {
        if (ma.degree() - 2 > order) break;
        for (const auto &[mb, cb] : b.terms()) {
            if (ma.degree() + mb.degree() - 2 > order) break;
            const S prod = ca * cb;
            for (int j = 0; j < d; ++j) {
                const long long w = static_cast<long long>(ma.v(j)) * mb.u(j) - static_cast<long long>(ma.u(j)) * mb.v(j);
                if (w == 0) continue;
                Monomial m = ma * mb;
                m.set_u(j, m.u(j) - 1);
                m.set_v(j, m.v(j) - 1);
                out.add_term(m, (prod * make_real<S>(ScalarTraits<S>::from_int(w))).times_i());
            }
        }
    }
    (void)i_unit;
    out.set_reality_flag_unchecked(a.reality_flag() && b.reality_flag());
    return out;
}

class GeneratorError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// H o Phi^1_chi = H + {H,chi} + {{H,chi},chi}/2! + ... truncated at `order`.
/// The generator must start at degree >= 3 so that each bracket raises the
/// lowest degree and the sum terminates.
template <class S>
Series<S> lie_transform(const Series<S> &h, const Series<S> &chi, int order, int *iterations = nullptr)
{
    detail::check_compatible(h, chi, "lie_transform");
    if (!chi.empty() && chi.valuation() <= 2)
        throw GeneratorError("lie_transform: generator has terms of degree " + std::to_string(chi.valuation()) +
                             " (<= 2); the Lie series would not terminate");
    Series<S> out = h.with_order(order);
    Series<S> term = out;
    int k = 0;
    while (!term.empty() && !chi.empty()) {
        ++k;
        term = poisson_bracket(term, chi, order);
        if (term.empty()) break;
        term = scale(term, make_real<S>(ScalarTraits<S>::from_ratio(1, k)), order);
        out = add(out, term, order);
    }
    if (iterations) *iterations = k;
    out.set_reality_flag_unchecked(h.reality_flag() && chi.reality_flag());
    return out;
}

/// (resonant part, nonresonant part) with respect to the declared lattice.
template <class S>
std::pair<Series<S>, Series<S>> split_resonant(const Series<S> &h, const FrequencyVector<S> &omega)
{
    Series<S> res(h.dof(), h.order(), h.pair_caps());
    Series<S> nonres(h.dof(), h.order(), h.pair_caps());
    for (const auto &[m, c] : h.terms()) {
        if (frequency_pairing(m, omega).resonance == Resonance::resonant)
            res.add_term(m, c);
        else
            nonres.add_term(m, c);
    }
    res.set_reality_flag_unchecked(h.reality_flag());
    nonres.set_reality_flag_unchecked(h.reality_flag());
    return {std::move(res), std::move(nonres)};
}

/// Point in complex coordinates (xi_1..xi_d, eta_1..eta_d).
template <class S>
struct PhasePoint {
    std::vector<S> xi;
    std::vector<S> eta;

    [[nodiscard]] int dof() const noexcept { return static_cast<int>(xi.size()); }
};

template <class S>
struct Evaluation {
    S value;
    std::vector<S> xi_dot;  ///< -i dH/deta_j
    std::vector<S> eta_dot; ///< i dH/dxi_j
};

/// Converts real coordinates (x_1, y_1, ..., x_d, y_d) to (xi, eta). Needs a
/// backend in which sqrt(2) is representable.
template <class S>
PhasePoint<S> phase_point_from_real(const std::vector<RealOf<S>> &xy)
{
    if (xy.size() % 2 != 0) throw DimensionError("real phase point must have even length");
    const auto d = xy.size() / 2;
    const RealOf<S> inv_sqrt2 = RealOf<S>(1) / ScalarTraits<S>::sqrt(ScalarTraits<S>::from_int(2));
    PhasePoint<S> p;
    for (std::size_t j = 0; j < d; ++j) {
        p.xi.emplace_back(xy[2 * j] * inv_sqrt2, xy[2 * j + 1] * inv_sqrt2);
        p.eta.emplace_back(xy[2 * j] * inv_sqrt2, -xy[2 * j + 1] * inv_sqrt2);
    }
    return p;
}

template <class S>
Evaluation<S> evaluate(const Series<S> &h, const PhasePoint<S> &z, bool with_field = true)
{
    const int d = h.dof();
    if (z.dof() != d || static_cast<int>(z.eta.size()) != d)
        throw DimensionError("evaluate: point has " + std::to_string(z.dof()) + " degrees of freedom, series " +
                             std::to_string(d));
    const int top = std::max(h.max_degree(), 0);
    // powers[j][e] = xi_j^e, powers[d + j][e] = eta_j^e
    std::vector<std::vector<S>> powers(static_cast<std::size_t>(2 * d));
    for (int j = 0; j < 2 * d; ++j) {
        auto &row = powers[static_cast<std::size_t>(j)];
        const S &base = j < d ? z.xi[static_cast<std::size_t>(j)] : z.eta[static_cast<std::size_t>(j - d)];
        row.reserve(static_cast<std::size_t>(top + 1));
        row.push_back(make_real<S>(RealOf<S>(1)));
        for (int e = 1; e <= top; ++e) row.push_back(row.back() * base);
    }
    auto mono_value = [&](const Monomial &m, int skip_slot) {
        S acc = make_real<S>(RealOf<S>(1));
        for (int s = 0; s < 2 * d; ++s) {
            int e = static_cast<int>(m.raw()[static_cast<std::size_t>(s)]);
            if (s == skip_slot) --e;
            if (e > 0) acc *= powers[static_cast<std::size_t>(s)][static_cast<std::size_t>(e)];
        }
        return acc;
    };
    Evaluation<S> out;
    out.xi_dot.assign(static_cast<std::size_t>(d), S{});
    out.eta_dot.assign(static_cast<std::size_t>(d), S{});
    for (const auto &[m, c] : h.terms()) {
        out.value += c * mono_value(m, -1);
        if (!with_field) continue;
        for (int j = 0; j < d; ++j) {
            if (m.u(j) > 0) {
                const S dxi = c * make_real<S>(ScalarTraits<S>::from_int(m.u(j))) * mono_value(m, j);
                out.eta_dot[static_cast<std::size_t>(j)] += dxi.times_i();
            }
            if (m.v(j) > 0) {
                const S deta = c * make_real<S>(ScalarTraits<S>::from_int(m.v(j))) * mono_value(m, d + j);
                out.xi_dot[static_cast<std::size_t>(j)] -= deta.times_i();
            }
        }
    }
    return out;
}

} // namespace birkhoff

#endif
