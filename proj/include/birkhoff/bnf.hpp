// Birkhoff normalization by Lie transforms, degree by degree.

#ifndef BIRKHOFF_BNF_HPP
#define BIRKHOFF_BNF_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "birkhoff/frequency.hpp"
#include "birkhoff/series.hpp"
#include "birkhoff/series_io.hpp"

namespace birkhoff {

class NormalizationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <class S>
using BnfMap = std::map<ActionIndex, S, ActionIndexOrder>;

struct NormalizeOptions {
    /// Leave resonant non-action monomials in place instead of failing.
    bool allow_resonant = false;
    /// One generator per degree (true) or one per monomial (false).
    bool batched = true;
    /// Shuffles the elimination order within each degree.
    std::optional<std::uint64_t> shuffle_seed;
};

template <class S>
struct DegreeLog {
    int degree = 0;
    int eliminated = 0;
    /// Smallest |<omega, u - v>| divided by at this degree; unset when nothing
    /// was eliminated.
    std::optional<RealOf<S>> min_divisor;
    std::vector<Monomial> resonant_kept;
};

template <class S>
struct NormalFormResult {
    FrequencyVector<S> omega;
    /// Achieved order in the actions; the series work covers degree 2N.
    int order = 0;
    BnfMap<S> bnf;
    std::vector<std::pair<int, Series<S>>> generators;
    /// Non-action terms left in place and all terms of degree > 2N.
    Series<S> remainder;
    std::vector<DegreeLog<S>> log;

    [[nodiscard]] std::optional<RealOf<S>> min_divisor() const
    {
        std::optional<RealOf<S>> out;
        for (const auto &entry : log)
            if (entry.min_divisor && (!out || *entry.min_divisor < *out)) out = entry.min_divisor;
        return out;
    }
};

namespace detail {

template <class S>
void check_elliptic(const Series<S> &h, const FrequencyVector<S> &omega)
{
    const int d = h.dof();
    if (omega.dof() != d)
        throw DimensionError("normalize: series has " + std::to_string(d) + " degrees of freedom, omega " +
                             std::to_string(omega.dof()));
    for (const auto &[m, c] : h.terms()) {
        if (m.degree() > 2) break;
        if (m.degree() < 2) throw NormalizationError("normalize: nonzero term " + m.to_string() + " of degree " +
                                                     std::to_string(m.degree()) + " (equilibrium must be at the origin)");
        if (!m.is_action())
            throw NormalizationError("normalize: quadratic part is not elliptic in the given coordinates (term " +
                                     m.to_string() + ")");
    }
    for (int j = 0; j < d; ++j) {
        const S c = h.coefficient(Monomial::action(d, j));
        const RealOf<S> scale = ScalarTraits<S>::abs(omega[j]) + ScalarTraits<S>::abs(c.re);
        if (!c.is_real() || !ScalarTraits<S>::negligible(c.re - omega[j], scale))
            throw NormalizationError("normalize: coefficient of I" + std::to_string(j + 1) +
                                     " does not match omega_" + std::to_string(j + 1));
        if (omega[j] == 0) throw NormalizationError("normalize: omega_" + std::to_string(j + 1) + " is zero");
    }
}

template <class S>
RealOf<S> divisor_scale(const FrequencyVector<S> &omega, const Monomial &m)
{
    RealOf<S> s = 0;
    for (int j = 0; j < omega.dof(); ++j)
        s += ScalarTraits<S>::abs(omega[j]) * ScalarTraits<S>::from_int(std::abs(m.u(j) - m.v(j)));
    return s;
}

} // namespace detail

/// Normalizes h up to action degree N (series degree 2N). The quadratic part
/// must be sum omega_j I_j; higher-degree action terms are allowed anywhere.
template <class S>
NormalFormResult<S> normalize_to_order(const Series<S> &h, const FrequencyVector<S> &omega, int N,
                                       const NormalizeOptions &opts = {})
{
    if (N < 1) throw std::invalid_argument("normalize: order must be >= 1");
    detail::check_elliptic(h, omega);
    const int top = 2 * N;
    const int work = std::max(top, h.order());
    NormalFormResult<S> out;
    out.omega = omega;
    out.order = N;
    Series<S> cur = h.with_order(work);
    std::optional<std::mt19937_64> rng;
    if (opts.shuffle_seed) rng.emplace(*opts.shuffle_seed);

    for (int g = 3; g <= top; ++g) {
        DegreeLog<S> entry;
        entry.degree = g;
        std::vector<std::pair<Monomial, S>> todo;
        for (const auto &[m, c] : cur.terms()) {
            if (m.degree() < g) continue;
            if (m.degree() > g) break;
            if (m.is_action()) continue;
            const auto p = frequency_pairing(m, omega);
            if (p.resonance == Resonance::resonant) {
                if (!opts.allow_resonant)
                    throw NormalizationError("normalize: resonant non-action monomial " + m.to_string() +
                                             " at degree " + std::to_string(g) +
                                             " (pass allow_resonant for a resonant normal form)");
                entry.resonant_kept.push_back(m);
                continue;
            }
            if (ScalarTraits<S>::negligible(p.pairing, detail::divisor_scale(omega, m)))
                throw NormalizationError("normalize: zero divisor <omega, u - v> for nonresonant monomial " +
                                         m.to_string() + "; the declared lattice is incomplete");
            const RealOf<S> mag = ScalarTraits<S>::abs(p.pairing);
            if (!entry.min_divisor || mag < *entry.min_divisor) entry.min_divisor = mag;
            // chi = i c m / <omega, u - v> removes c m at first order.
            todo.emplace_back(m, (c / make_real<S>(p.pairing)).times_i());
        }
        if (rng) std::shuffle(todo.begin(), todo.end(), *rng);
        entry.eliminated = static_cast<int>(todo.size());
        if (!todo.empty()) {
            if (opts.batched) {
                Series<S> chi(h.dof(), work);
                for (const auto &[m, c] : todo) chi.add_term(m, c);
                chi.set_reality_flag_unchecked(cur.reality_flag());
                cur = lie_transform(cur, chi, work);
                out.generators.emplace_back(g, std::move(chi));
            } else {
                for (const auto &[m, c] : todo) {
                    Series<S> chi(h.dof(), work);
                    chi.add_term(m, c);
                    cur = lie_transform(cur, chi, work);
                    out.generators.emplace_back(g, std::move(chi));
                }
            }
        }
        out.log.push_back(std::move(entry));
    }

    Series<S> rem(h.dof(), work);
    for (const auto &[m, c] : cur.terms()) {
        if (m.degree() <= top && m.is_action())
            out.bnf.emplace(m.u_vector(), c);
        else
            rem.add_term(m, c);
    }
    rem.set_reality_flag_unchecked(cur.reality_flag());
    out.remainder = std::move(rem);
    return out;
}

/// Coefficient of I^idx in the normal form; zero when absent.
template <class S>
S bnf_coefficient(const NormalFormResult<S> &r, const ActionIndex &idx)
{
    if (static_cast<int>(idx.size()) != r.omega.dof()) throw DimensionError("bnf_coefficient: index length");
    if (std::any_of(idx.begin(), idx.end(), [](int e) { return e < 0; }))
        throw std::invalid_argument("bnf_coefficient: negative exponent");
    if (action_degree(idx) > r.order)
        throw std::out_of_range("bnf_coefficient: index of degree " + std::to_string(action_degree(idx)) +
                                " beyond achieved order " + std::to_string(r.order));
    auto it = r.bnf.find(idx);
    return it == r.bnf.end() ? S{} : it->second;
}

enum class RussmannVerdict { nondegenerate, degenerate_at_order };

/// A finite-order certificate: `nondegenerate` is conclusive, while
/// `degenerate_at_order` only says that the truncated gradient is degenerate.
template <class S>
struct RussmannReport {
    RussmannVerdict verdict = RussmannVerdict::degenerate_at_order;
    int order = 0;
    int rank = 0;
    std::optional<std::vector<RealOf<S>>> witness;
    bool conclusive() const { return verdict == RussmannVerdict::nondegenerate; }
};

/// Rows are the coefficient vectors of grad B at each action monomial of
/// degree < order. B is nondegenerate at this order iff they span R^d;
/// otherwise a kernel vector gamma with gamma . grad B == 0 is returned.
template <class S>
RussmannReport<S> russmann_rank(const BnfMap<S> &bnf, int dof, int order)
{
    using R = RealOf<S>;
    std::map<ActionIndex, std::vector<S>, ActionIndexOrder> grad;
    for (const auto &[idx, c] : bnf) {
        if (static_cast<int>(idx.size()) != dof) throw DimensionError("russmann_rank: index length");
        if (action_degree(idx) > order || action_degree(idx) == 0) continue;
        for (int j = 0; j < dof; ++j) {
            if (idx[static_cast<std::size_t>(j)] == 0) continue;
            ActionIndex lower = idx;
            --lower[static_cast<std::size_t>(j)];
            auto &row = grad.try_emplace(lower, std::vector<S>(static_cast<std::size_t>(dof))).first->second;
            row[static_cast<std::size_t>(j)] +=
                c * make_real<S>(ScalarTraits<S>::from_int(idx[static_cast<std::size_t>(j)]));
        }
    }
    std::vector<std::vector<R>> rows;
    for (const auto &[idx, row] : grad) {
        std::vector<R> re(row.size()), im(row.size());
        bool has_im = false;
        for (std::size_t j = 0; j < row.size(); ++j) {
            re[j] = row[j].re;
            im[j] = row[j].im;
            has_im = has_im || row[j].im != 0;
        }
        rows.push_back(std::move(re));
        if (has_im) rows.push_back(std::move(im));
    }
    // Reduced row echelon form with partial pivoting.
    std::vector<int> pivot_cols;
    std::size_t r = 0;
    for (int col = 0; col < dof && r < rows.size(); ++col) {
        const auto c = static_cast<std::size_t>(col);
        std::size_t best = r;
        R scale = 0;
        for (std::size_t i = r; i < rows.size(); ++i) {
            scale = std::max(scale, ScalarTraits<S>::abs(rows[i][c]));
            if (ScalarTraits<S>::abs(rows[i][c]) > ScalarTraits<S>::abs(rows[best][c])) best = i;
        }
        if (rows[best][c] == 0 || ScalarTraits<S>::negligible(rows[best][c], R(1) + scale)) continue;
        std::swap(rows[r], rows[best]);
        const R p = rows[r][c];
        for (auto &x : rows[r]) x /= p;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (i == r || rows[i][c] == 0) continue;
            const R f = rows[i][c];
            for (std::size_t k = 0; k < rows[i].size(); ++k) rows[i][k] -= f * rows[r][k];
        }
        pivot_cols.push_back(col);
        ++r;
    }
    RussmannReport<S> rep;
    rep.order = order;
    rep.rank = static_cast<int>(pivot_cols.size());
    if (rep.rank == dof) {
        rep.verdict = RussmannVerdict::nondegenerate;
        return rep;
    }
    int free_col = 0;
    while (std::find(pivot_cols.begin(), pivot_cols.end(), free_col) != pivot_cols.end()) ++free_col;
    std::vector<R> w(static_cast<std::size_t>(dof), R(0));
    w[static_cast<std::size_t>(free_col)] = 1;
    for (std::size_t i = 0; i < pivot_cols.size(); ++i)
        w[static_cast<std::size_t>(pivot_cols[i])] = -rows[i][static_cast<std::size_t>(free_col)];
    rep.witness = std::move(w);
    return rep;
}

template <class S>
RussmannReport<S> russmann_rank(const NormalFormResult<S> &r, int order)
{
    if (order > r.order)
        throw std::out_of_range("russmann_rank: order " + std::to_string(order) + " beyond achieved order " +
                                std::to_string(r.order));
    return russmann_rank(r.bnf, r.omega.dof(), order);
}

enum class RadiusVerdict { shrinking_to_zero, finite, infinite };

inline std::string to_string(RadiusVerdict v)
{
    switch (v) {
    case RadiusVerdict::shrinking_to_zero:
        return "radius->0";
    case RadiusVerdict::finite:
        return "finite";
    case RadiusVerdict::infinite:
        return "infinite";
    }
    return "?";
}

struct GrowthReport {
    std::vector<ActionIndex> indices;
    /// rho_k = |c_k|^(1/|idx_k|), zero coefficients skipped.
    std::vector<double> roots;
    std::vector<double> running_max;
    bool strictly_increasing = false;
    RadiusVerdict verdict = RadiusVerdict::infinite;
    /// 1 / sup rho; +inf when every coefficient vanishes.
    double radius_estimate = std::numeric_limits<double>::infinity();
};

/// Root-test growth of a coefficient stream. A strictly increasing run of at
/// least three normalized roots is reported as a radius shrinking to zero.
template <class S>
GrowthReport divergence_probe(const std::vector<std::pair<ActionIndex, S>> &coeffs)
{
    if (coeffs.empty()) throw std::invalid_argument("divergence_probe: empty coefficient stream");
    GrowthReport rep;
    for (const auto &[idx, c] : coeffs) {
        const int deg = action_degree(idx);
        if (c.is_zero() || deg == 0) continue;
        const double log_abs = 0.5 * ScalarTraits<S>::log_abs(norm2(c));
        const double rho = std::exp(log_abs / deg);
        rep.indices.push_back(idx);
        rep.roots.push_back(rho);
        rep.running_max.push_back(rep.running_max.empty() ? rho : std::max(rep.running_max.back(), rho));
    }
    if (rep.roots.empty()) return rep;
    rep.radius_estimate = 1.0 / rep.running_max.back();
    rep.strictly_increasing = rep.roots.size() >= 3;
    for (std::size_t i = 1; i < rep.roots.size(); ++i)
        rep.strictly_increasing = rep.strictly_increasing && rep.roots[i] > rep.roots[i - 1];
    rep.verdict = rep.strictly_increasing ? RadiusVerdict::shrinking_to_zero : RadiusVerdict::finite;
    return rep;
}

template <class S>
json normal_form_to_json(const NormalFormResult<S> &r)
{
    json out;
    json om;
    json values = json::array();
    for (const auto &w : r.omega.values()) values.push_back(ScalarTraits<S>::render(w));
    om["values"] = std::move(values);
    om["lattice"] = r.omega.relations();
    out["omega"] = std::move(om);
    out["N"] = r.order;
    out["backend"] = to_string(ScalarTraits<S>::backend);
    json bnf = json::array();
    for (const auto &[idx, c] : r.bnf) {
        json t = scalar_to_json(c);
        bnf.push_back(json{{"idx", idx}, {"re", t["re"]}, {"im", t["im"]}});
    }
    out["bnf"] = std::move(bnf);
    json log = json::array();
    for (const auto &e : r.log) {
        json row{{"degree", e.degree}, {"eliminated", e.eliminated}};
        row["min_divisor"] = e.min_divisor ? json(ScalarTraits<S>::render(*e.min_divisor)) : json(nullptr);
        if (!e.resonant_kept.empty()) {
            json kept = json::array();
            for (const auto &m : e.resonant_kept) kept.push_back(m.to_string());
            row["resonant_kept"] = std::move(kept);
        }
        log.push_back(std::move(row));
    }
    out["log"] = std::move(log);
    return out;
}

inline json growth_report_to_json(const GrowthReport &g)
{
    json out;
    out["indices"] = g.indices;
    out["roots"] = g.roots;
    out["running_max"] = g.running_max;
    out["strictly_increasing"] = g.strictly_increasing;
    out["verdict"] = to_string(g.verdict);
    out["radius_estimate"] = std::isinf(g.radius_estimate) ? json("inf") : json(g.radius_estimate);
    return out;
}

} // namespace birkhoff

#endif
