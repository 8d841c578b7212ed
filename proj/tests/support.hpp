#ifndef BIRKHOFF_TESTS_SUPPORT_HPP
#define BIRKHOFF_TESTS_SUPPORT_HPP

#include "birkhoff/series.hpp"
#include "oracle.hpp"

namespace testing_support {

using birkhoff::ExactScalar;
using birkhoff::Monomial;
using ESeries = birkhoff::Series<ExactScalar>;

inline oracle::Exps exps_of(const Monomial &m)
{
    return {m.raw().begin(), m.raw().end()};
}

inline Monomial monomial_of(const oracle::Exps &e)
{
    const auto d = e.size() / 2;
    return Monomial({e.begin(), e.begin() + static_cast<long>(d)}, {e.begin() + static_cast<long>(d), e.end()});
}

inline oracle::Poly to_poly(const ESeries &s)
{
    oracle::Poly p;
    for (const auto &[m, c] : s.terms()) p[exps_of(m)] = oracle::Gauss{c.re, c.im};
    return p;
}

inline ESeries to_series(const oracle::Poly &p, int d, int order)
{
    ESeries s(d, order);
    for (const auto &[e, c] : p) s.add_term(monomial_of(e), ExactScalar(c.re, c.im));
    return s;
}

inline bool same(const ESeries &s, const oracle::Poly &p)
{
    const auto q = to_poly(s);
    if (q.size() != p.size()) return false;
    for (const auto &[e, c] : p) {
        auto it = q.find(e);
        if (it == q.end() || it->second.re != c.re || it->second.im != c.im) return false;
    }
    return true;
}

inline ESeries random_real_series(std::mt19937_64 &rng, int d, int lo, int hi, int terms, int order)
{
    auto s = to_series(oracle::random_real(rng, d, lo, hi, terms), d, order);
    s.mark_real();
    return s;
}

} // namespace testing_support

#endif
